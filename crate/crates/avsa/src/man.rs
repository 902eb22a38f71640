//! Man pages rendered from the clap command tree.

use clap::{Arg, Command};
use roff::{bold, italic, roman, Inline, Roff};

fn arg_heading(arg: &Arg) -> Vec<Inline> {
    let mut out = Vec::new();
    if let Some(s) = arg.get_short() {
        out.push(bold(format!("-{s}")));
        if arg.get_long().is_some() {
            out.push(roman(", "));
        }
    }
    if let Some(l) = arg.get_long() {
        out.push(bold(format!("--{l}")));
    }
    if arg.get_action().takes_values() {
        let name = arg
            .get_value_names()
            .and_then(|v| v.first())
            .map(|v| v.to_string())
            .unwrap_or_else(|| arg.get_id().as_str().to_uppercase());
        if arg.is_positional() {
            out.push(italic(format!("<{name}>")));
        } else {
            out.push(roman(" "));
            out.push(italic(format!("<{name}>")));
        }
    }
    out
}

fn arg_body(arg: &Arg) -> String {
    let mut text = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
    let values: Vec<String> = arg
        .get_possible_values()
        .iter()
        .filter(|v| !v.is_hide_set())
        .map(|v| v.get_name().to_string())
        .collect();
    if !values.is_empty() && arg.get_action().takes_values() {
        text.push_str(&format!(" [possible values: {}]", values.join(", ")));
    }
    let defaults: Vec<String> = arg
        .get_default_values()
        .iter()
        .map(|v| v.to_string_lossy().into_owned())
        .collect();
    if !defaults.is_empty() {
        text.push_str(&format!(" [default: {}]", defaults.join(", ")));
    }
    text.trim().to_string()
}

pub(crate) fn render(name: &str, cmd: &Command, version: &str) -> String {
    let mut page = Roff::new();
    page.control(
        "TH",
        [name.to_uppercase().as_str(), "1", "", &format!("{name} {version}")],
    );
    page.control("SH", ["NAME"]);
    let about = cmd.get_about().map(|a| a.to_string()).unwrap_or_default();
    page.text([roman(format!("{name} - {about}"))]);

    page.control("SH", ["SYNOPSIS"]);
    let mut synopsis = vec![bold(name.to_string()), roman(" [OPTIONS]")];
    for p in cmd.get_positionals() {
        let value = p.get_id().as_str().to_uppercase();
        synopsis.push(roman(" "));
        synopsis.push(italic(format!("<{value}>")));
    }
    if cmd.has_subcommands() {
        synopsis.push(roman(" "));
        synopsis.push(italic("<COMMAND>"));
    }
    page.text(synopsis);

    let args: Vec<&Arg> = cmd.get_arguments().filter(|a| !a.is_hide_set()).collect();
    if !args.is_empty() {
        page.control("SH", ["OPTIONS"]);
        for arg in args {
            page.control("TP", []);
            page.text(arg_heading(arg));
            page.text([roman(arg_body(arg))]);
        }
    }
    if cmd.has_subcommands() {
        page.control("SH", ["COMMANDS"]);
        for sub in cmd.get_subcommands() {
            page.control("TP", []);
            page.text([bold(format!("avsa-{}(1)", sub.get_name()))]);
            page.text([roman(sub.get_about().map(|a| a.to_string()).unwrap_or_default())]);
        }
        page.control("SH", ["EXIT STATUS"]);
        page.text([roman(
            "0 on success, 1 when validate finds an invalid file, 2 on usage or runtime errors.",
        )]);
    }
    page.control("SH", ["VERSION"]);
    page.text([roman(version.to_string())]);
    page.render()
}
