//! Committed reference outputs. Run with `AVSA_BLESS=1` to regenerate.

mod common;

use common::{golden_dir, golden_outputs};

#[test]
fn golden_files_reproduce() {
    let bless = std::env::var_os("AVSA_BLESS").is_some();
    for (name, bytes) in golden_outputs() {
        let path = golden_dir().join(name);
        if bless {
            std::fs::write(&path, &bytes).unwrap();
            continue;
        }
        let expected = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(expected == bytes, "{name} differs from the committed golden file");
    }
}

#[test]
fn golden_generation_is_repeatable() {
    let a = golden_outputs();
    let b = golden_outputs();
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        assert_eq!(x, y, "{name}");
    }
}
