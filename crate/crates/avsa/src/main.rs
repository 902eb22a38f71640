fn main() -> std::process::ExitCode {
    avsa::cli::run(std::env::args_os())
}
