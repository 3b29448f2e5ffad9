fn main() -> std::process::ExitCode {
    gravclock_cli::run(std::env::args_os())
}
