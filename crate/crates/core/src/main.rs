fn main() -> std::process::ExitCode {
    iwatsuka::cli::main()
}
