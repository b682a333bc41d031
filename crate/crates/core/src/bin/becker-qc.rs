fn main() -> std::process::ExitCode {
    becker_qc::cli::main()
}
