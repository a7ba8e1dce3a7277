fn main() -> std::process::ExitCode {
    slackstitch::cli::main()
}
