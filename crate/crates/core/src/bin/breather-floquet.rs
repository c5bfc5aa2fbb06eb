fn main() -> std::process::ExitCode {
    breather_floquet::cli::main()
}
