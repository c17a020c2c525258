fn main() -> std::process::ExitCode {
    mpfuzz::cli::main()
}
