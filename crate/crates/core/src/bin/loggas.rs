fn main() {
    std::process::exit(loggas::cli::main_with(std::env::args_os()));
}
