fn main() {
    std::process::exit(crackwidth::cli::main_from_args(std::env::args_os()));
}
