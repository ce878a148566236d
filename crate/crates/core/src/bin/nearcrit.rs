fn main() {
    std::process::exit(nearcrit::cli::main_with_args(std::env::args_os()));
}
