fn main() {
    std::process::exit(fpplab::cli::main_with_args(std::env::args_os()));
}
