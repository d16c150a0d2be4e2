fn main() {
    std::process::exit(llds::cli::main_with_args(std::env::args_os()));
}
