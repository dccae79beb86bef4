fn main() {
    std::process::exit(postselect::cli::main_with_args(std::env::args_os()));
}
