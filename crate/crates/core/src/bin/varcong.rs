fn main() {
    std::process::exit(varcong::cli::main_with_args(std::env::args_os()));
}
