fn main() {
    std::process::exit(fockmetric::cli::main_with_args(std::env::args_os()));
}
