fn main() {
    std::process::exit(gamma_ops::cli::main_with_args(std::env::args_os()));
}
