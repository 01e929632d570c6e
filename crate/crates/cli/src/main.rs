fn main() {
    std::process::exit(kleinian_cli::main_with_args(std::env::args_os()));
}
