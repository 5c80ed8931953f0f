fn main() {
    std::process::exit(brems_cli::main_with_args(std::env::args_os()));
}
