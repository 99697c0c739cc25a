fn main() {
    std::process::exit(cfskew_cli::main_with_args(std::env::args_os()));
}
