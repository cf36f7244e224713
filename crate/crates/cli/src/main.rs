fn main() {
    std::process::exit(dirac2b_cli::main_with_args(std::env::args_os()));
}
