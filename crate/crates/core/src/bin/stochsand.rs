fn main() {
    std::process::exit(stochsand::cli::main_with_args(std::env::args_os()));
}
