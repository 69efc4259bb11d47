fn main() {
    std::process::exit(mvb::cli::main_with_args(std::env::args_os()));
}
