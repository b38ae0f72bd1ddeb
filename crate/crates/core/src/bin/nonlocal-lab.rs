fn main() {
    std::process::exit(nonlocal_lab::cli::main_with_args(std::env::args_os()));
}
