fn main() {
    std::process::exit(gather_core::cli::main_with(std::env::args_os()));
}
