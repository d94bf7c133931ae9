fn main() {
    std::process::exit(pmtb::cli::main_with_args(std::env::args_os()));
}
