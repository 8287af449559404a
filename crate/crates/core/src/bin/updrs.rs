fn main() {
    std::process::exit(updrs_core::cli::run(std::env::args_os()));
}
