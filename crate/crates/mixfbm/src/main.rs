fn main() {
    std::process::exit(mixfbm::cli::run(std::env::args_os()));
}
