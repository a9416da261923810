fn main() {
    std::process::exit(delayg::cli::run());
}
