fn main() {
    std::process::exit(risim::cli::run());
}
