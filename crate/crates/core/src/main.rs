fn main() {
    std::process::exit(besselsum::cli::run());
}
