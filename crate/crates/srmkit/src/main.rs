fn main() {
    std::process::exit(srmkit::cli::run());
}
