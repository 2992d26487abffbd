fn main() {
    std::process::exit(uafkit::cli::run());
}
