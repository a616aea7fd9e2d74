fn main() {
    std::process::exit(esae::cli::run());
}
