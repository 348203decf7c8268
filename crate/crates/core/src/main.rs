fn main() {
    std::process::exit(figui::cli::run());
}
