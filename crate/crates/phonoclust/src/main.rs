fn main() {
    std::process::exit(phonoclust::cli::run(std::env::args_os()));
}
