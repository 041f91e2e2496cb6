fn main() {
    std::process::exit(radner_cli::run(std::env::args_os()));
}
