fn main() {
    std::process::exit(copson::cli::run(std::env::args_os()));
}
