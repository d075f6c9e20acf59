fn main() {
    std::process::exit(scanplan::cli::run(std::env::args_os()));
}
