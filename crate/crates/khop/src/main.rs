fn main() {
    std::process::exit(khop::cli::run(std::env::args_os()));
}
