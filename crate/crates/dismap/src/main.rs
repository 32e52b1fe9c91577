fn main() {
    std::process::exit(dismap::cli::run(std::env::args_os()));
}
