fn main() {
    std::process::exit(darktrap::cli::run(std::env::args_os()));
}
