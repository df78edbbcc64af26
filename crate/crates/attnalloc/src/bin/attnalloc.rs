fn main() {
    std::process::exit(attnalloc::cli::run(std::env::args_os()));
}
