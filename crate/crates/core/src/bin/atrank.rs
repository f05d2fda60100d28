fn main() {
    std::process::exit(atrank::cli::run(std::env::args_os()));
}
