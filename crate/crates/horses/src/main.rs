fn main() {
    std::process::exit(horses::cli::run(std::env::args_os()));
}
