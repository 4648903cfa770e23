fn main() {
    std::process::exit(thzvr::cli::run(std::env::args_os()));
}
