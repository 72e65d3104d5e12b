fn main() {
    std::process::exit(orlicz_lorentz::cli::run(std::env::args_os()))
}
