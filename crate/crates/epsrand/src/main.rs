fn main() {
    std::process::exit(epsrand::cli::run(std::env::args_os()));
}
