fn main() {
    std::process::exit(equicalib::cli::run(std::env::args_os()));
}
