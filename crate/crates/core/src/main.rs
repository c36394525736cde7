fn main() {
    std::process::exit(mlq::cli::run(std::env::args_os()));
}
