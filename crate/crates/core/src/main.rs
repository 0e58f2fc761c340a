fn main() {
    std::process::exit(gyromat::cli::run(std::env::args_os()));
}
