fn main() {
    std::process::exit(deeppart::cli::run_cli(std::env::args_os()));
}
