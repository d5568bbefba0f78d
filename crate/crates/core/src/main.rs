fn main() {
    std::process::exit(conebeam::cli::run_cli(std::env::args_os()));
}
