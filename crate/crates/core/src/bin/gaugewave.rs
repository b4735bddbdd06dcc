fn main() {
    std::process::exit(gaugewave::cli::run_cli(std::env::args_os()));
}
