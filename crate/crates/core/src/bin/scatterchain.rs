fn main() {
    std::process::exit(scatterchain::harness::run_cli(std::env::args_os()));
}
