fn main() {
    std::process::exit(vortexlab_cli::run_cli(std::env::args_os()));
}
