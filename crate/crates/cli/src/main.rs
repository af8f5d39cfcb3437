fn main() {
    std::process::exit(gvf_cli::run_cli(std::env::args_os()));
}
