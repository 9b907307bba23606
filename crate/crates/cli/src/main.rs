fn main() {
    std::process::exit(subgeo_cli::main_with_args(std::env::args_os()));
}
