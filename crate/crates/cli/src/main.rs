fn main() {
    std::process::exit(scdm_cli::main_with(std::env::args_os()));
}
