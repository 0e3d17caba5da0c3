fn main() {
    std::process::exit(dln_cli::run(std::env::args_os()));
}
