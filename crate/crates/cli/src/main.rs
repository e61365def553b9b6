fn main() {
    std::process::exit(dkmeasure_cli::run(std::env::args_os()));
}
