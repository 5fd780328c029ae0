fn main() {
    std::process::exit(einstein_lab_cli::run(std::env::args_os()));
}
