fn main() {
    std::process::exit(booktri_cli::run(std::env::args_os()));
}
