fn main() {
    std::process::exit(volcollapse::cli::run(std::env::args_os()));
}
