fn main() {
    std::process::exit(slitflow::cli::run(std::env::args_os()));
}
