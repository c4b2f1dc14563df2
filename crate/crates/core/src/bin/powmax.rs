fn main() {
    std::process::exit(powmax::cli::run_from_args(std::env::args_os()));
}
