fn main() {
    std::process::exit(qflab::cli::dispatch(std::env::args_os()));
}
