fn main() {
    std::process::exit(rept::cli::dispatch(std::env::args_os()));
}
