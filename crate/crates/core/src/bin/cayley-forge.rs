fn main() {
    std::process::exit(cayley_forge::cli::dispatch(std::env::args_os()));
}
