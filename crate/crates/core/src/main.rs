fn main() {
    std::process::exit(antsel::cli::dispatch(std::env::args_os()));
}
