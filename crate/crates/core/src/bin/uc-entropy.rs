fn main() {
    std::process::exit(uc_entropy::cli::dispatch(std::env::args_os()));
}
