fn main() {
    std::process::exit(rationex::cli::cli_dispatch(std::env::args_os()));
}
