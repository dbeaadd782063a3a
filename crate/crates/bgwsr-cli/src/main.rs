fn main() {
    let code = bgwsr_cli::cli_dispatch(std::env::args());
    std::process::exit(code);
}
