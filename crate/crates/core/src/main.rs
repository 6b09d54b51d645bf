fn main() {
    std::process::exit(gtsc_ruin::cli::run(std::env::args_os()));
}
