fn main() {
    std::process::exit(ris_radar::cli::cli_main(std::env::args_os()));
}
