fn main() {
    std::process::exit(vbench2_cli::cli::run(std::env::args_os()));
}
