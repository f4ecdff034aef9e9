fn main() {
    std::process::exit(locmem_cli::run(std::env::args_os().collect()));
}
