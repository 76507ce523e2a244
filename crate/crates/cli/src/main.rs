fn main() {
    std::process::exit(omniport_cli::run(std::env::args_os()));
}
