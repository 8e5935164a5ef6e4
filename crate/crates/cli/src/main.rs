fn main() {
    std::process::exit(cryoshield_cli::run(std::env::args_os()));
}
