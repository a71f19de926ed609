fn main() {
    std::process::exit(cparticle_cli::run(std::env::args_os()));
}
