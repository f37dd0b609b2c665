fn main() {
    std::process::exit(witnesslab_cli::run(std::env::args_os()));
}
