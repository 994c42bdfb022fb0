fn main() {
    std::process::exit(indeplab_cli::run(std::env::args_os()));
}
