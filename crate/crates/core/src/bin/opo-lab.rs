fn main() {
    std::process::exit(opo_lab::cli::run(std::env::args_os()));
}
