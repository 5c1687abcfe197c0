fn main() {
    std::process::exit(wishart_edge::cli::run(std::env::args_os()));
}
