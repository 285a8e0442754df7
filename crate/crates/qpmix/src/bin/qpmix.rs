fn main() {
    std::process::exit(qpmix::cli::run(std::env::args().collect()));
}
