fn main() {
    std::process::exit(diverse_cq::run(std::env::args().collect()));
}
