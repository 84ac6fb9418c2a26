fn main() {
    std::process::exit(poscomm::cli::main());
}
