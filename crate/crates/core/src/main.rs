fn main() {
    std::process::exit(breakscan::cli::main());
}
