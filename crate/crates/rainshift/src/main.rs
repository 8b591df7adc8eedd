fn main() {
    std::process::exit(rainshift::cli::main());
}
