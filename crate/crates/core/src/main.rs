fn main() {
    std::process::exit(dlevel::cli::main());
}
