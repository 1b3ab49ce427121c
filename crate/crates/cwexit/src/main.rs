fn main() {
    std::process::exit(cwexit::cli::main());
}
