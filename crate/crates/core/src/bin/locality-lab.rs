fn main() {
    std::process::exit(locality_lab::cli::main());
}
