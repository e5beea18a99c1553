fn main() {
    std::process::exit(eqbif::cli::main_with_args());
}
