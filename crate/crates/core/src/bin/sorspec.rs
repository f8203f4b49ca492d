fn main() {
    std::process::exit(sorspec::cli::main_exit());
}
