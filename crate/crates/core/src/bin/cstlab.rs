fn main() {
    std::process::exit(cstlab::cli::main_entry());
}
