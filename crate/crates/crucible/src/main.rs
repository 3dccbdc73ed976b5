fn main() {
    std::process::exit(crucible::cli::main_entry());
}
