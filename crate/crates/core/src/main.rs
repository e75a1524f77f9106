fn main() {
    std::process::exit(levy_recur::cli::main_entry());
}
