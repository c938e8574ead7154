fn main() {
    std::process::exit(ifcaudit::cli::run(std::env::args_os()));
}
