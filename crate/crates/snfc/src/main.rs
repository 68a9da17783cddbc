fn main() {
    std::process::exit(snfc::cli::run(std::env::args_os()));
}
