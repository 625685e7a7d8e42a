fn main() {
    std::process::exit(drs::cli::run(std::env::args_os()));
}
