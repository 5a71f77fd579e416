fn main() {
    std::process::exit(useqd::cli::run(std::env::args_os()));
}
