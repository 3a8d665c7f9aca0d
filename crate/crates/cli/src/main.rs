fn main() {
    std::process::exit(sclaw::run(std::env::args_os()));
}
