fn main() {
    std::process::exit(nlv::run(std::env::args_os()));
}
