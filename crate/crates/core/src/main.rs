fn main() {
    std::process::exit(pffw::harness::cli_main(std::env::args_os()));
}
