fn main() {
    std::process::exit(dgpmg_harness::cli::run(std::env::args_os()));
}
