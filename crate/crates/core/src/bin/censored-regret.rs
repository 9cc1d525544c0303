fn main() {
    std::process::exit(censored_regret::cli::run(std::env::args_os()));
}
