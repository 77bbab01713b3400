fn main() {
    std::process::exit(evo_optimizer::cli::run(std::env::args_os()));
}
