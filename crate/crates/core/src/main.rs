fn main() {
    std::process::exit(fundus_pulse::cli::run(std::env::args_os()));
}
