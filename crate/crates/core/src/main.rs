fn main() {
    std::process::exit(spectral_noise::cli::run(std::env::args_os()));
}
