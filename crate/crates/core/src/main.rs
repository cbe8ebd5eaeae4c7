fn main() {
    std::process::exit(gaitsynth::cli::run(std::env::args_os()));
}
