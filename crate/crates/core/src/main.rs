fn main() {
    std::process::exit(fractal_dirac::cli::run());
}
