fn main() {
    std::process::exit(rolling_ellipsoid::cli::run(std::env::args_os()));
}
