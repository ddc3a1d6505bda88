fn main() {
    std::process::exit(gce_lab::cli::run());
}
