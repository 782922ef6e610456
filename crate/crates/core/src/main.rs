fn main() {
    std::process::exit(kittel_zipper::cli::run());
}
