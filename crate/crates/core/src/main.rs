fn main() {
    std::process::exit(opinion_core::cli::dispatch(std::env::args()));
}
