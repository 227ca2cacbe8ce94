fn main() {
    std::process::exit(word_measures::cli::dispatch(std::env::args()));
}
