fn main() {
    std::process::exit(aspect_sentiment::cli::run(std::env::args_os()));
}
