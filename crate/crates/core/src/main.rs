fn main() {
    std::process::exit(levyhk::cli::run(std::env::args_os()));
}
