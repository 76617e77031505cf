fn main() {
    wks::par::init_threads();
    std::process::exit(wks::cli::run(std::env::args_os()));
}
