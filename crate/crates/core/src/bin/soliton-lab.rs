fn main() {
    std::process::exit(soliton_lab::cli::run(std::env::args_os()));
}
