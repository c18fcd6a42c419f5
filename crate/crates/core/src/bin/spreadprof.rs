fn main() {
    std::process::exit(spreadprof::cli::run(std::env::args_os()));
}
