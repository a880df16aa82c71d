fn main() {
    std::process::exit(kgraph_cli::run(std::env::args_os()));
}
