use clap::Parser;

fn main() {
    env_logger::init();
    let args = squeezebath::cli::Args::parse();
    std::process::exit(squeezebath::cli::run(args));
}
