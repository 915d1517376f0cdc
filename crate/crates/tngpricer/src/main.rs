use clap::Parser;
use tngpricer::cli::Cli;

fn main() {
    let cli = Cli::parse();
    std::process::exit(tngpricer::run(&cli));
}
