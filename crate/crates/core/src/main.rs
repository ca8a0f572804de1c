use clap::Parser;
use fracimp::cli::{run, Cli};

fn main() {
    std::process::exit(run(&Cli::parse()));
}
