use clap::Parser;
use transversal_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
