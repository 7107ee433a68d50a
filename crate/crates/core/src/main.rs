use clap::Parser;

use arc_vas::cli::{run, Cli, LOG_ENV};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "info")).init();
    std::process::exit(run(Cli::parse()));
}
