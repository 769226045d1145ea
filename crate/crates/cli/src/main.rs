use clap::Parser;
use compound_sim::{run, Cli, SEED_ENV};

fn main() {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    if let Err(e) = run(&cli, env_seed.as_deref()) {
        eprintln!("compound-sim: {e}");
        std::process::exit(e.exit_code());
    }
}
