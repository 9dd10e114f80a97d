use std::path::PathBuf;

use adoptlab::config::Command;
use clap::Parser;

#[derive(Debug, Parser)]
#[command(name = "adoptlab", version, about = "Simulate and analyse clinical AI adoption dynamics")]
struct Args {
    /// Subcommand to run.
    #[arg(value_enum)]
    command: Command,
    /// JSON config file. Omitted sections take their default values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `outputDir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let args = Args::parse();
    let code = adoptlab::run::run(args.command, args.config.as_deref(), args.out.as_deref());
    std::process::exit(code);
}
