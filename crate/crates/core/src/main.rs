use std::process::ExitCode;

use cellfree::cli::{run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    run(Cli::parse())
}
