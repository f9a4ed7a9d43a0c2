use std::io;
use std::process::ExitCode;

use clap::Parser;
use qsieve_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exit = run(cli, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(exit.code())
}
