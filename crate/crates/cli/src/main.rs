mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, OutputArgs};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => commands::solve(a).map(|t| (t, None)),
        Command::Compare(a) => commands::compare_cmd(a),
        Command::Profile(a) => commands::profile(a).map(|t| (t, None)),
        Command::Steady(a) => commands::steady(a).map(|t| (t, None)),
    };
    let output = match &cli.command {
        Command::Solve(a) => &a.output,
        Command::Compare(a) => &a.output,
        Command::Profile(a) => &a.output,
        Command::Steady(a) => &a.output,
    };
    match result.and_then(|(text, failure)| write(output, &text).map(|()| failure)) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failure)) | Err(failure) => {
            eprintln!("oxy-fbp: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

fn write(output: &OutputArgs, text: &str) -> Result<(), Failure> {
    output::emit(text, output.out.as_deref()).map_err(|e| {
        let target = output.out.as_ref().map_or_else(
            || "standard output".to_string(),
            |p| p.display().to_string(),
        );
        Failure::Runtime(format!("cannot write {target}: {e}"))
    })
}
