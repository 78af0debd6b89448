//! `gqms`: command-line front end for the decoherence-free subalgebra analysis.

mod args;
mod commands;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Config, Format};
use commands::Output;
use error::CliError;

fn run(cli: &Cli, cfg: &Config) -> Result<Output, CliError> {
    match &cli.command {
        Command::Validate { model } => commands::cmd_validate(model, cfg),
        Command::Analyze { model } => commands::cmd_analyze(model, cfg),
        Command::Classify { model } => commands::cmd_classify(model, cfg),
        Command::Evolve { model, z, t } => commands::cmd_evolve(model, z, t, cfg),
        Command::Crosscheck { model, random } => commands::cmd_crosscheck(model.as_deref(), *random, cfg),
        Command::Oracle {
            model,
            z,
            t,
            cutoffs,
            sector,
        } => commands::cmd_oracle(model, z, *t, cutoffs, *sector, cfg),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string_pretty(&e.to_json()).expect("error JSON"));
    ExitCode::from(e.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help, --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Usage(e.render().to_string().trim_end().to_string())),
    };
    let cfg = match Config::resolve(&cli) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    match run(&cli, &cfg) {
        Ok(out) => {
            match cfg.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("output JSON")),
                Format::Text => {
                    for w in &out.warnings {
                        eprintln!("{w}");
                    }
                    print!("{}", out.text);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}
