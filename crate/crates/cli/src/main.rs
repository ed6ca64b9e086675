#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cli;
mod commands;
mod config;
mod envelope;
mod error;
mod ring;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use cli::{Cli, Command, GlobalArgs};
use commands::{Ctx, Output};
use config::{overlay, ConfigFile};
use error::CliError;

/// Resolved settings as echoed in the envelope; the output path is left out
/// so that it does not change the config hash.
fn echo<T: Serialize>(global: &GlobalArgs, section: &str, args: &T) -> Value {
    let run = GlobalArgs { output: None, config: None, ..global.clone() };
    json!({ "run": run, section: args })
}

fn execute(cli: Cli) -> Result<(Output, Option<std::path::PathBuf>), CliError> {
    let file = match &cli.global.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let global = overlay(&file.run, &cli.global)?;
    let ctx = Ctx::new(&global);
    let out = match &cli.command {
        Command::Phase { kind, args } => {
            let args = overlay(&file.phase, args)?;
            let mut cfg = echo(&global, "phase", &args);
            cfg["phase"]["kind"] = json!(kind.name());
            commands::phase(*kind, &args, &ctx, cfg)?
        }
        Command::Loop(args) => {
            let args = overlay(&file.loop_, args)?;
            commands::loop_cmd(&args, &ctx, echo(&global, "loop", &args))?
        }
        Command::Equiv(args) => {
            let args = overlay(&file.equiv, args)?;
            let mut cfg = echo(&global, "equiv", &args);
            cfg["run"]["seed"] = json!(ctx.seed);
            commands::equiv(&args, &ctx, cfg)?
        }
        Command::Gamma(args) => {
            let args = overlay(&file.gamma, args)?;
            let mut cfg = echo(&global, "gamma", &args);
            cfg["run"]["seed"] = json!(ctx.seed);
            commands::gamma(&args, &ctx, cfg)?
        }
        Command::Ring(args) => {
            let args = overlay(&file.ring, args)?;
            ring::run(&args, &ctx, echo(&global, "ring", &args))?
        }
        Command::Field(args) => {
            let args = overlay(&file.field, args)?;
            commands::field(&args, &ctx, echo(&global, "field", &args))?
        }
    };
    Ok((out, global.output))
}

fn emit(out: &Output, path: Option<&std::path::Path>) -> Result<(), CliError> {
    let bytes = match out {
        Output::Json(env) => {
            let mut s = serde_json::to_vec_pretty(env).map_err(|e| CliError::Output(std::io::Error::other(e)))?;
            s.push(b'\n');
            s
        }
        Output::Csv { bytes, .. } => bytes.clone(),
    };
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(&bytes)?;
            stdout.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = execute(cli).and_then(|(out, path)| {
        emit(&out, path.as_deref())?;
        Ok(out.pass())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
