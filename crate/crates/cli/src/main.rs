//! `vesseltok`: synthesize centerline graphs, rasterize and reconstruct them,
//! train the latent tokenizer and run the two ablation sweeps.
//!
//! Exit codes: 0 success, 1 invalid input, 2 runtime failure, 3 a round trip
//! that finished but changed the topology.

mod ablate;
mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Bad user input detected by the front end itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

pub fn invalid(msg: impl Into<String>) -> anyhow::Error {
    Invalid(msg.into()).into()
}

/// How a successful command ended.
pub enum Outcome {
    Done,
    TopologyChanged,
}

fn is_validation(err: &anyhow::Error) -> bool {
    for cause in err.chain() {
        if cause.is::<Invalid>() {
            return true;
        }
        if let Some(e) = cause.downcast_ref::<vesseltok_core::Error>() {
            return e.is_validation();
        }
        if let Some(e) = cause.downcast_ref::<vesseltok_tokenizer::Error>() {
            return e.is_validation();
        }
    }
    false
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("VESSELTOK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| invalid(format!("VESSELTOK_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match command {
        Command::Synth(a) => commands::synth(a),
        Command::Rasterize(a) => commands::rasterize(a),
        Command::Roundtrip(a) => commands::roundtrip(a),
        Command::Train(a) => commands::train(a),
        Command::Encode(a) => commands::encode(a),
        Command::Decode(a) => commands::decode(a),
        Command::Extract(a) => commands::extract(a),
        Command::Eval(a) => commands::eval(a),
        Command::AblateRadius(a) => ablate::radius(a),
        Command::AblateLatent(a) => ablate::latent(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::TopologyChanged) => ExitCode::from(3),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(if is_validation(&err) { 1 } else { 2 })
        }
    }
}
