// SPDX-License-Identifier: Apache-2.0

//! `skelfuzz`: grammar building, mutation fuzzing, replay and triage.
//!
//! Exit codes: 0 clean, 1 usage or configuration error, 2 bug found.

mod args;
mod foundry;
mod fuzz;
mod gen;
mod replay;
mod triage;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{Cli, Cmd, FoundryCmd, FuzzCmd, GenCmd, TriageCmd};
use skelfuzz::config::CampaignConfig;
use skelfuzz::difftest::{SolverCmd, SolverConfig};

pub const EXIT_CLEAN: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_BUG: u8 = 2;

/// Settings shared by every subcommand.
pub struct Ctx {
    pub config: CampaignConfig,
    pub config_path: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Ctx {
    fn load(cli: &Cli) -> Result<Self> {
        let config = match &cli.config {
            Some(p) => CampaignConfig::load(p)?,
            None => CampaignConfig::default(),
        };
        Ok(Ctx {
            config,
            config_path: cli.config.clone(),
            seed: cli.seed,
        })
    }

    /// Solvers from `--solvers` if given, else from the campaign file.
    pub fn solvers(&self, flag: Option<&PathBuf>) -> Result<Vec<SolverCmd>> {
        match flag {
            Some(p) => SolverConfig::load(p).with_context(|| format!("loading solvers from {}", p.display())),
            None => Ok(self.config.solvers.clone()),
        }
    }

    /// Arguments that make a child `skelfuzz` see the same configuration.
    pub fn forwarded_args(&self, solvers: Option<&PathBuf>) -> Result<Vec<String>> {
        let abs = |p: &PathBuf| -> Result<String> {
            Ok(std::path::absolute(p)
                .with_context(|| format!("resolving {}", p.display()))?
                .to_string_lossy()
                .into_owned())
        };
        let mut out = Vec::new();
        if let Some(c) = &self.config_path {
            out.extend(["--config".to_string(), abs(c)?]);
        }
        if let Some(s) = solvers {
            out.extend(["--solvers".to_string(), abs(s)?]);
        }
        Ok(out)
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
}

fn dispatch(cli: Cli) -> Result<u8> {
    let ctx = Ctx::load(&cli)?;
    match cli.cmd {
        Cmd::Foundry {
            cmd: FoundryCmd::Build(a),
        } => foundry::build(&ctx, a),
        Cmd::Gen { cmd: GenCmd::Sample(a) } => gen::sample(&ctx, a),
        Cmd::Fuzz { cmd: FuzzCmd::Run(a) } => fuzz::run(&ctx, a),
        Cmd::Replay(a) => replay::run(&ctx, a),
        Cmd::Triage { cmd } => match cmd {
            TriageCmd::Dedup(a) => triage::dedup(&ctx, a),
            TriageCmd::Reduce(a) => triage::reduce(&ctx, a),
            TriageCmd::Bisect(a) => triage::bisect(&ctx, a),
            TriageCmd::Check(a) => triage::check(&ctx, a),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's own code for usage errors is 2, which here means "bug".
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_ERROR } else { EXIT_CLEAN });
        }
    };
    init_logging(cli.verbose);
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

/// Prints `value` as one line of JSON on stdout.
pub fn emit(value: &serde_json::Value) {
    println!("{value}");
}
