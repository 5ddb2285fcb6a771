// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "skelfuzz",
    version,
    about = "Skeleton-guided differential fuzzing of SMT solvers"
)]
pub struct Cli {
    /// Campaign configuration (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Rng seed; overrides the configured master or sampling seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Build theory grammars from documentation.
    Foundry {
        #[command(subcommand)]
        cmd: FoundryCmd,
    },
    /// Inspect grammars.
    Gen {
        #[command(subcommand)]
        cmd: GenCmd,
    },
    /// Run a fuzzing campaign.
    Fuzz {
        #[command(subcommand)]
        cmd: FuzzCmd,
    },
    /// Classify one script on the configured solvers.
    Replay(ReplayArgs),
    /// Deduplicate, reduce and bisect bug reports.
    Triage {
        #[command(subcommand)]
        cmd: TriageCmd,
    },
}

#[derive(Debug, Subcommand)]
pub enum FoundryCmd {
    Build(FoundryBuildArgs),
}

#[derive(Debug, Args)]
pub struct FoundryBuildArgs {
    /// Directory of per-theory documentation (`.txt`, `.md`, `.smt2`).
    #[arg(long)]
    pub docs: PathBuf,
    /// Where `<theory>.smtg` and `report.json` are written.
    #[arg(long)]
    pub out: PathBuf,
    /// Solvers that must accept the sampled probes.
    #[arg(long)]
    pub solvers: Option<PathBuf>,
    /// Canned model responses: one JSON file shared by all theories in
    /// name order, or a directory holding `<theory>.json`.
    #[arg(long)]
    pub stub: Option<PathBuf>,
    #[arg(long)]
    pub sample_num: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum GenCmd {
    /// Print probe scripts sampled from a grammar.
    Sample(GenSampleArgs),
}

#[derive(Debug, Args)]
pub struct GenSampleArgs {
    /// Grammar file (`.smtg`).
    pub grammar: PathBuf,
    /// Number of probes.
    #[arg(short, default_value_t = 20)]
    pub n: usize,
}

#[derive(Debug, Subcommand)]
pub enum FuzzCmd {
    Run(FuzzRunArgs),
}

#[derive(Debug, Args)]
pub struct FuzzRunArgs {
    /// Seed directory, searched recursively for `.smt2` files.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Grammar directory; the builtin grammars are used otherwise.
    #[arg(long)]
    pub grammars: Option<PathBuf>,
    #[arg(long)]
    pub solvers: Option<PathBuf>,
    /// Bug reports and the bug log go here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Mutations per seed chain.
    #[arg(long)]
    pub iterations: Option<usize>,
    /// Per-run solver timeout in seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
    #[arg(long)]
    pub p_remove: Option<f64>,
    #[arg(long)]
    pub p_adapt: Option<f64>,
    /// Mutate the original seed at every step instead of chaining.
    #[arg(long)]
    pub independent: bool,
    /// Also write every mutant under `<out>/mutants`.
    #[arg(long)]
    pub keep_all: bool,
    /// Drop seeds that already expose a bug.
    #[arg(long)]
    pub prefilter: bool,
    /// Stop after this many mutation attempts; runs until killed otherwise.
    #[arg(long)]
    pub limit: Option<u64>,
    /// Seconds between progress lines on stderr.
    #[arg(long, default_value_t = 10)]
    pub stats_every: u64,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub solvers: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum TriageCmd {
    /// Record bug report directories in a bug log.
    Dedup(DedupArgs),
    /// Shrink a bug with an external delta debugger.
    Reduce(ReduceArgs),
    /// Find the build that fixed a bug.
    Bisect(BisectArgs),
    /// Exit 0 iff a candidate script reproduces a bug (reducer test).
    #[command(hide = true)]
    Check(CheckArgs),
}

#[derive(Debug, Args)]
pub struct DedupArgs {
    /// Bug report directories.
    #[arg(required = true)]
    pub bugs: Vec<PathBuf>,
    /// Bug log; defaults to `<out>/bugs.jsonl` from the configuration.
    #[arg(long)]
    pub db: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    /// Bug report directory.
    pub bug: PathBuf,
    /// Reducer command with `{test}` and `{input}` slots, optionally
    /// `{output}` (e.g. "ddsmt -j 4 {input} {output} {test}").
    #[arg(long)]
    pub reducer: String,
    #[arg(long)]
    pub solvers: Option<PathBuf>,
    /// Where to write the result; defaults to `<bug>/reduced.smt2`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BisectArgs {
    /// Bug report directory.
    pub bug: PathBuf,
    /// TOML list of `[[build]] commit, path`, oldest first.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub solvers: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub bug: PathBuf,
    pub candidate: PathBuf,
    #[arg(long)]
    pub solvers: Option<PathBuf>,
}
