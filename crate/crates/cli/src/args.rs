use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "qmac", version, about = "Run and verify secure computation protocols over additive quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Execute a protocol once and print transcript, decoded F, ledger and rate.
    Run(RunArgs),
    /// Exhaustive correctness, security, CMI and rate checks.
    Verify(VerifyArgs),
    /// Run `verify` across a parameter grid.
    Sweep(SweepArgs),
    /// List the protocol families and their parameters.
    ListProtocols(ListArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Abstract,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArg {
    /// Protocol family (see `list-protocols`).
    #[arg(value_name = "PROTOCOL")]
    pub positional: Option<String>,
    #[arg(long = "protocol", value_name = "PROTOCOL")]
    pub flag: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[command(flatten)]
    pub protocol: ProtocolArg,
    /// Alphabet size; for qsk-prod a prime power.
    #[arg(long)]
    pub d: Option<u32>,
    /// Field characteristic for qsk-prod.
    #[arg(long)]
    pub p: Option<u32>,
    /// Extension degree for qsk-prod; the mask R for dot-demo.
    #[arg(long)]
    pub r: Option<u32>,
    /// Number of users K.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value = "abstract")]
    pub mode: Mode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Enumeration limit in evaluations; accepts forms like 2e9.
    #[arg(long, env = "QMAC_SECCOMP_LIMIT")]
    pub limit: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Instances to compute (sum and product families).
    #[arg(long)]
    pub instances: Option<usize>,
    /// Alice's input: a bit, or two bits such as `10` for dot-demo.
    #[arg(long)]
    pub a: Option<String>,
    /// Bob's input, same form as `--a`.
    #[arg(long)]
    pub b: Option<String>,
    /// Common randomness Z for the two-user AND protocols.
    #[arg(long)]
    pub z: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub protocol: ProtocolArg,
    /// Values of d, as a list of numbers and inclusive ranges: `2-5`, `3,5,7`.
    #[arg(long, default_value = "2")]
    pub d: String,
    /// Values of K, same syntax as `--d`.
    #[arg(long, default_value = "2")]
    pub k: String,
    #[arg(long, env = "QMAC_SECCOMP_LIMIT")]
    pub limit: Option<String>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct ListArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}
