//! `coldsig`: one invocation per protocol step, with envelope files as the
//! only thing crossing between machines.

mod commands;
mod workdir;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coldsig::keygen::Role;
use coldsig::Scheme;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "coldsig", version, about = "Two-party signing for air-gapped cold wallets")]
pub struct Cli {
    /// Directory for share, session and envelope files.
    #[arg(long, global = true, default_value = ".")]
    pub workdir: PathBuf,
    #[arg(long, global = true)]
    pub role: Option<Role>,
    #[arg(long, global = true)]
    pub scheme: Option<Scheme>,
    /// Share file; defaults to `share.cws` in the working directory.
    #[arg(long, global = true)]
    pub share: Option<PathBuf>,
    /// Destination whitelist; required for the core role.
    #[arg(long, global = true)]
    pub policy: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = coldsig::paillier::DEFAULT_MODULUS_BITS)]
    pub paillier_bits: u64,
    /// Allow overwriting an existing share file.
    #[arg(long, global = true)]
    pub force: bool,
    /// Deflate envelopes when that makes them smaller.
    #[arg(long, global = true)]
    pub compress: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a share and the public-share envelope for the peer.
    Keygen {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Derive a user share from this hex master seed instead of sampling.
        #[arg(long, requires = "account")]
        recover_seed: Option<String>,
        #[arg(long, requires = "recover_seed")]
        account: Option<String>,
    },
    /// Combine the peer's public share into the wallet key.
    KeygenFinish { peer: PathBuf },
    /// Start a signing session for a JSON transaction.
    SignInit {
        tx: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Core side: check policy and answer a signing request.
    SignRespond {
        request: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine the core's answer into the final signature.
    SignFinalize { response: PathBuf },
    /// Check a signature against a public key and transaction.
    Verify {
        #[arg(long)]
        pubkey: String,
        #[arg(long)]
        tx: PathBuf,
        #[arg(long)]
        signature: String,
    },
    /// Report envelope sizes for one signing round per scheme.
    BenchSizes,
    /// Print the per-role operation count table.
    Opcounts,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] coldsig::Error),
    #[error("{0}")]
    Config(String),
    #[error("transaction JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("signature rejected")]
    Rejected,
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.class().exit_code() as u8,
            CliError::Config(_) | CliError::Json(_) => 2,
            CliError::Rejected => 4,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
