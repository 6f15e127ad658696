use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use casku_sim::config::{GroupChoice, ProcDelays};
use casku_sim::ScenarioConfig;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "casku", version, about = "Cluster authentication and session-key update for UAV swarms")]
pub struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one honest join, transfer and key update and print the transcript.
    #[command(after_long_help = DEMO_COLUMNS)]
    Demo(DemoArgs),
    /// Simulate a parameter sweep and write the metrics table.
    #[command(after_long_help = SWEEP_COLUMNS)]
    Sweep(SweepArgs),
    /// Compare published cost polynomials with this implementation.
    #[command(after_long_help = OVERHEAD_COLUMNS)]
    Overhead(OverheadArgs),
    /// Run the forgery, confidentiality and linkability suites.
    #[command(after_long_help = ATTACK_COLUMNS)]
    Attack(AttackArgs),
    /// Run one session-key update and check its costs.
    #[command(after_long_help = KEYUPDATE_COLUMNS)]
    Keyupdate(KeyupdateArgs),
}

const DEMO_COLUMNS: &str = "\
CSV columns (--out):
  step     running message number
  phase    join, transfer or key-update
  message  message type
  from     sender node label
  to       receiver node label, or * for a broadcast
  bytes    encoded size
  outcome  accepted, or the verifier's error";

const SWEEP_COLUMNS: &str = "\
CSV columns (--out, or standard output without it):
  scenario-id      <param>=<value>/<mam|base>
  n_nuav           joining UAVs
  n_cm             cluster members
  n_ch             cluster heads, the origin included
  bitrate          bits per second
  mam              true for the aggregated join
  latency_ms       first join request sent to last NUAV confirmation verified
  e_nuav_j         mean energy per NUAV over the join, J
  e_cm_j           mean energy per member, J
  e_ch_j           energy of the origin cluster head, J
  e_otherch_j      mean energy per other cluster head, J
  bytes_join       payload bytes on air during the join
  bytes_keyupdate  payload bytes on air during the key update after the join";

const OVERHEAD_COLUMNS: &str = "\
CSV columns (--out):
  stage           init, uav_auth or key_update
  term            t_hf, t_me, t_mm, t_xor, t_sss or bits
  paper_value     published polynomial at the given sizes
  measured_value  this implementation
  delta           measured_value - paper_value";

const ATTACK_COLUMNS: &str = "\
CSV columns (--out, or standard output without it):
  suite      game/strategy
  trials     trials run
  wins       accepted forgeries (dug) or correct guesses (dcg, unlink)
  threshold  largest passing value: wins for dug, accuracy otherwise
  pass       true when the suite stays within its threshold";

const KEYUPDATE_COLUMNS: &str = "\
CSV columns (--out):
  n_cm       members rekeyed
  agreed     every member reconstructed the dealer's key
  t_hf       hashes over the whole round
  t_me       modular exponentiations
  t_mm       modular multiplications
  t_xor      XORs
  t_sss      share evaluations
  bytes      bytes of all inits and envelopes
  matches    counts and bytes equal the closed forms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MamChoice {
    On,
    Off,
    Both,
}

impl MamChoice {
    pub fn variants(self) -> &'static [bool] {
        match self {
            MamChoice::On => &[true],
            MamChoice::Off => &[false],
            MamChoice::Both => &[true, false],
        }
    }
}

/// Scenario flags. Flags override the config file; anything unset keeps
/// the file's value or the default.
#[derive(Debug, Clone, Args)]
pub struct ScenarioArgs {
    /// JSON object with ScenarioConfig fields.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// New UAVs asking to join [default: 5].
    #[arg(long)]
    pub n_nuav: Option<usize>,
    /// Members of the joined cluster [default: 5].
    #[arg(long)]
    pub n_cm: Option<usize>,
    /// Cluster heads, the joined cluster's included [default: 5].
    #[arg(long)]
    pub n_ch: Option<usize>,
    /// Mb/s [default: 48].
    #[arg(long)]
    pub bitrate: Option<u64>,
    /// RNG seed [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// tiny (q = 11) or full (2048-bit p) [default: full].
    #[arg(long, value_parser = parse_group)]
    pub group: Option<GroupChoice>,
    /// Same as --group tiny.
    #[arg(long, conflicts_with = "group")]
    pub tiny: bool,
    /// Reproduce the published message formulas, weaknesses included.
    #[arg(long)]
    pub paper_literal: bool,
    /// JSON object with per-operation delays in µs (t_me, t_mm, t_hf, t_xor, t_sss).
    #[arg(long, value_name = "FILE")]
    pub proc_delays: Option<PathBuf>,
}

fn parse_group(s: &str) -> Result<GroupChoice, String> {
    s.parse()
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

impl ScenarioArgs {
    pub fn resolve(&self, base: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?,
            None => base,
        };
        if let Some(p) = &self.proc_delays {
            cfg.proc_delay_per_op = serde_json::from_str::<ProcDelays>(&read(p)?)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        }
        if let Some(v) = self.n_nuav {
            cfg.n_nuav = v;
        }
        if let Some(v) = self.n_cm {
            cfg.n_cm = v;
        }
        if let Some(v) = self.n_ch {
            cfg.n_ch = v;
        }
        if let Some(v) = self.bitrate {
            cfg.bitrate = mbps(v)?;
        }
        if let Some(v) = self.seed {
            cfg.rng_seed = v;
        }
        if let Some(g) = self.group {
            cfg.group = g;
        }
        if self.tiny {
            cfg.group = GroupChoice::Tiny;
        }
        if self.paper_literal {
            cfg.paper_literal = true;
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

pub fn mbps(v: u64) -> Result<u64, CliError> {
    v.checked_mul(1_000_000).ok_or_else(|| CliError::Config(format!("bitrate {v} Mb/s is out of range")))
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Also write the transcript as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// n_nuav, n_cm, n_ch or bitrate.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values; bitrates in Mb/s.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<u64>,
    #[arg(long, value_enum, default_value = "both")]
    pub mam: MamChoice,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OverheadArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Bits per Z_p* field when evaluating the published polynomials.
    #[arg(long, default_value_t = 256)]
    pub z_bits: u64,
    /// Bits per timestamp.
    #[arg(long, default_value_t = 32)]
    pub t_bits: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AttackArgs {
    /// Comma-separated: dug, dcg, unlink.
    #[arg(long, value_delimiter = ',', default_value = "dug,dcg,unlink")]
    pub suite: Vec<String>,
    /// Trials per game (DUG: per strategy).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Independent sessions the trials are split over.
    #[arg(long, default_value_t = 16)]
    pub sessions: usize,
    #[arg(long, default_value = "full", value_parser = parse_group)]
    pub group: GroupChoice,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct KeyupdateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
