use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pogg_core::{GameConfig, StrategyProfile};

use crate::error::{CliError, CliResult, EXIT_CODES};

#[derive(Debug, Parser)]
#[command(
    name = "pogg",
    version,
    about = "Grouped sequential public-goods game with position uncertainty",
    after_help = EXIT_CODES
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print the machine-readable report instead of the text summary.
    #[arg(long, global = true)]
    pub json: bool,

    /// Append the run manifest as one JSON line to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest_log: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write H(γ) on a uniform grid to a curve file.
    SweepH(SweepArgs),
    /// Find every mixed-equilibrium forgiveness level at a given r.
    Solve(SolveArgs),
    /// Smallest r admitting a mixed equilibrium, and its γ.
    Rsharp(RsharpArgs),
    /// Pure-strategy threshold bounds and exact value (m > 1).
    Threshold(ThresholdArgs),
    /// One-shot deviation check of a strategy profile.
    Verify(VerifyArgs),
    /// Monte Carlo simulation of complete plays.
    Simulate(SimulateArgs),
    /// Compare closed forms with the exact oracle.
    Reconcile(ReconcileArgs),
    /// Scan r for mixed equilibria on dirty full-window samples (m > 1).
    Explore(ExploreArgs),
}

/// Game parameters. A config file is read first and flags override it.
/// `r` defaults to 1 for commands whose output does not depend on it.
#[derive(Debug, Clone, Args)]
pub struct GameArgs {
    /// Config file with `key = value` lines (keys: b, n, sizes, m, r).
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Number of groups.
    #[arg(long)]
    pub b: Option<usize>,
    /// Group size (symmetric games).
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated group sizes in position order.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["b", "n"])]
    pub sizes: Option<Vec<usize>>,
    /// Number of predecessor groups sampled.
    #[arg(long)]
    pub m: Option<usize>,
    /// Return on the public good.
    #[arg(long)]
    pub r: Option<f64>,
}

impl GameArgs {
    pub fn resolve(&self, require_r: bool) -> CliResult<GameConfig> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                Some(GameConfig::from_kv_str(&text)?)
            }
            None => None,
        };
        let sizes = match (&self.sizes, self.b, self.n) {
            (Some(s), _, _) => s.clone(),
            (None, Some(b), Some(n)) => vec![n; b],
            (None, b, n) => match &base {
                Some(cfg) if b.is_none() && n.is_none() => cfg.sizes().to_vec(),
                Some(cfg) if cfg.is_symmetric() => {
                    vec![n.unwrap_or(cfg.sizes()[0]); b.unwrap_or(cfg.b())]
                }
                Some(_) => {
                    return Err(CliError::Validation(
                        "--b/--n cannot override an asymmetric config; use --sizes".into(),
                    ))
                }
                None => return Err(CliError::Validation("give --sizes, or both --b and --n, or --config".into())),
            },
        };
        let m = self.m.or(base.as_ref().map(|c| c.m())).unwrap_or(1);
        let r = match (self.r, &base) {
            (Some(r), _) => r,
            (None, Some(cfg)) => cfg.r(),
            (None, None) if require_r => return Err(CliError::Validation("--r is required for this command".into())),
            (None, None) => 1.0,
        };
        Ok(GameConfig::new(sizes, m, r)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileKind {
    /// Contribute on root/clean samples, never on dirty ones.
    Grim,
    /// Contribute on root/clean samples, with probability --gamma on dirty ones.
    Forgiving,
    /// Explicit --p-root, --p-clean, --p-dirty.
    Custom,
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    #[arg(long, value_enum, default_value = "grim")]
    pub profile: ProfileKind,
    /// Forgiveness probability for --profile forgiving.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub p_root: f64,
    #[arg(long, default_value_t = 1.0)]
    pub p_clean: f64,
    #[arg(long, default_value_t = 0.0)]
    pub p_dirty: f64,
}

impl ProfileArgs {
    pub fn resolve(&self) -> CliResult<StrategyProfile> {
        Ok(match self.profile {
            ProfileKind::Grim => StrategyProfile::grim(),
            ProfileKind::Forgiving => {
                let g = self
                    .gamma
                    .ok_or_else(|| CliError::Validation("--profile forgiving needs --gamma".into()))?;
                StrategyProfile::forgiving(g)?
            }
            ProfileKind::Custom => StrategyProfile::new(self.p_root, self.p_clean, self.p_dirty)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// Closed forms where they apply (m = 1), otherwise the oracle.
    Auto,
    Closed,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    /// Largest group size.
    Max,
    /// Average group size.
    Average,
    Both,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Number of grid points on [0, 1].
    #[arg(long, default_value_t = 2048)]
    pub grid: usize,
    /// Also write one curve per group size, keeping the total player
    /// count fixed; each file gets an `_n<size>` suffix.
    #[arg(long, value_delimiter = ',', value_name = "SIZES")]
    pub overlay_n: Option<Vec<usize>>,
    /// Curve file path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub source: SourceArg,
    /// Residual tolerance on |H| at a root.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RsharpArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "auto")]
    pub source: SourceArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Which bound must be available; a vacuous requested bound is an error.
    #[arg(long, value_enum, default_value = "both")]
    pub mode: BoundArg,
    /// Value to report alongside the exact threshold.
    #[arg(long)]
    pub reference: Option<f64>,
    /// Bisection tolerance on r.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Cross-check every information set by exhaustive enumeration.
    #[arg(long)]
    pub brute: bool,
    /// Player limit for --brute.
    #[arg(long, default_value_t = pogg_core::oracle::brute::DEFAULT_CAP)]
    pub cap: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    #[arg(long, env = "POGG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Independent tremble probability on every action.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Also estimate deviation gains at the root and full-window sets.
    #[arg(long)]
    pub gains: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconcileArgs {
    #[command(flatten)]
    pub game: GameArgs,
    /// Grid points on [0, 1] (m = 1).
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Value to report alongside the exact threshold (m > 1).
    #[arg(long)]
    pub reference: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, default_value_t = 1.0)]
    pub r_min: f64,
    /// Defaults to the number of players.
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long, default_value_t = 21)]
    pub r_steps: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn game(args: &[&str]) -> CliResult<GameConfig> {
        let mut v = vec!["pogg", "rsharp"];
        v.extend_from_slice(args);
        let cli = Cli::try_parse_from(v).unwrap();
        match cli.command {
            Command::Rsharp(a) => a.game.resolve(false),
            _ => unreachable!(),
        }
    }

    #[test]
    fn game_flags() {
        let c = game(&["--b", "3", "--n", "2"]).unwrap();
        assert_eq!((c.sizes(), c.m(), c.r()), (&[2, 2, 2][..], 1, 1.0));
        let c = game(&["--sizes", "1,2,3", "--m", "2", "--r", "4"]).unwrap();
        assert_eq!((c.sizes(), c.m(), c.r()), (&[1, 2, 3][..], 2, 4.0));
        assert!(matches!(game(&["--b", "3"]), Err(CliError::Validation(_))));
        assert!(matches!(game(&["--b", "3", "--n", "2", "--m", "3"]), Err(CliError::Validation(_))));
        assert!(Cli::try_parse_from(["pogg", "rsharp", "--sizes", "1,2", "--b", "2"]).is_err());
    }
}
