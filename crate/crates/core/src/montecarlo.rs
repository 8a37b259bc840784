//! Seeded simulation of complete plays.
//!
//! Every player's action is drawn individually and samples are classified
//! from the realized contribution counts, so nothing here goes through the
//! run-length chain of the oracle. Run `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `k`; runs are executed in
//! parallel and reduced in index order, so results are bit-identical for a
//! given seed regardless of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{Action, GameConfig, InfoSet, Sample, SampleClass, StrategyProfile, classify_sample};
use crate::oracle::{self, WindowState};

pub const RNG_NAME: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64(seed), stream = run index";

/// Attempts per run before an information set is declared unreachable.
const MAX_ATTEMPTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub runs: usize,
    pub mean_total_contribution: f64,
    /// Mean contributions per position, from the start position on.
    pub per_position_means: Vec<f64>,
    /// Standard errors matching `per_position_means`.
    pub per_position_std_errors: Vec<f64>,
    /// Standard error of `mean_total_contribution`.
    pub std_error: f64,
    pub seed: u64,
    pub tremble_eps: f64,
    pub rng: String,
}

/// Start a play at a later position with a given window. With `deviator`
/// set, one player at the start position is forced to that action and the
/// counts exclude that player's unit, matching
/// [`oracle::chain_expectations`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcedStart {
    pub position: usize,
    pub window: WindowState,
    pub deviator: Option<Action>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainEstimate {
    pub gain: f64,
    pub std_error: f64,
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

fn class_at(cfg: &GameConfig, position: usize, counts: &[usize]) -> SampleClass {
    let len = cfg.window_len(position);
    let seen = counts[position - 1 - len..position - 1].iter().sum();
    classify_sample(cfg, position, Sample::new(len, seen)).expect("counts stay within group sizes")
}

fn draw(rng: &mut ChaCha8Rng, p: f64, eps: f64) -> bool {
    let c = rng.gen::<f64>() < p;
    if eps > 0.0 && rng.gen::<f64>() < eps {
        !c
    } else {
        c
    }
}

/// Plays positions `from..=b` on top of `counts`, which must hold the
/// realized contributions of positions `1..from`. `skip` players of the
/// first group are left out.
fn play_forward(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    counts: &mut Vec<usize>,
    from: usize,
    skip: usize,
    extra_first: usize,
    eps: f64,
    rng: &mut ChaCha8Rng,
) {
    for t in from..=cfg.b() {
        let p = profile.prob(class_at(cfg, t, counts));
        let players = if t == from { cfg.size(t) - skip } else { cfg.size(t) };
        let mut c = if t == from { extra_first } else { 0 };
        for _ in 0..players {
            c += draw(rng, p, eps) as usize;
        }
        counts.push(c);
    }
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = xs.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Simulates `runs` plays. Without `forced_start` each play starts at the
/// first group with an empty window.
pub fn simulate(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    runs: usize,
    seed: u64,
    tremble_eps: f64,
    forced_start: Option<&ForcedStart>,
) -> Result<SimStats> {
    if runs == 0 {
        return Err(GameError::OutOfRange {
            what: "runs",
            value: 0.0,
            range: ">= 1",
        });
    }
    if !(0.0..=1.0).contains(&tremble_eps) {
        return Err(GameError::OutOfRange {
            what: "tremble_eps",
            value: tremble_eps,
            range: "[0, 1]",
        });
    }
    let (from, prefix, deviator) = match forced_start {
        None => (1, Vec::new(), None),
        Some(fs) => {
            fs.window.validate(cfg, fs.position)?;
            // positions older than the window are irrelevant; fill them in full
            let len = fs.window.outputs.len();
            let mut prefix: Vec<usize> = (1..fs.position - len).map(|k| cfg.size(k)).collect();
            prefix.extend_from_slice(&fs.window.outputs);
            (fs.position, prefix, fs.deviator)
        }
    };
    let per_run: Vec<Vec<usize>> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let mut rng = run_rng(seed, k);
            let mut counts = prefix.clone();
            match deviator {
                None => play_forward(cfg, profile, &mut counts, from, 0, 0, tremble_eps, &mut rng),
                Some(a) => {
                    play_forward(cfg, profile, &mut counts, from, 1, (a == Action::C) as usize, tremble_eps, &mut rng);
                    // report the others only
                    counts[from - 1] -= (a == Action::C) as usize;
                }
            }
            counts.split_off(from - 1)
        })
        .collect();

    let width = cfg.b() - from + 1;
    let mut per_position_means = Vec::with_capacity(width);
    let mut per_position_std_errors = Vec::with_capacity(width);
    for i in 0..width {
        let (m, se) = mean_and_se(per_run.iter().map(|c| c[i] as f64), runs);
        per_position_means.push(m);
        per_position_std_errors.push(se);
    }
    let (mean_total_contribution, std_error) =
        mean_and_se(per_run.iter().map(|c| c.iter().sum::<usize>() as f64), runs);
    Ok(SimStats {
        runs,
        mean_total_contribution,
        per_position_means,
        per_position_std_errors,
        std_error,
        seed,
        tremble_eps,
        rng: RNG_NAME.to_string(),
    })
}

/// Whether `info` is reached without trembles. Uses the exact reach
/// distribution only to pick the sampling scheme; the estimate itself is
/// pure simulation.
fn reached_on_path(cfg: &GameConfig, profile: &StrategyProfile, info: InfoSet) -> Result<bool> {
    let dist = oracle::trembled_run_distribution(cfg, profile);
    let mut zero = 0.0;
    let mut first = 0.0;
    for t in cfg.positions_with_window(info.sampled) {
        for (s, d) in dist[t - 1].iter().enumerate() {
            if oracle::class_of(cfg, t, s) == info.class {
                zero += d.re;
                first += d.eps.max(0.0);
            }
        }
    }
    if zero > 0.0 {
        Ok(true)
    } else if first > 0.0 {
        Ok(false)
    } else {
        Err(GameError::UnreachableInfoSet(info.to_string()))
    }
}

fn pick_weighted(rng: &mut ChaCha8Rng, items: &[(usize, f64)]) -> usize {
    let total: f64 = items.iter().map(|x| x.1).sum();
    let mut u = rng.gen::<f64>() * total;
    for &(v, w) in items {
        if u < w {
            return v;
        }
        u -= w;
    }
    items.last().unwrap().0
}

/// Draws a history that ends at a player of `info`: the position is drawn
/// with prior weight `n_t` and the history by rejection. For sets reached
/// only through a tremble, exactly one earlier player with a pure
/// prescription is made to tremble, which samples the first-order
/// consistent beliefs.
fn draw_history(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    info: InfoSet,
    on_path: bool,
    rng: &mut ChaCha8Rng,
) -> Option<(usize, Vec<usize>)> {
    let weights: Vec<(usize, f64)> = cfg
        .positions_with_window(info.sampled)
        .map(|t| {
            let before: usize = (1..t).map(|k| cfg.size(k)).sum();
            let w = if on_path { 1 } else { before.max(1) };
            (t, (cfg.size(t) * w) as f64)
        })
        .collect();
    for _ in 0..MAX_ATTEMPTS {
        let t = pick_weighted(rng, &weights);
        let before: usize = (1..t).map(|k| cfg.size(k)).sum();
        let trembler = if on_path { usize::MAX } else { rng.gen_range(0..before) };
        let mut counts = Vec::with_capacity(cfg.b());
        let mut idx = 0;
        let mut rejected = false;
        for i in 1..t {
            let p = profile.prob(class_at(cfg, i, &counts));
            let mut c = 0;
            for _ in 0..cfg.size(i) {
                let mut a = rng.gen::<f64>() < p;
                if idx == trembler {
                    if p > 0.0 && p < 1.0 {
                        rejected = true;
                    }
                    a = !a;
                }
                c += a as usize;
                idx += 1;
            }
            counts.push(c);
        }
        if !rejected && class_at(cfg, t, &counts) == info.class {
            return Some((t, counts));
        }
    }
    None
}

/// Paired estimate of `u(C) - u(D)` for a player at `info`. Each run draws
/// one history, then plays the rest of the game once with the player
/// contributing and once defecting from the same RNG state.
pub fn estimate_deviation_gain(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    info: InfoSet,
    runs: usize,
    seed: u64,
) -> Result<GainEstimate> {
    if runs == 0 {
        return Err(GameError::OutOfRange {
            what: "runs",
            value: 0.0,
            range: ">= 1",
        });
    }
    let on_path = reached_on_path(cfg, profile, info)?;
    let diffs: Vec<Option<f64>> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let mut rng = run_rng(seed, k);
            let (t, history) = draw_history(cfg, profile, info, on_path, &mut rng)?;
            let total = |a: Action, mut rng: ChaCha8Rng| {
                let mut counts = history.clone();
                play_forward(cfg, profile, &mut counts, t, 1, (a == Action::C) as usize, 0.0, &mut rng);
                counts[t - 1..].iter().sum::<usize>() as f64
            };
            let with_c = total(Action::C, rng.clone());
            let with_d = total(Action::D, rng);
            Some(with_c - with_d)
        })
        .collect();
    let diffs = diffs
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| GameError::UnreachableInfoSet(info.to_string()))?;
    let (phi, se) = mean_and_se(diffs.iter().copied(), runs);
    let mpcr = cfg.mpcr();
    Ok(GainEstimate {
        gain: mpcr * phi - 1.0,
        std_error: mpcr * se,
    })
}

/// Convenience wrapper: the root set for `Root`, the full-window set otherwise.
pub fn estimate_class_gain(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    class: SampleClass,
    runs: usize,
    seed: u64,
) -> Result<GainEstimate> {
    let info = match class {
        SampleClass::Root => InfoSet::ROOT,
        c => InfoSet::full_window(cfg, c),
    };
    estimate_deviation_gain(cfg, profile, info, runs, seed)
}
