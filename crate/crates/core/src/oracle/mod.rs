//! Exact expectations and beliefs computed from the generative model.
//!
//! Nothing here uses the closed forms. Expected contributions come from
//! forward iteration of the sample-window distribution; off-path beliefs
//! come from the same iteration carried out on first-order tremble series
//! (see [`Dual`]). The [`brute`] submodule enumerates action patterns one
//! player at a time and serves as an independent check on both.
//!
//! A window is summarized by how many of the most recent groups contributed
//! in full, capped at `m`: a sample is clean exactly when that run covers
//! the whole window, and this is all the strategies can condition on.

pub mod brute;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{GameConfig, InfoSet, SampleClass, StrategyProfile};
use crate::num::Dual;

/// Contribution counts of the sampled predecessor groups, oldest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowState {
    pub outputs: Vec<usize>,
}

impl WindowState {
    pub fn new(outputs: Vec<usize>) -> Self {
        WindowState { outputs }
    }

    /// Empty window of the first group.
    pub fn root() -> Self {
        WindowState { outputs: Vec::new() }
    }

    /// Every sampled group contributed in full.
    pub fn clean(cfg: &GameConfig, position: usize) -> Self {
        let len = cfg.window_len(position);
        WindowState {
            outputs: (position - len..position).map(|k| cfg.size(k)).collect(),
        }
    }

    /// Full window except that the most recent group is one contribution short.
    pub fn dirty(cfg: &GameConfig, position: usize) -> Self {
        let mut w = Self::clean(cfg, position);
        if let Some(last) = w.outputs.last_mut() {
            *last -= 1;
        }
        w
    }

    pub fn validate(&self, cfg: &GameConfig, position: usize) -> Result<()> {
        cfg.check_position(position)?;
        let len = cfg.window_len(position);
        let seen: usize = self.outputs.iter().sum();
        let bad = |reason: String| GameError::InconsistentSample {
            position,
            sampled: self.outputs.len(),
            seen,
            reason,
        };
        if self.outputs.len() != len {
            return Err(bad(format!("window must hold {len} groups")));
        }
        for (k, &g) in (position - len..position).zip(&self.outputs) {
            if g > cfg.size(k) {
                return Err(bad(format!("group {k} has only {} players", cfg.size(k))));
            }
        }
        Ok(())
    }

    /// Number of trailing groups that contributed in full, capped at `m`.
    pub fn run_length(&self, cfg: &GameConfig, position: usize) -> usize {
        let len = self.outputs.len();
        let full = (position - len..position)
            .zip(&self.outputs)
            .rev()
            .take_while(|&(k, &g)| g == cfg.size(k))
            .count();
        full.min(cfg.m())
    }

    pub fn class(&self, cfg: &GameConfig, position: usize) -> SampleClass {
        class_of(cfg, position, self.run_length(cfg, position))
    }
}

/// Class of the sample at `position` when the trailing full run is `run`.
pub(crate) fn class_of(cfg: &GameConfig, position: usize, run: usize) -> SampleClass {
    if position == 1 {
        SampleClass::Root
    } else if run >= cfg.window_len(position) {
        SampleClass::Clean
    } else {
        SampleClass::Dirty
    }
}

fn next_run(cfg: &GameConfig, run: usize) -> usize {
    (run + 1).min(cfg.m())
}

/// The deviating player's own action at its information set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conditioning {
    PlayerContributes,
    PlayerDefects,
}

/// Expected contribution of every group from `start_position` to `b`,
/// excluding the deviating player's own unit, when one player at
/// `start_position` facing `start_state` takes the conditioned action and
/// everybody else follows `profile`.
pub fn chain_expectations(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    start_position: usize,
    start_state: &WindowState,
    conditioning: Conditioning,
) -> Result<Vec<f64>> {
    start_state.validate(cfg, start_position)?;
    let run = start_state.run_length(cfg, start_position);
    Ok(chain_from_run(cfg, profile, start_position, run, conditioning))
}

pub(crate) fn chain_from_run(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    t: usize,
    run: usize,
    conditioning: Conditioning,
) -> Vec<f64> {
    let m = cfg.m();
    let mut out = Vec::with_capacity(cfg.b() - t + 1);

    let p = profile.prob(class_of(cfg, t, run));
    let mates = cfg.size(t) - 1;
    out.push(mates as f64 * p);
    let full = match conditioning {
        Conditioning::PlayerContributes => p.powi(mates as i32),
        Conditioning::PlayerDefects => 0.0,
    };
    let mut dist = vec![0.0; m + 1];
    dist[next_run(cfg, run)] += full;
    dist[0] += 1.0 - full;

    for i in (t + 1)..=cfg.b() {
        let n = cfg.size(i);
        let mut next = vec![0.0; m + 1];
        let mut expected = 0.0;
        for (s, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let p = profile.prob(class_of(cfg, i, s));
            expected += mass * n as f64 * p;
            let full = p.powi(n as i32);
            next[next_run(cfg, s)] += mass * full;
            next[0] += mass * (1.0 - full);
        }
        out.push(expected);
        dist = next;
    }
    out
}

/// φ for a player at `position` whose window run is `run`: the expected
/// number of extra contributions (own unit included) from contributing.
pub(crate) fn phi_from_run(cfg: &GameConfig, profile: &StrategyProfile, position: usize, run: usize) -> f64 {
    let c = chain_from_run(cfg, profile, position, run, Conditioning::PlayerContributes);
    let d = chain_from_run(cfg, profile, position, run, Conditioning::PlayerDefects);
    c.iter().zip(&d).map(|(x, y)| x - y).sum::<f64>() + 1.0
}

/// Distribution of the window run at every position when every prescribed
/// action is subject to an independent tremble of size ε, to first order.
/// Index `[t - 1][s]`.
pub(crate) fn trembled_run_distribution(cfg: &GameConfig, profile: &StrategyProfile) -> Vec<Vec<Dual>> {
    let m = cfg.m();
    let mut all = Vec::with_capacity(cfg.b());
    let mut dist = vec![Dual::ZERO; m + 1];
    dist[0] = Dual::ONE;
    for i in 1..=cfg.b() {
        let n = cfg.size(i);
        let mut next = vec![Dual::ZERO; m + 1];
        for (s, &mass) in dist.iter().enumerate() {
            if mass == Dual::ZERO {
                continue;
            }
            let full = Dual::trembled(profile.prob(class_of(cfg, i, s))).powi(n);
            next[next_run(cfg, s)] = next[next_run(cfg, s)] + mass * full;
            next[0] = next[0] + mass * (Dual::ONE - full);
        }
        all.push(dist);
        dist = next;
    }
    all
}

/// Posterior mass on one (position, window run) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBelief {
    pub position: usize,
    pub run: usize,
    pub prob: f64,
}

/// Consistent beliefs at an information set: prior over positions `∝ n_t`
/// times the probability of reaching each window state, taken at the
/// lowest order in ε at which the set is reached.
pub fn info_set_beliefs(cfg: &GameConfig, profile: &StrategyProfile, info: InfoSet) -> Result<Vec<StateBelief>> {
    let dist = trembled_run_distribution(cfg, profile);
    beliefs_from_distribution(cfg, &dist, info)
}

fn beliefs_from_distribution(cfg: &GameConfig, dist: &[Vec<Dual>], info: InfoSet) -> Result<Vec<StateBelief>> {
    if info.sampled > cfg.m() || (info.sampled == 0) != (info.class == SampleClass::Root) {
        return Err(GameError::UnreachableInfoSet(info.to_string()));
    }
    let mut cells = Vec::new();
    for t in cfg.positions_with_window(info.sampled) {
        for (s, &mass) in dist[t - 1].iter().enumerate() {
            if class_of(cfg, t, s) == info.class {
                cells.push((t, s, mass.scale(cfg.size(t) as f64)));
            }
        }
    }
    let total_re: f64 = cells.iter().map(|c| c.2.re).sum();
    let pick: fn(&Dual) -> f64 = if total_re > 0.0 {
        |d| d.re
    } else {
        |d| d.eps.max(0.0)
    };
    let total: f64 = cells.iter().map(|c| pick(&c.2)).sum();
    if !(total > 0.0) {
        return Err(GameError::UnreachableInfoSet(info.to_string()));
    }
    Ok(cells
        .into_iter()
        .filter_map(|(position, run, w)| {
            let prob = pick(&w) / total;
            (prob > 0.0).then_some(StateBelief { position, run, prob })
        })
        .collect())
}

/// Posterior over positions `2..=b` (index `t - 2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefVector {
    pub probs: Vec<f64>,
}

impl BeliefVector {
    pub fn at(&self, position: usize) -> f64 {
        self.probs[position - 2]
    }
}

/// Beliefs over positions after a dirty full-window sample under the
/// forgiving profile with parameter `gamma`. With `m > 1` the positions up
/// to `m` see a shorter window and get zero mass here.
pub fn tremble_beliefs(cfg: &GameConfig, gamma: f64) -> Result<BeliefVector> {
    let profile = StrategyProfile::forgiving(gamma)?;
    let cells = info_set_beliefs(cfg, &profile, InfoSet::full_window(cfg, SampleClass::Dirty))?;
    let mut probs = vec![0.0; cfg.b() - 1];
    for c in cells {
        probs[c.position - 2] += c.prob;
    }
    Ok(BeliefVector { probs })
}

/// Contribution advantage at one information set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSetGain {
    pub info: InfoSet,
    pub beliefs: Vec<StateBelief>,
    /// Belief-weighted φ, own unit included.
    pub expected_phi: f64,
    /// `u(C) - u(D)` in expectation: `(r/N) expected_phi - 1`.
    pub gain: f64,
}

pub fn info_set_gain(cfg: &GameConfig, profile: &StrategyProfile, info: InfoSet) -> Result<InfoSetGain> {
    let dist = trembled_run_distribution(cfg, profile);
    gain_from_distribution(cfg, profile, &dist, info)
}

fn gain_from_distribution(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    dist: &[Vec<Dual>],
    info: InfoSet,
) -> Result<InfoSetGain> {
    let beliefs = beliefs_from_distribution(cfg, dist, info)?;
    let expected_phi = beliefs
        .iter()
        .map(|c| c.prob * phi_from_run(cfg, profile, c.position, c.run))
        .sum::<f64>();
    Ok(InfoSetGain {
        info,
        beliefs,
        expected_phi,
        gain: cfg.mpcr() * expected_phi - 1.0,
    })
}

/// φ at a known position under the forgiving profile, averaged over the
/// window states consistent with `class` at that position.
pub fn oracle_phi(cfg: &GameConfig, t: usize, gamma: f64, class: SampleClass) -> Result<f64> {
    cfg.check_position(t)?;
    let profile = StrategyProfile::forgiving(gamma)?;
    let info = InfoSet::new(cfg.window_len(t), class);
    let cells: Vec<_> = info_set_beliefs(cfg, &profile, info)?
        .into_iter()
        .filter(|c| c.position == t)
        .collect();
    let total: f64 = cells.iter().map(|c| c.prob).sum();
    if !(total > 0.0) {
        return Err(GameError::UnreachableInfoSet(format!("{info} at position {t}")));
    }
    Ok(cells
        .iter()
        .map(|c| c.prob / total * phi_from_run(cfg, &profile, t, c.run))
        .sum())
}

/// Belief-weighted φ on a dirty full-window sample, the oracle's `S(γ)`.
pub fn oracle_s(cfg: &GameConfig, gamma: f64) -> Result<f64> {
    let profile = StrategyProfile::forgiving(gamma)?;
    Ok(info_set_gain(cfg, &profile, InfoSet::full_window(cfg, SampleClass::Dirty))?.expected_phi)
}

/// Gain from contributing on a dirty full-window sample under the forgiving
/// profile, the oracle's `H(γ)`.
pub fn oracle_h(cfg: &GameConfig, gamma: f64) -> Result<f64> {
    Ok(cfg.mpcr() * oracle_s(cfg, gamma)? - 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Equilibrium,
    NotEquilibrium,
    IndifferentMixed,
}

impl Verdict {
    pub fn holds(self) -> bool {
        !matches!(self, Verdict::NotEquilibrium)
    }
}

/// Outcome of the one-shot deviation check at one information set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoSetCheck {
    pub info: InfoSet,
    pub prescribed: f64,
    /// `u(C) - u(D)` under the consistent beliefs.
    pub gain: f64,
    /// Best improvement a unilateral deviation achieves here.
    pub deviation_gain: f64,
    pub ok: bool,
}

/// Gains are contribution advantages `u(C) - u(D)`; `gain_clean` and
/// `gain_dirty` refer to the full-window information sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    pub gain_root: f64,
    pub gain_clean: f64,
    pub gain_dirty: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub info_sets: Vec<InfoSetCheck>,
}

/// One-shot deviation check of `profile` at every information set.
pub fn verify_equilibrium(cfg: &GameConfig, profile: &StrategyProfile, tol: f64) -> Result<DeviationReport> {
    let dist = trembled_run_distribution(cfg, profile);
    let mut checks = Vec::new();
    for info in cfg.info_sets() {
        let g = gain_from_distribution(cfg, profile, &dist, info)?;
        let prescribed = profile.prob(info.class);
        let deviation_gain = if prescribed == 1.0 {
            -g.gain
        } else if prescribed == 0.0 {
            g.gain
        } else {
            g.gain.abs()
        };
        checks.push(InfoSetCheck {
            info,
            prescribed,
            gain: g.gain,
            deviation_gain,
            ok: deviation_gain <= tol,
        });
    }
    let find = |info: InfoSet| checks.iter().find(|c| c.info == info).map(|c| c.gain).unwrap_or(f64::NAN);
    let gain_root = find(InfoSet::ROOT);
    let gain_clean = find(InfoSet::full_window(cfg, SampleClass::Clean));
    let gain_dirty = find(InfoSet::full_window(cfg, SampleClass::Dirty));
    let verdict = if !checks.iter().all(|c| c.ok) {
        Verdict::NotEquilibrium
    } else if checks.iter().any(|c| c.prescribed > 0.0 && c.prescribed < 1.0) {
        Verdict::IndifferentMixed
    } else {
        Verdict::Equilibrium
    };
    Ok(DeviationReport {
        gain_root,
        gain_clean,
        gain_dirty,
        verdict,
        tolerance: tol,
        info_sets: checks,
    })
}
