//! Exhaustive enumeration of individual action patterns.
//!
//! Every player's choice is expanded separately and each player classifies
//! the literal sample it receives (sum of the explicit contribution counts
//! in its window), so this path shares no state compression with the chain.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Conditioning, WindowState};
use crate::error::{GameError, Result};
use crate::game::{classify_sample, Action, GameConfig, InfoSet, Sample, StrategyProfile};
use crate::num::Dual;

/// Largest game enumerated by default.
pub const DEFAULT_CAP: usize = 12;

fn sample_of(cfg: &GameConfig, position: usize, counts: &[usize]) -> Sample {
    let len = cfg.window_len(position);
    let seen = counts[position - 1 - len..position - 1].iter().sum();
    Sample::new(len, seen)
}

/// Same quantity as [`super::chain_expectations`], by enumeration.
pub fn brute_force_from_state(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    start_position: usize,
    start_state: &WindowState,
    conditioning: Conditioning,
    cap: usize,
) -> Result<Vec<f64>> {
    start_state.validate(cfg, start_position)?;
    let players: usize = (start_position..=cfg.b()).map(|i| cfg.size(i)).sum::<usize>() - 1;
    if players > cap {
        return Err(GameError::EnumerationCap { players, cap });
    }
    // history before the window is irrelevant to anyone from start_position on
    let mut counts = vec![0; cfg.b()];
    let len = start_state.outputs.len();
    counts[start_position - 1 - len..start_position - 1].copy_from_slice(&start_state.outputs);
    let own = match conditioning {
        Conditioning::PlayerContributes => 1,
        Conditioning::PlayerDefects => 0,
    };
    let mut acc = vec![0.0; cfg.b() - start_position + 1];
    walk_from(cfg, profile, start_position, start_position, &mut counts, own, 1.0, &mut acc)?;
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn walk_from(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    start: usize,
    position: usize,
    counts: &mut Vec<usize>,
    own: usize,
    prob: f64,
    acc: &mut [f64],
) -> Result<()> {
    if position > cfg.b() {
        for i in start..=cfg.b() {
            let others = counts[i - 1] - if i == start { own } else { 0 };
            acc[i - start] += prob * others as f64;
        }
        return Ok(());
    }
    let class = classify_sample(cfg, position, sample_of(cfg, position, counts))?;
    let p = profile.prob(class);
    let free = cfg.size(position) - usize::from(position == start);
    // one bit per free player
    for pattern in 0u32..(1u32 << free) {
        let mut pr = prob;
        let mut k = 0;
        for bit in 0..free {
            if pattern >> bit & 1 == 1 {
                pr *= p;
                k += 1;
            } else {
                pr *= 1.0 - p;
            }
        }
        if pr == 0.0 {
            continue;
        }
        let extra = if position == start { own } else { 0 };
        counts[position - 1] = k + extra;
        walk_from(cfg, profile, start, position + 1, counts, own, pr, acc)?;
    }
    counts[position - 1] = 0;
    Ok(())
}

/// Limit quantities at one information set, obtained by enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteInfoSet {
    pub info: InfoSet,
    /// Order in ε at which the set is first reached (0 on path, 1 after a slip).
    pub order: u8,
    /// `(position, posterior)` pairs.
    pub beliefs: Vec<(usize, f64)>,
    /// `(position, φ_t)` pairs.
    pub phi: Vec<(usize, f64)>,
    pub expected_phi: f64,
    /// Expected utility of contributing and of defecting at this set.
    pub utility_contribute: f64,
    pub utility_defect: f64,
    /// `utility_contribute - utility_defect`.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceReport {
    pub info_sets: Vec<BruteInfoSet>,
    /// Expected total contribution with everyone following the profile.
    pub on_path_mean_total: f64,
    /// Probability that all `N` players contribute on path.
    pub on_path_full_prob: f64,
}

impl BruteForceReport {
    pub fn get(&self, info: InfoSet) -> Option<&BruteInfoSet> {
        self.info_sets.iter().find(|s| s.info == info)
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    mass: Dual,
    weighted: Dual,
}

/// Enumerate every assignment of the deviating player to a position and
/// every realized action pattern, with each prescribed action subject to a
/// first-order tremble, and derive per-information-set beliefs, φ and
/// utilities from the leading order.
pub fn brute_force_enumerate(cfg: &GameConfig, profile: &StrategyProfile, cap: usize) -> Result<BruteForceReport> {
    if cfg.players() > cap {
        return Err(GameError::EnumerationCap {
            players: cfg.players(),
            cap,
        });
    }
    // tallies[(info, position, action)]
    let mut tallies: BTreeMap<(InfoSet, usize, bool), Tally> = BTreeMap::new();
    for t in 1..=cfg.b() {
        for action in [Action::C, Action::D] {
            let mut counts = vec![0; cfg.b()];
            let mut ctx = Deviant {
                cfg,
                profile,
                position: t,
                action,
                seen: None,
                tallies: &mut tallies,
            };
            ctx.walk(1, &mut counts, Dual::ONE)?;
        }
    }

    let mut info_sets = Vec::new();
    for info in cfg.info_sets() {
        let positions: Vec<usize> = cfg.positions_with_window(info.sampled).collect();
        let tally = |t: usize, c: bool| tallies.get(&(info, t, c)).copied().unwrap_or_default();
        let total_re: f64 = positions.iter().map(|&t| cfg.size(t) as f64 * tally(t, true).mass.re).sum();
        let (order, pick): (u8, fn(Dual) -> f64) = if total_re > 0.0 { (0, |d| d.re) } else { (1, |d| d.eps) };
        let weight = |t: usize| cfg.size(t) as f64 * pick(tally(t, true).mass).max(0.0);
        let total: f64 = positions.iter().map(|&t| weight(t)).sum();
        if !(total > 0.0) {
            continue;
        }
        let mpcr = cfg.mpcr();
        let mut beliefs = Vec::new();
        let mut phi = Vec::new();
        let (mut expected_phi, mut uc, mut ud) = (0.0, 0.0, 0.0);
        for &t in &positions {
            let w = weight(t) / total;
            if w <= 0.0 {
                continue;
            }
            let ec = pick(tally(t, true).weighted) / pick(tally(t, true).mass);
            let ed = pick(tally(t, false).weighted) / pick(tally(t, false).mass);
            let f = ec - ed + 1.0;
            beliefs.push((t, w));
            phi.push((t, f));
            expected_phi += w * f;
            uc += w * (mpcr * (ec + 1.0) - 1.0);
            ud += w * mpcr * ed;
        }
        info_sets.push(BruteInfoSet {
            info,
            order,
            beliefs,
            phi,
            expected_phi,
            utility_contribute: uc,
            utility_defect: ud,
            gain: uc - ud,
        });
    }

    let mut mean = 0.0;
    let mut full = 0.0;
    let mut counts = vec![0; cfg.b()];
    on_path(cfg, profile, 1, &mut counts, 1.0, &mut mean, &mut full)?;
    Ok(BruteForceReport {
        info_sets,
        on_path_mean_total: mean,
        on_path_full_prob: full,
    })
}

struct Deviant<'a> {
    cfg: &'a GameConfig,
    profile: &'a StrategyProfile,
    position: usize,
    action: Action,
    seen: Option<InfoSet>,
    tallies: &'a mut BTreeMap<(InfoSet, usize, bool), Tally>,
}

impl Deviant<'_> {
    fn walk(&mut self, position: usize, counts: &mut Vec<usize>, prob: Dual) -> Result<()> {
        let cfg = self.cfg;
        if position > cfg.b() {
            let info = self.seen.expect("deviator always moves");
            let own = usize::from(self.action == Action::C);
            let others = counts.iter().sum::<usize>() - own;
            let e = self
                .tallies
                .entry((info, self.position, self.action == Action::C))
                .or_default();
            e.mass = e.mass + prob;
            e.weighted = e.weighted + prob.scale(others as f64);
            return Ok(());
        }
        let sample = sample_of(cfg, position, counts);
        let class = classify_sample(cfg, position, sample)?;
        let p = Dual::trembled(self.profile.prob(class));
        let q = Dual::ONE - p;
        let here = position == self.position;
        if here {
            self.seen = Some(InfoSet::new(sample.groups_sampled, class));
        }
        let free = cfg.size(position) - usize::from(here);
        let own = usize::from(here && self.action == Action::C);
        for pattern in 0u32..(1u32 << free) {
            let mut pr = prob;
            let mut k = 0;
            for bit in 0..free {
                if pattern >> bit & 1 == 1 {
                    pr = pr * p;
                    k += 1;
                } else {
                    pr = pr * q;
                }
            }
            if pr == Dual::ZERO {
                continue;
            }
            counts[position - 1] = k + own;
            self.walk(position + 1, counts, pr)?;
        }
        counts[position - 1] = 0;
        Ok(())
    }
}

fn on_path(
    cfg: &GameConfig,
    profile: &StrategyProfile,
    position: usize,
    counts: &mut Vec<usize>,
    prob: f64,
    mean: &mut f64,
    full: &mut f64,
) -> Result<()> {
    if position > cfg.b() {
        let total: usize = counts.iter().sum();
        *mean += prob * total as f64;
        if total == cfg.players() {
            *full += prob;
        }
        return Ok(());
    }
    let class = classify_sample(cfg, position, sample_of(cfg, position, counts))?;
    let p = profile.prob(class);
    let n = cfg.size(position);
    for pattern in 0u32..(1u32 << n) {
        let k = pattern.count_ones() as usize;
        let pr = prob * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
        if pr == 0.0 {
            continue;
        }
        counts[position - 1] = k;
        on_path(cfg, profile, position + 1, counts, pr, mean, full)?;
    }
    counts[position - 1] = 0;
    Ok(())
}
