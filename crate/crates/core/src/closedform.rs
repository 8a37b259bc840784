//! Closed-form equilibrium quantities for the one-group window (`m = 1`).
//!
//! `phi_*` is the number of additional contributions a player expects from
//! contributing rather than defecting (own unit included), `psi` the
//! posterior over positions after a dirty sample, and `h` the resulting
//! utility difference whose roots are the forgiving equilibria. Endpoint
//! values are returned from explicit limit branches.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::game::{GameConfig, SampleClass};
use crate::num::geometric_tail;

/// One `(γ, value)` pair of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub gamma: f64,
    pub value: f64,
}

/// Which group size stands in for `n` in the pure-strategy bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundMode {
    /// Largest group, valid for any size assignment.
    Max,
    /// Mean group size `N / b`.
    Average,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(GameError::OutOfRange {
            what: "gamma",
            value: gamma,
            range: "[0, 1]",
        });
    }
    Ok(())
}

fn require_m1(cfg: &GameConfig, op: &'static str) -> Result<()> {
    if cfg.m() != 1 {
        return Err(GameError::Precondition {
            op,
            requirement: "a one-group sample window (m = 1)",
        });
    }
    Ok(())
}

fn symmetric_n(cfg: &GameConfig, op: &'static str) -> Result<usize> {
    cfg.group_size()
        .ok_or(GameError::AsymmetricNotSupported { op })
}

fn check_dirty_position(cfg: &GameConfig, t: usize) -> Result<()> {
    cfg.check_position(t)?;
    if t < 2 {
        return Err(GameError::InvalidPosition { position: t, b: cfg.b() });
    }
    Ok(())
}

/// φ_t after a dirty sample, symmetric groups.
pub fn phi_dirty(cfg: &GameConfig, t: usize, gamma: f64) -> Result<f64> {
    require_m1(cfg, "phi_dirty")?;
    let n = symmetric_n(cfg, "phi_dirty")?;
    check_dirty_position(cfg, t)?;
    check_gamma(gamma)?;
    let b = cfg.b();
    if gamma == 1.0 {
        return Ok(1.0);
    }
    if n == 1 {
        if gamma == 0.0 {
            return Ok((b - t + 1) as f64);
        }
        return Ok(geometric_tail(gamma, b - t + 1));
    }
    if gamma == 0.0 {
        return Ok(1.0);
    }
    let nf = n as f64;
    // n (1-γ) (1 - (1-γ^n)^{b-t}) / γ  ==  n (1-γ) γ^{n-1} tail(γ^n, b-t)
    Ok(nf * (1.0 - gamma) * gamma.powi(n as i32 - 1) * geometric_tail(gamma.powi(n as i32), b - t) + 1.0)
}

/// φ_t after a clean sample (or the root sample at `t = 1`), symmetric groups.
pub fn phi_clean(cfg: &GameConfig, t: usize, gamma: f64) -> Result<f64> {
    require_m1(cfg, "phi_clean")?;
    let n = symmetric_n(cfg, "phi_clean")?;
    cfg.check_position(t)?;
    check_gamma(gamma)?;
    let b = cfg.b();
    if gamma == 1.0 {
        return Ok(1.0);
    }
    if gamma == 0.0 {
        return Ok(((b - t) * n + 1) as f64);
    }
    let nf = n as f64;
    Ok(nf * (1.0 - gamma) * geometric_tail(gamma.powi(n as i32), b - t) + 1.0)
}

/// ψ_t, the posterior weight on position `t` after a dirty sample
/// (symmetric groups). Normalized over `2..=b`, so the weights always sum to 1.
pub fn psi(cfg: &GameConfig, t: usize, gamma: f64) -> Result<f64> {
    check_dirty_position(cfg, t)?;
    Ok(psi_vector(cfg, gamma)?[t - 2])
}

/// All of ψ_2..ψ_b at once.
pub fn psi_vector(cfg: &GameConfig, gamma: f64) -> Result<Vec<f64>> {
    require_m1(cfg, "psi")?;
    let n = symmetric_n(cfg, "psi")?;
    check_gamma(gamma)?;
    let b = cfg.b();
    if gamma == 0.0 {
        let denom = (b * (b - 1)) as f64;
        return Ok((2..=b).map(|t| 2.0 * (t - 1) as f64 / denom).collect());
    }
    if gamma == 1.0 {
        return Ok(vec![1.0 / (b - 1) as f64; b - 1]);
    }
    let x = 1.0 - gamma.powi(n as i32);
    // w_t = sum_{j=1}^{t-1} x^j
    let mut weights = Vec::with_capacity(b - 1);
    let mut acc = 0.0;
    let mut pow = 1.0;
    for _t in 2..=b {
        pow *= x;
        acc += pow;
        weights.push(acc);
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// The simplified ψ ratio exactly as it is usually printed:
/// `(1 - x^{t-1}) / (b - 1 - γ^{-n} x (1 - x^{b-1}))` with `x = 1 - γ^n`.
/// Kept for the reconciliation report; [`psi`] is the one used everywhere else.
pub fn psi_verbatim(cfg: &GameConfig, t: usize, gamma: f64) -> Result<f64> {
    require_m1(cfg, "psi_verbatim")?;
    let n = symmetric_n(cfg, "psi_verbatim")?;
    check_dirty_position(cfg, t)?;
    check_gamma(gamma)?;
    let b = cfg.b();
    if gamma == 0.0 {
        return Ok(2.0 * (t - 1) as f64 / (b * (b - 1)) as f64);
    }
    let gn = gamma.powi(n as i32);
    let x = 1.0 - gn;
    let num = 1.0 - x.powi(t as i32 - 1);
    let den = (b - 1) as f64 - x * (1.0 - x.powi(b as i32 - 1)) / gn;
    Ok(num / den)
}

/// Per-step contribution difference Δ_i at position `i > t` between
/// contributing and defecting at position `t`, for any group sizes (`m = 1`).
///
/// Written in the telescoped form
/// `n_i (1-γ) γ^{n_t-1} (1 - sum_{l=t+1}^{i-1} γ^{n_l} prod_{w=t+1}^{l-1} (1-γ^{n_w}))`
/// for a dirty sample; the clean variant drops the `γ^{n_t-1}` factor.
/// At `i = t` the groupmates act identically under both choices, so Δ_t = 0.
pub fn delta_asym(cfg: &GameConfig, i: usize, t: usize, gamma: f64, class: SampleClass) -> Result<f64> {
    require_m1(cfg, "delta_asym")?;
    cfg.check_position(i)?;
    cfg.check_position(t)?;
    check_gamma(gamma)?;
    if i < t {
        return Err(GameError::InvalidPosition { position: i, b: cfg.b() });
    }
    if i == t {
        return Ok(0.0);
    }
    let lead = match class {
        SampleClass::Dirty => {
            if t < 2 {
                return Err(GameError::InvalidPosition { position: t, b: cfg.b() });
            }
            gamma.powi(cfg.size(t) as i32 - 1)
        }
        SampleClass::Clean | SampleClass::Root => 1.0,
    };
    let mut survive = 1.0;
    let mut absorbed = 0.0;
    for l in (t + 1)..i {
        let g = gamma.powi(cfg.size(l) as i32);
        absorbed += g * survive;
        survive *= 1.0 - g;
    }
    Ok(cfg.size(i) as f64 * (1.0 - gamma) * lead * (1.0 - absorbed))
}

/// φ_t for any group sizes as `1 + sum_{i>t} Δ_i`.
pub fn phi_asym(cfg: &GameConfig, t: usize, gamma: f64, class: SampleClass) -> Result<f64> {
    require_m1(cfg, "phi_asym")?;
    cfg.check_position(t)?;
    let mut total = 1.0;
    for i in (t + 1)..=cfg.b() {
        total += delta_asym(cfg, i, t, gamma, class)?;
    }
    Ok(total)
}

/// Posterior over positions `2..=b` after a dirty sample for any group sizes:
/// prior `∝ n_t` times the first-order chance that a single slip somewhere
/// in `1..t` is still visible to position `t`.
pub fn psi_asym_vector(cfg: &GameConfig, gamma: f64) -> Result<Vec<f64>> {
    require_m1(cfg, "psi_asym")?;
    check_gamma(gamma)?;
    let b = cfg.b();
    let mut weights = Vec::with_capacity(b - 1);
    // reach = sum_{j<t} n_j prod_{k=j+1}^{t-1} (1 - γ^{n_k})
    let mut reach = 0.0;
    for t in 2..=b {
        if t > 2 {
            reach *= 1.0 - gamma.powi(cfg.size(t - 1) as i32);
        }
        reach += cfg.size(t - 1) as f64;
        weights.push(cfg.size(t) as f64 * reach);
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// Two-sided bracket on the dirty-sample φ_t for unequal groups, using the
/// largest (`M`) and smallest (`λ`) group size for the downstream factors:
///
/// * upper: `1 + M (1-γ) γ^{n_t-1} (1 - (1-γ^M)^{b-t}) / γ^M`
/// * lower: `1 + λ (1-γ) γ^{n_t-1} (1 - (1-γ^λ)^{b-t}) / γ^λ`
///
/// With `M = λ` both collapse to [`phi_dirty`].
pub fn phi_bounds_asym(cfg: &GameConfig, t: usize, gamma: f64) -> Result<(f64, f64)> {
    require_m1(cfg, "phi_bounds_asym")?;
    check_dirty_position(cfg, t)?;
    check_gamma(gamma)?;
    let big = cfg.max_size();
    let small = cfg.min_size();
    let steps = cfg.b() - t;
    let own = cfg.size(t);
    if gamma == 1.0 {
        return Ok((1.0, 1.0));
    }
    if gamma == 0.0 {
        // only a lone player can restore a clean window when nobody forgives
        if own == 1 {
            return Ok((1.0 + (small * steps) as f64, 1.0 + (big * steps) as f64));
        }
        return Ok((1.0, 1.0));
    }
    let lead = (1.0 - gamma) * gamma.powi(own as i32 - 1);
    let upper = 1.0 + big as f64 * lead * geometric_tail(gamma.powi(big as i32), steps);
    let lower = 1.0 + small as f64 * lead * geometric_tail(gamma.powi(small as i32), steps);
    Ok((lower, upper))
}

/// `S(γ) = sum_t ψ_t φ_t` on a dirty sample. Symmetric configurations use
/// the closed forms directly; unequal groups go through [`phi_asym`] and
/// [`psi_asym_vector`].
pub fn s_value(cfg: &GameConfig, gamma: f64) -> Result<f64> {
    require_m1(cfg, "s_value")?;
    check_gamma(gamma)?;
    let b = cfg.b();
    if cfg.is_symmetric() {
        let psi = psi_vector(cfg, gamma)?;
        let mut s = 0.0;
        for (k, t) in (2..=b).enumerate() {
            s += psi[k] * phi_dirty(cfg, t, gamma)?;
        }
        Ok(s)
    } else {
        let psi = psi_asym_vector(cfg, gamma)?;
        let mut s = 0.0;
        for (k, t) in (2..=b).enumerate() {
            s += psi[k] * phi_asym(cfg, t, gamma, SampleClass::Dirty)?;
        }
        Ok(s)
    }
}

/// `H(γ) = (r/N) S(γ) - 1`, the gain from contributing on a dirty sample.
pub fn h(cfg: &GameConfig, gamma: f64) -> Result<f64> {
    Ok(cfg.mpcr() * s_value(cfg, gamma)? - 1.0)
}

/// `H` on the grid.
pub fn h_curve(cfg: &GameConfig, grid: &[f64]) -> Result<Vec<CurvePoint>> {
    grid.iter()
        .map(|&gamma| Ok(CurvePoint { gamma, value: h(cfg, gamma)? }))
        .collect()
}

/// Return above which contributing until a defection is seen is claimed to
/// be an equilibrium when the sample window spans more than one group:
/// `2N / (2N - (b + m - 1) n)`.
pub fn pure_threshold_m_gt_1(cfg: &GameConfig, mode: BoundMode) -> Result<f64> {
    if cfg.m() < 2 {
        return Err(GameError::Precondition {
            op: "pure_threshold_m_gt_1",
            requirement: "a window of at least two groups (m > 1)",
        });
    }
    let players = cfg.players() as f64;
    let b = cfg.b() as f64;
    let span = (cfg.b() + cfg.m() - 1) as f64;
    // both modes are kept as ratios of integers where possible so that
    // textbook instances come out exact
    let (num, den) = match mode {
        BoundMode::Max => {
            let den = 2.0 * players - span * cfg.max_size() as f64;
            (2.0 * players, den)
        }
        BoundMode::Average => {
            // n = N/b  =>  2N / (2N - span N / b) = 2b / (2b - span)
            (2.0 * b, 2.0 * b - span)
        }
    };
    if den <= 0.0 {
        return Err(GameError::VacuousBound { denominator: den });
    }
    Ok(num / den)
}
