//! Root finding and threshold searches.
//!
//! `H` is linear in `r` with an `r`-free shape `S(γ)`, so the critical return
//! is `N / max S` and every `r` above it gives at least two roots. None of
//! the searches assume `S` is unimodal: the grid is scanned globally and
//! each local extremum is refined.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{self, CurvePoint};
use crate::error::{GameError, Result};
use crate::game::{GameConfig, StrategyProfile};
use crate::num::unit_grid;
use crate::oracle::{self, DeviationReport, Verdict};

pub const DEFAULT_GRID: usize = 2048;
/// Roots closer than this are reported once.
pub const MERGE_DISTANCE: f64 = 1e-6;
/// Default tolerance on utility differences in deviation checks.
pub const VERIFY_TOL: f64 = 1e-8;
/// Tolerance on |H| when a mixed root is checked for indifference.
pub const INDIFFERENCE_TOL: f64 = 1e-6;
const GAMMA_TOL: f64 = 1e-10;

/// Which evaluator supplies `H` and `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HSource {
    ClosedForm,
    Oracle,
}

impl HSource {
    pub fn h(self, cfg: &GameConfig, gamma: f64) -> Result<f64> {
        match self {
            HSource::ClosedForm => closedform::h(cfg, gamma),
            HSource::Oracle => oracle::oracle_h(cfg, gamma),
        }
    }

    pub fn s(self, cfg: &GameConfig, gamma: f64) -> Result<f64> {
        match self {
            HSource::ClosedForm => closedform::s_value(cfg, gamma),
            HSource::Oracle => oracle::oracle_s(cfg, gamma),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootSet {
    pub roots: Vec<f64>,
    pub residuals: Vec<f64>,
    pub source: HSource,
    /// `|H| <= tol` on the whole grid: every γ is indifferent and no
    /// isolated roots are reported.
    #[serde(default)]
    pub flat: bool,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub r_sharp: f64,
    pub gamma_sharp: f64,
    pub s_max: f64,
    /// Every local maximum of `S` found on the scan, refined.
    pub local_maxima: Vec<CurvePoint>,
    pub source: HSource,
}

/// Bisection on a bracketing interval until `|f| <= tol` or the interval
/// can no longer shrink.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid.abs() <= tol && hi - lo < 1e-12 {
            return Ok(mid);
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
pub fn golden_max<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}

/// Roots of `h` on `(0, 1)` from a grid scan: sign changes are bisected,
/// and every interior local extremum that stays on one side of zero on the
/// grid is refined in case the curve touches or crosses zero between
/// grid points.
pub fn roots_on_grid<F>(h: F, grid: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let vals = grid.iter().map(|&g| h(g)).collect::<Result<Vec<_>>>()?;
    roots_from_values(&h, grid, &vals, tol)
}

fn roots_from_values<F>(h: &F, grid: &[f64], vals: &[f64], tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut roots = Vec::new();
    let last = grid.len() - 1;
    for i in 0..last {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            if i > 0 {
                roots.push(grid[i]);
            }
            continue;
        }
        if b != 0.0 && (a < 0.0) != (b < 0.0) {
            roots.push(bisect(&h, grid[i], grid[i + 1], tol)?);
        }
    }
    for i in 1..last {
        let (l, c, r) = (vals[i - 1], vals[i], vals[i + 1]);
        let sign = if c < 0.0 && c >= l && c >= r {
            1.0
        } else if c > 0.0 && c <= l && c <= r {
            -1.0
        } else {
            continue;
        };
        // extremum on the side of zero where it might reach zero
        let (x, fx) = golden_max(|g| Ok(sign * h(g)?), grid[i - 1], grid[i + 1], GAMMA_TOL)?;
        let fx = sign * fx;
        if fx.abs() <= tol {
            roots.push(x);
        } else if (fx < 0.0) != (c < 0.0) {
            roots.push(bisect(&h, grid[i - 1], x, tol)?);
            roots.push(bisect(&h, x, grid[i + 1], tol)?);
        }
    }
    roots.retain(|&g| g > 0.0 && g < 1.0);
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut merged: Vec<f64> = Vec::with_capacity(roots.len());
    for g in roots {
        match merged.last_mut() {
            Some(prev) if g - *prev < MERGE_DISTANCE => {
                if h(g)?.abs() < h(*prev)?.abs() {
                    *prev = g;
                }
            }
            _ => merged.push(g),
        }
    }
    Ok(merged)
}

/// All forgiveness levels `γ ∈ (0, 1)` at which a dirty-sample player is
/// indifferent, i.e. the mixed equilibria of the forgiving profile.
pub fn find_mixed_roots(cfg: &GameConfig, source: HSource, tol: f64) -> Result<RootSet> {
    find_mixed_roots_on(cfg, source, tol, DEFAULT_GRID)
}

pub fn find_mixed_roots_on(cfg: &GameConfig, source: HSource, tol: f64, grid_points: usize) -> Result<RootSet> {
    let grid = unit_grid(grid_points);
    let h = |g| source.h(cfg, g);
    let vals = grid.iter().map(|&g| h(g)).collect::<Result<Vec<_>>>()?;
    if vals.iter().all(|v| v.abs() <= tol) {
        return Ok(RootSet {
            roots: Vec::new(),
            residuals: Vec::new(),
            source,
            flat: true,
        });
    }
    let roots = roots_from_values(&h, &grid, &vals, tol)?;
    let residuals = roots
        .iter()
        .map(|&g| Ok(source.h(cfg, g)?.abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RootSet {
        roots,
        residuals,
        source,
        flat: false,
    })
}

/// The smallest return admitting a mixed equilibrium and its forgiveness level.
pub fn find_r_sharp(cfg: &GameConfig, source: HSource) -> Result<CriticalPair> {
    if cfg.min_size() < 2 {
        return Err(GameError::Precondition {
            op: "find_r_sharp",
            requirement: "every group to have at least two players",
        });
    }
    let grid = unit_grid(DEFAULT_GRID);
    let s = |g: f64| source.s(cfg, g);
    let vals = grid.iter().map(|&g| s(g)).collect::<Result<Vec<_>>>()?;
    let mut maxima = Vec::new();
    for i in 1..grid.len() - 1 {
        if vals[i] >= vals[i - 1] && vals[i] >= vals[i + 1] && vals[i] > vals[i - 1].min(vals[i + 1]) {
            let (gamma, value) = golden_max(s, grid[i - 1], grid[i + 1], GAMMA_TOL)?;
            maxima.push(CurvePoint { gamma, value });
        }
    }
    let best = maxima
        .iter()
        .copied()
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .unwrap_or(CurvePoint { gamma: 0.0, value: vals[0] });
    if !(best.value > 1.0) {
        return Err(GameError::NoCriticalPair { max_s: best.value });
    }
    Ok(CriticalPair {
        r_sharp: cfg.players() as f64 / best.value,
        gamma_sharp: best.gamma,
        s_max: best.value,
        local_maxima: maxima,
        source,
    })
}

/// Deviation checks of the grim profile at each return on the grid (`m = 1`).
pub fn pure_region_m1(cfg: &GameConfig, r_grid: &[f64]) -> Result<Vec<(f64, DeviationReport)>> {
    if cfg.m() != 1 {
        return Err(GameError::Precondition {
            op: "pure_region_m1",
            requirement: "a one-group sample window (m = 1)",
        });
    }
    r_grid
        .par_iter()
        .map(|&r| {
            let c = cfg.with_r(r)?;
            Ok((r, oracle::verify_equilibrium(&c, &StrategyProfile::grim(), VERIFY_TOL)?))
        })
        .collect()
}

/// Smallest return at which the grim profile passes every deviation check
/// (`m > 1`), located by bisection on `r` to within `tol`.
pub fn pure_threshold_exact_m_gt_1(cfg: &GameConfig, tol: f64) -> Result<f64> {
    if cfg.m() < 2 {
        return Err(GameError::Precondition {
            op: "pure_threshold_exact_m_gt_1",
            requirement: "a window of at least two groups (m > 1)",
        });
    }
    let holds = |r: f64| -> Result<bool> {
        let c = cfg.with_r(r)?;
        Ok(oracle::verify_equilibrium(&c, &StrategyProfile::grim(), VERIFY_TOL)?
            .verdict
            .holds())
    };
    let players = cfg.players() as f64;
    if !holds(players)? {
        return Err(GameError::NoPureRegion);
    }
    if holds(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, players);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Indifference check of one reported root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootCheck {
    pub gamma: f64,
    pub gain_dirty: f64,
    pub indifferent: bool,
    /// Verdict over every information set, shorter windows included.
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub r: f64,
    pub roots: RootSet,
    pub gain_at_zero: f64,
    pub gain_at_one: f64,
    pub checks: Vec<RootCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureTable {
    pub rows: Vec<ConjectureRow>,
    /// Smallest `r` on the grid with at least one root.
    pub critical_r: Option<f64>,
}

/// Scan forgiveness levels for indifference on dirty full-window samples
/// when the window spans several groups.
pub fn conjecture_explore(cfg: &GameConfig, r_grid: &[f64], tol: f64) -> Result<ConjectureTable> {
    if cfg.m() < 2 {
        return Err(GameError::Precondition {
            op: "conjecture_explore",
            requirement: "a window of at least two groups (m > 1)",
        });
    }
    let rows = r_grid
        .par_iter()
        .map(|&r| {
            let c = cfg.with_r(r)?;
            let roots = find_mixed_roots(&c, HSource::Oracle, tol)?;
            let checks = roots
                .roots
                .iter()
                .map(|&gamma| {
                    let rep = oracle::verify_equilibrium(&c, &StrategyProfile::forgiving(gamma)?, INDIFFERENCE_TOL)?;
                    Ok(RootCheck {
                        gamma,
                        gain_dirty: rep.gain_dirty,
                        indifferent: rep.gain_dirty.abs() <= INDIFFERENCE_TOL,
                        verdict: rep.verdict,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ConjectureRow {
                r,
                gain_at_zero: oracle::oracle_h(&c, 0.0)?,
                gain_at_one: oracle::oracle_h(&c, 1.0)?,
                roots,
                checks,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let critical_r = rows.iter().find(|row| !row.roots.is_empty()).map(|row| row.r);
    Ok(ConjectureTable { rows, critical_r })
}
