//! Side-by-side comparison of the closed forms against the oracle, and of
//! the pure-strategy threshold bounds against the exact threshold.

use serde::{Deserialize, Serialize};

use crate::closedform::{self, BoundMode};
use crate::error::{GameError, Result};
use crate::game::{GameConfig, SampleClass};
use crate::oracle;
use crate::solver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileRow {
    pub gamma: f64,
    pub h_closed: f64,
    pub h_oracle: f64,
    /// Largest |closed φ - oracle φ| on dirty samples over positions `2..=b`.
    pub phi_dirty_diff: f64,
    /// Largest |normalized ψ - oracle belief|.
    pub psi_oracle_diff: f64,
    /// Largest |normalized ψ - unnormalized ratio form|; symmetric games only.
    pub psi_verbatim_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileReport {
    pub config: GameConfig,
    pub rows: Vec<ReconcileRow>,
    pub max_h_diff: f64,
    pub max_phi_diff: f64,
    pub max_psi_oracle_diff: f64,
    pub max_psi_verbatim_diff: Option<f64>,
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Compares both evaluators on every grid point (`m = 1`).
pub fn reconcile_grid(cfg: &GameConfig, grid: &[f64]) -> Result<ReconcileReport> {
    if cfg.m() != 1 {
        return Err(GameError::Precondition {
            op: "reconcile_grid",
            requirement: "a one-group sample window (m = 1)",
        });
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &gamma in grid {
        let mut phi_closed = Vec::with_capacity(cfg.b() - 1);
        let mut phi_exact = Vec::with_capacity(cfg.b() - 1);
        for t in 2..=cfg.b() {
            phi_closed.push(closedform::phi_asym(cfg, t, gamma, SampleClass::Dirty)?);
            phi_exact.push(oracle::oracle_phi(cfg, t, gamma, SampleClass::Dirty)?);
        }
        let psi = closedform::psi_asym_vector(cfg, gamma)?;
        let beliefs = oracle::tremble_beliefs(cfg, gamma)?;
        let psi_verbatim_diff = if cfg.is_symmetric() {
            let normalized = closedform::psi_vector(cfg, gamma)?;
            let verbatim = (2..=cfg.b())
                .map(|t| closedform::psi_verbatim(cfg, t, gamma))
                .collect::<Result<Vec<_>>>()?;
            Some(max_abs_diff(&normalized, &verbatim))
        } else {
            None
        };
        rows.push(ReconcileRow {
            gamma,
            h_closed: closedform::h(cfg, gamma)?,
            h_oracle: oracle::oracle_h(cfg, gamma)?,
            phi_dirty_diff: max_abs_diff(&phi_closed, &phi_exact),
            psi_oracle_diff: max_abs_diff(&psi, &beliefs.probs),
            psi_verbatim_diff,
        });
    }
    let fold = |f: fn(&ReconcileRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(ReconcileReport {
        config: cfg.clone(),
        max_h_diff: fold(|r| (r.h_closed - r.h_oracle).abs()),
        max_phi_diff: fold(|r| r.phi_dirty_diff),
        max_psi_oracle_diff: fold(|r| r.psi_oracle_diff),
        max_psi_verbatim_diff: rows
            .iter()
            .map(|r| r.psi_verbatim_diff)
            .collect::<Option<Vec<_>>>()
            .map(|v| v.into_iter().fold(0.0, f64::max)),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdComparison {
    pub config: GameConfig,
    pub bound_max: Option<f64>,
    pub bound_average: Option<f64>,
    /// Smallest `r` at which the grim profile passes every deviation check.
    pub exact: Option<f64>,
    /// A value to compare against, e.g. one quoted elsewhere.
    pub reference: Option<f64>,
    pub reference_minus_exact: Option<f64>,
    /// Human-readable notes on bounds that could not be computed.
    pub notes: Vec<String>,
}

/// Bounds and exact pure-strategy threshold for `m > 1`.
pub fn threshold_comparison(cfg: &GameConfig, reference: Option<f64>, tol: f64) -> Result<ThresholdComparison> {
    let mut notes = Vec::new();
    let mut bound = |mode| match closedform::pure_threshold_m_gt_1(cfg, mode) {
        Ok(v) => Ok(Some(v)),
        Err(e @ GameError::VacuousBound { .. }) => {
            notes.push(format!("{mode:?} bound: {e}"));
            Ok(None)
        }
        Err(e) => Err(e),
    };
    let bound_max = bound(BoundMode::Max)?;
    let bound_average = bound(BoundMode::Average)?;
    let exact = match solver::pure_threshold_exact_m_gt_1(cfg, tol) {
        Ok(v) => Some(v),
        Err(e @ GameError::NoPureRegion) => {
            notes.push(format!("exact threshold: {e}"));
            None
        }
        Err(e) => return Err(e),
    };
    Ok(ThresholdComparison {
        config: cfg.clone(),
        bound_max,
        bound_average,
        exact,
        reference,
        reference_minus_exact: reference.zip(exact).map(|(a, b)| a - b),
        notes,
    })
}
