use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pogg_core::closedform::{self, BoundMode, CurvePoint};
use pogg_core::montecarlo::{self, GainEstimate, SimStats};
use pogg_core::num::unit_grid;
use pogg_core::oracle::{self, brute, DeviationReport};
use pogg_core::reconcile::{self, ReconcileReport, ThresholdComparison};
use pogg_core::solver::{self, ConjectureTable, CriticalPair, HSource, RootCheck, RootSet};
use pogg_core::{GameConfig, InfoSet, SampleClass, StrategyProfile};
use serde::{Deserialize, Serialize};

use crate::args::*;
use crate::curve::{write_curve, CurveRow};
use crate::error::{CliError, CliResult};
use crate::manifest::RunManifest;

/// What a command hands back to `main`.
#[derive(Debug)]
pub struct Output {
    pub manifest: RunManifest,
    pub text: String,
    pub json: String,
}

/// Machine-readable report: the manifest plus the command's result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub manifest: RunManifest,
    pub result: T,
}

fn finish<T: Serialize>(mut manifest: RunManifest, result: T, text: String, out: Option<&Path>) -> CliResult<Output> {
    if let Some(p) = out {
        manifest.outputs.push(p.display().to_string());
    }
    let report = Report { manifest, result };
    let json = serde_json::to_string_pretty(&report)?;
    if let Some(p) = out {
        std::fs::write(p, format!("{json}\n")).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(Output {
        manifest: report.manifest,
        text,
        json,
    })
}

fn source_for(cfg: &GameConfig, arg: SourceArg) -> HSource {
    match arg {
        SourceArg::Closed => HSource::ClosedForm,
        SourceArg::Oracle => HSource::Oracle,
        SourceArg::Auto if cfg.m() == 1 => HSource::ClosedForm,
        SourceArg::Auto => HSource::Oracle,
    }
}

fn sizes_label(cfg: &GameConfig) -> String {
    match cfg.group_size() {
        Some(n) => format!("b={} n={} m={} r={}", cfg.b(), n, cfg.m(), cfg.r()),
        None => {
            let s: Vec<String> = cfg.sizes().iter().map(|x| x.to_string()).collect();
            format!("sizes=({}) m={} r={}", s.join(","), cfg.m(), cfg.r())
        }
    }
}

fn fmt_list(xs: &[f64]) -> String {
    let s: Vec<String> = xs.iter().map(|x| format!("{x:.6}")).collect();
    format!("[{}]", s.join(", "))
}

// sweep-h

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub path: String,
    pub config: GameConfig,
    pub rows: usize,
    /// Grid maximum of the oracle curve.
    pub peak: CurvePoint,
    /// Second difference of the oracle curve at its grid maximum, divided
    /// by the squared grid step. Taken one step inside when the maximum
    /// sits on an endpoint.
    pub peak_second_difference: f64,
    pub roots_closedform: Option<Vec<f64>>,
    pub roots_oracle: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub curves: Vec<CurveSummary>,
}

fn suffixed(path: &Path, n: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_n{n}.{}", ext.to_string_lossy()),
        None => format!("{stem}_n{n}"),
    };
    path.with_file_name(name)
}

fn sweep_one(cfg: &GameConfig, grid_points: usize, path: &Path) -> CliResult<(Vec<CurveRow>, CurveSummary)> {
    let grid = unit_grid(grid_points);
    let closed_ok = cfg.m() == 1;
    let rows = grid
        .iter()
        .map(|&g| {
            Ok(CurveRow {
                gamma: g,
                h_closedform: if closed_ok { Some(closedform::h(cfg, g)?) } else { None },
                h_oracle: oracle::oracle_h(cfg, g)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let (imax, best) = rows
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, r)| if r.h_oracle > acc.1 { (i, r.h_oracle) } else { acc });
    let i = imax.clamp(1, rows.len() - 2);
    let step = 1.0 / (grid_points - 1) as f64;
    let d2 = (rows[i + 1].h_oracle - 2.0 * rows[i].h_oracle + rows[i - 1].h_oracle) / (step * step);
    let roots_closedform = if closed_ok {
        Some(solver::find_mixed_roots(cfg, HSource::ClosedForm, 1e-12)?.roots)
    } else {
        None
    };
    let roots_oracle = solver::find_mixed_roots(cfg, HSource::Oracle, 1e-12)?.roots;
    let summary = CurveSummary {
        path: path.display().to_string(),
        config: cfg.clone(),
        rows: rows.len(),
        peak: CurvePoint {
            gamma: rows[imax].gamma,
            value: best,
        },
        peak_second_difference: d2,
        roots_closedform,
        roots_oracle,
    };
    Ok((rows, summary))
}

pub fn sweep_h(a: &SweepArgs) -> CliResult<Output> {
    if a.grid < 3 {
        return Err(CliError::Validation("--grid must be at least 3".into()));
    }
    let base = a.game.resolve(true)?;
    let jobs: Vec<(GameConfig, PathBuf)> = match &a.overlay_n {
        None => vec![(base.clone(), a.out.clone())],
        Some(ns) => {
            let total = base.players();
            ns.iter()
                .map(|&n| {
                    if n == 0 || total % n != 0 || total / n < 2 {
                        return Err(CliError::Validation(format!(
                            "--overlay-n {n}: {total} players cannot form at least two groups of that size"
                        )));
                    }
                    Ok((GameConfig::symmetric(total / n, n, base.m(), base.r())?, suffixed(&a.out, n)))
                })
                .collect::<CliResult<_>>()?
        }
    };

    let computed: Vec<CliResult<(Vec<CurveRow>, CurveSummary)>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(cfg, path)| s.spawn(move || sweep_one(cfg, a.grid, path)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });

    let mut manifest = RunManifest::new("sweep-h", jobs.iter().map(|j| j.0.clone()).collect());
    let mut curves = Vec::new();
    for ((cfg, path), res) in jobs.iter().zip(computed) {
        let (rows, summary) = res?;
        let mut own = RunManifest::new("sweep-h", vec![cfg.clone()]);
        own.timestamp = manifest.timestamp;
        own.outputs.push(path.display().to_string());
        write_curve(path, &own, &rows)?;
        manifest.outputs.push(path.display().to_string());
        curves.push(summary);
    }

    let mut text = String::new();
    for c in &curves {
        let _ = writeln!(text, "{}: {} rows -> {}", sizes_label(&c.config), c.rows, c.path);
        let _ = writeln!(
            text,
            "  peak H = {:.6} at gamma = {:.6}, second difference {:.4}",
            c.peak.value, c.peak.gamma, c.peak_second_difference
        );
        if let Some(r) = &c.roots_closedform {
            let _ = writeln!(text, "  roots (closed form): {}", fmt_list(r));
        }
        let _ = writeln!(text, "  roots (oracle):      {}", fmt_list(&c.roots_oracle));
    }
    let result = SweepResult { curves };
    // the curve files are the artifacts; the summary is only printed
    let report = Report { manifest, result };
    let json = serde_json::to_string_pretty(&report)?;
    Ok(Output {
        manifest: report.manifest,
        text,
        json,
    })
}

// solve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub config: GameConfig,
    pub roots: RootSet,
    pub checks: Vec<RootCheck>,
}

pub fn solve(a: &SolveArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(true)?;
    let source = source_for(&cfg, a.source);
    let roots = solver::find_mixed_roots(&cfg, source, a.tol)?;
    let checks = roots
        .roots
        .iter()
        .map(|&gamma| {
            let rep = oracle::verify_equilibrium(&cfg, &StrategyProfile::forgiving(gamma)?, solver::INDIFFERENCE_TOL)?;
            Ok(RootCheck {
                gamma,
                gain_dirty: rep.gain_dirty,
                indifferent: rep.gain_dirty.abs() <= solver::INDIFFERENCE_TOL,
                verdict: rep.verdict,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut text = format!("{} ({:?} H)\n", sizes_label(&cfg), source);
    if roots.flat {
        text.push_str("  H vanishes on the whole grid: every gamma is indifferent\n");
    } else if roots.is_empty() {
        text.push_str("  no mixed equilibrium on (0, 1)\n");
    }
    for (c, res) in checks.iter().zip(&roots.residuals) {
        let _ = writeln!(
            text,
            "  gamma = {:.10}  |H| = {:.2e}  oracle gain = {:.2e}  indifferent: {}  verdict: {:?}",
            c.gamma, res, c.gain_dirty, c.indifferent, c.verdict
        );
    }
    let manifest = RunManifest::new("solve", vec![cfg.clone()]);
    finish(manifest, SolveResult { config: cfg, roots, checks }, text, a.out.as_deref())
}

// rsharp

pub fn rsharp(a: &RsharpArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(false)?;
    let pair: CriticalPair = solver::find_r_sharp(&cfg, source_for(&cfg, a.source))?;
    let mut text = format!(
        "{} ({:?} S)\n  r# = {:.10}  gamma# = {:.10}  max S = {:.10}\n",
        sizes_label(&cfg),
        pair.source,
        pair.r_sharp,
        pair.gamma_sharp,
        pair.s_max
    );
    if pair.local_maxima.len() > 1 {
        let _ = writeln!(text, "  {} local maxima of S", pair.local_maxima.len());
    }
    finish(RunManifest::new("rsharp", vec![cfg]), pair, text, a.out.as_deref())
}

// threshold

fn threshold_text(c: &ThresholdComparison) -> String {
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{x:.10}"));
    let mut text = format!("{}\n", sizes_label(&c.config));
    let _ = writeln!(text, "  bound (max group size):     {}", opt(c.bound_max));
    let _ = writeln!(text, "  bound (average group size): {}", opt(c.bound_average));
    let _ = writeln!(text, "  exact threshold:            {}", opt(c.exact));
    if let Some(r) = c.reference {
        let _ = writeln!(text, "  reference {:.10}, minus exact: {}", r, opt(c.reference_minus_exact));
    }
    for n in &c.notes {
        let _ = writeln!(text, "  note: {n}");
    }
    text
}

pub fn threshold(a: &ThresholdArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(false)?;
    let modes: &[BoundMode] = match a.mode {
        BoundArg::Max => &[BoundMode::Max],
        BoundArg::Average => &[BoundMode::Average],
        BoundArg::Both => &[BoundMode::Max, BoundMode::Average],
    };
    for &mode in modes {
        closedform::pure_threshold_m_gt_1(&cfg, mode)?;
    }
    let c = reconcile::threshold_comparison(&cfg, a.reference, a.tol)?;
    let text = threshold_text(&c);
    finish(RunManifest::new("threshold", vec![cfg]), c, text, a.out.as_deref())
}

// verify

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteCheck {
    pub info: InfoSet,
    pub oracle_gain: f64,
    pub brute_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub config: GameConfig,
    pub profile: StrategyProfile,
    pub report: DeviationReport,
    pub brute: Option<Vec<BruteCheck>>,
}

pub fn verify(a: &VerifyArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(true)?;
    let profile = a.profile.resolve()?;
    let report = oracle::verify_equilibrium(&cfg, &profile, a.tol)?;
    let brute = if a.brute {
        let b = brute::brute_force_enumerate(&cfg, &profile, a.cap)?;
        Some(
            report
                .info_sets
                .iter()
                .filter_map(|c| {
                    b.get(c.info).map(|x| BruteCheck {
                        info: c.info,
                        oracle_gain: c.gain,
                        brute_gain: x.gain,
                    })
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };
    let mut text = format!(
        "{}  profile root={} clean={} dirty={}\n  verdict: {:?} (tolerance {:e})\n",
        sizes_label(&cfg),
        profile.p_root,
        profile.p_clean,
        profile.p_dirty,
        report.verdict,
        report.tolerance
    );
    for c in &report.info_sets {
        let _ = writeln!(
            text,
            "  {:<10} p = {:<6} u(C)-u(D) = {:+.10}  {}",
            c.info.to_string(),
            c.prescribed,
            c.gain,
            if c.ok { "ok" } else { "PROFITABLE DEVIATION" }
        );
    }
    if let Some(bs) = &brute {
        let worst = bs.iter().map(|x| (x.oracle_gain - x.brute_gain).abs()).fold(0.0, f64::max);
        let _ = writeln!(text, "  enumeration cross-check: {} sets, max |diff| = {:.2e}", bs.len(), worst);
    }
    let result = VerifyResult {
        config: cfg.clone(),
        profile,
        report,
        brute,
    };
    finish(RunManifest::new("verify", vec![cfg]), result, text, a.out.as_deref())
}

// simulate

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainRow {
    pub info: InfoSet,
    pub estimate: GainEstimate,
    pub oracle_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateResult {
    pub config: GameConfig,
    pub profile: StrategyProfile,
    pub stats: SimStats,
    pub gains: Vec<GainRow>,
}

pub fn simulate(a: &SimulateArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(true)?;
    let profile = a.profile.resolve()?;
    let stats = montecarlo::simulate(&cfg, &profile, a.runs, a.seed, a.eps, None)?;
    let mut gains = Vec::new();
    if a.gains {
        let mut sets = vec![InfoSet::ROOT, InfoSet::full_window(&cfg, SampleClass::Clean)];
        sets.push(InfoSet::full_window(&cfg, SampleClass::Dirty));
        for info in sets {
            let exact = match oracle::info_set_gain(&cfg, &profile, info) {
                Ok(g) => g.gain,
                Err(pogg_core::GameError::UnreachableInfoSet(_)) => continue,
                Err(e) => return Err(e.into()),
            };
            let estimate = montecarlo::estimate_deviation_gain(&cfg, &profile, info, a.runs, a.seed)?;
            gains.push(GainRow {
                info,
                estimate,
                oracle_gain: exact,
            });
        }
    }
    let mut text = format!(
        "{}  runs={} seed={} eps={}\n  mean total contribution {:.6} (se {:.6}) of {}\n  per position: {}\n",
        sizes_label(&cfg),
        stats.runs,
        stats.seed,
        stats.tremble_eps,
        stats.mean_total_contribution,
        stats.std_error,
        cfg.players(),
        fmt_list(&stats.per_position_means)
    );
    for g in &gains {
        let _ = writeln!(
            text,
            "  {:<10} gain {:+.6} (se {:.6})  exact {:+.6}",
            g.info.to_string(),
            g.estimate.gain,
            g.estimate.std_error,
            g.oracle_gain
        );
    }
    let mut manifest = RunManifest::new("simulate", vec![cfg.clone()]);
    manifest.seeds.push(a.seed);
    manifest.rng = Some(montecarlo::RNG_NAME.to_string());
    let result = SimulateResult {
        config: cfg,
        profile,
        stats,
        gains,
    };
    finish(manifest, result, text, a.out.as_deref())
}

// reconcile

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileResult {
    pub grid: Option<ReconcileReport>,
    pub threshold: Option<ThresholdComparison>,
}

pub fn reconcile(a: &ReconcileArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(false)?;
    if a.grid < 2 {
        return Err(CliError::Validation("--grid must be at least 2".into()));
    }
    let (result, text) = if cfg.m() == 1 {
        let rep = reconcile::reconcile_grid(&cfg, &unit_grid(a.grid))?;
        let mut text = format!("{}  ({} grid points)\n", sizes_label(&cfg), rep.rows.len());
        let _ = writeln!(text, "  max |H closed - H oracle|        {:.3e}", rep.max_h_diff);
        let _ = writeln!(text, "  max |phi closed - phi oracle|    {:.3e}", rep.max_phi_diff);
        let _ = writeln!(text, "  max |psi - oracle beliefs|       {:.3e}", rep.max_psi_oracle_diff);
        if let Some(v) = rep.max_psi_verbatim_diff {
            let _ = writeln!(text, "  max |psi - simplified ratio|     {v:.3e}");
        }
        (
            ReconcileResult {
                grid: Some(rep),
                threshold: None,
            },
            text,
        )
    } else {
        let c = reconcile::threshold_comparison(&cfg, a.reference, 1e-10)?;
        let text = threshold_text(&c);
        (
            ReconcileResult {
                grid: None,
                threshold: Some(c),
            },
            text,
        )
    };
    finish(RunManifest::new("reconcile", vec![cfg]), result, text, a.out.as_deref())
}

// explore

pub fn explore(a: &ExploreArgs) -> CliResult<Output> {
    let cfg = a.game.resolve(false)?;
    let r_max = a.r_max.unwrap_or(cfg.players() as f64);
    if a.r_steps < 2 || !(a.r_min < r_max) {
        return Err(CliError::Validation("need --r-steps >= 2 and --r-min < --r-max".into()));
    }
    let step = (r_max - a.r_min) / (a.r_steps - 1) as f64;
    let r_grid: Vec<f64> = (0..a.r_steps).map(|i| a.r_min + step * i as f64).collect();
    let table: ConjectureTable = solver::conjecture_explore(&cfg, &r_grid, a.tol)?;
    let mut text = format!("{}\n", sizes_label(&cfg));
    for row in &table.rows {
        let _ = writeln!(
            text,
            "  r = {:<10.6} H(0) = {:+.6}  H(1) = {:+.6}  roots {}",
            row.r,
            row.gain_at_zero,
            row.gain_at_one,
            if row.roots.flat {
                "H = 0 everywhere".to_string()
            } else {
                fmt_list(&row.roots.roots)
            }
        );
        for c in &row.checks {
            let _ = writeln!(
                text,
                "      gamma {:.8}: indifferent {} verdict {:?}",
                c.gamma, c.indifferent, c.verdict
            );
        }
    }
    match table.critical_r {
        Some(r) => {
            let _ = writeln!(text, "  first r on the grid with a root: {r}");
        }
        None => text.push_str("  no roots on this grid\n"),
    }
    finish(RunManifest::new("explore", vec![cfg]), table, text, a.out.as_deref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_file_names() {
        assert_eq!(suffixed(Path::new("out/fig.csv"), 4), PathBuf::from("out/fig_n4.csv"));
        assert_eq!(suffixed(Path::new("fig"), 1), PathBuf::from("fig_n1"));
    }

    #[test]
    fn auto_source_follows_window() {
        let m1 = GameConfig::symmetric(4, 2, 1, 1.0).unwrap();
        let m2 = GameConfig::symmetric(4, 2, 2, 1.0).unwrap();
        assert_eq!(source_for(&m1, SourceArg::Auto), HSource::ClosedForm);
        assert_eq!(source_for(&m2, SourceArg::Auto), HSource::Oracle);
    }
}
