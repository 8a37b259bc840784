use std::time::Instant;

use pogg_cli::commands::{Report, SweepResult};
use pogg_cli::curve::{read_curve, CurveRow};
use pogg_core::closedform::{self, BoundMode};
use pogg_core::montecarlo::{estimate_deviation_gain, simulate, ForcedStart};
use pogg_core::num::unit_grid;
use pogg_core::oracle::brute::{brute_force_enumerate, brute_force_from_state};
use pogg_core::oracle::{self, chain_expectations, info_set_gain, verify_equilibrium, Conditioning, Verdict, WindowState};
use pogg_core::reconcile::ThresholdComparison;
use pogg_core::solver::{self, HSource};
use pogg_core::{Action, GameConfig, InfoSet, SampleClass, StrategyProfile};
use pogg_validation::{run_all, small_games, Outcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;

/// Twenty symmetric games with b in [2, 8], n in [1, 4], r in (0, N).
fn random_games() -> Vec<GameConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..20)
        .map(|_| {
            let b = rng.gen_range(2..=8);
            let n = rng.gen_range(1..=4);
            let players = (b * n) as f64;
            let r = loop {
                let x = rng.gen::<f64>() * players;
                if x > 0.0 {
                    break x;
                }
            };
            GameConfig::symmetric(b, n, 1, r).unwrap()
        })
        .collect()
}

fn label(cfg: &GameConfig) -> String {
    format!("b={} n={} r={:.3}", cfg.b(), cfg.sizes()[0], cfg.r())
}

fn summarize(failures: &[String], total: usize, what: &str) -> Outcome {
    let shown: Vec<&str> = failures.iter().take(4).map(|s| s.as_str()).collect();
    let more = if failures.len() > 4 {
        format!(" (+{} more)", failures.len() - 4)
    } else {
        String::new()
    };
    if failures.is_empty() {
        Outcome::new(true, format!("{total} {what} checked"))
    } else {
        Outcome::new(
            false,
            format!("{} of {total} {what} fail: {}{more}", failures.len(), shown.join("; ")),
        )
    }
}

fn c1_endpoints() -> Outcome {
    let games = random_games();
    let mut failures = Vec::new();
    for cfg in &games {
        let target = cfg.mpcr() - 1.0;
        for gamma in [0.0, 1.0] {
            let closed = closedform::h(cfg, gamma).unwrap();
            let exact = oracle::oracle_h(cfg, gamma).unwrap();
            let err = (closed - target).abs().max((exact - target).abs());
            if err > 1e-12 {
                failures.push(format!("{} gamma={gamma}: |H - (r/N - 1)| = {err:.3e}", label(cfg)));
            }
        }
    }
    summarize(&failures, games.len(), "configurations")
}

fn c2_bell_shape() -> Outcome {
    let start = Instant::now();
    let games: Vec<_> = random_games().into_iter().filter(|c| c.sizes()[0] >= 2).collect();
    let grid = unit_grid(solver::DEFAULT_GRID);
    let mut failures = Vec::new();
    for cfg in &games {
        let floor = cfg.mpcr() - 1.0;
        for source in [HSource::ClosedForm, HSource::Oracle] {
            let h: Vec<f64> = grid.iter().map(|&g| source.h(cfg, g).unwrap()).collect();
            let last = h.len() - 1;
            if let Some(i) = (1..last).find(|&i| h[i] <= floor) {
                failures.push(format!(
                    "{} {source:?}: H({:.4}) - (r/N - 1) = {:.3e}",
                    label(cfg),
                    grid[i],
                    h[i] - floor
                ));
                continue;
            }
            let imax = (0..=last).max_by(|&a, &b| h[a].partial_cmp(&h[b]).unwrap()).unwrap();
            if imax == 0 || imax == last {
                failures.push(format!("{} {source:?}: maximum at an endpoint", label(cfg)));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 5.0 {
        failures.push(format!("runtime {secs:.2}s exceeds 5s"));
    }
    summarize(&failures, games.len(), "configurations with n >= 2")
}

fn c3_oracle_consistency() -> Outcome {
    let start = Instant::now();
    let games = small_games(10, 0.6);
    let mut failures = Vec::new();
    let mut compared = 0usize;
    for cfg in &games {
        for gamma in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = StrategyProfile::forgiving(gamma).unwrap();
            let brute = brute_force_enumerate(cfg, &p, 12).unwrap();
            for info in cfg.info_sets() {
                let (Ok(exact), Some(b)) = (info_set_gain(cfg, &p, info), brute.get(info)) else {
                    continue;
                };
                compared += 1;
                if (exact.gain - b.gain).abs() > 1e-10 {
                    failures.push(format!("{:?} m={} gamma={gamma} {info}", cfg.sizes(), cfg.m()));
                }
            }
            for t in 1..=cfg.b() {
                let mut windows = vec![WindowState::clean(cfg, t)];
                if t > 1 {
                    windows.push(WindowState::dirty(cfg, t));
                }
                for w in &windows {
                    for cond in [Conditioning::PlayerContributes, Conditioning::PlayerDefects] {
                        let a = chain_expectations(cfg, &p, t, w, cond).unwrap();
                        let b = brute_force_from_state(cfg, &p, t, w, cond, 12).unwrap();
                        compared += 1;
                        if a.iter().zip(&b).any(|(x, y)| (x - y).abs() > 1e-10) {
                            failures.push(format!("{:?} m={} gamma={gamma} t={t} {w:?}", cfg.sizes(), cfg.m()));
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        failures.push(format!("runtime {secs:.1}s exceeds 60s"));
    }
    let mut out = summarize(&failures, compared, "comparisons");
    out.detail = format!("{} games; {}", games.len(), out.detail);
    out
}

fn c4_grim_equilibrium() -> Outcome {
    let mut failures = Vec::new();
    let mut total = 0;
    for n in [2, 3] {
        for b in [3, 4, 5] {
            let players = (b * n) as f64;
            for r in [2.0, 3.0, players - 0.1] {
                total += 1;
                let cfg = GameConfig::symmetric(b, n, 1, r).unwrap();
                let rep = verify_equilibrium(&cfg, &StrategyProfile::grim(), 1e-8).unwrap();
                if rep.verdict != Verdict::Equilibrium {
                    let bad: Vec<String> = rep
                        .info_sets
                        .iter()
                        .filter(|c| !c.ok)
                        .map(|c| format!("{} gain {:+.4}", c.info, c.gain))
                        .collect();
                    failures.push(format!("b={b} n={n} r={r}: {}", bad.join(", ")));
                }
            }
        }
    }
    summarize(&failures, total, "cases")
}

fn c5_mixed_roots() -> Outcome {
    let cfg = GameConfig::symmetric(4, 2, 1, 1.0).unwrap();
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for source in [HSource::ClosedForm, HSource::Oracle] {
        let pair = solver::find_r_sharp(&cfg, source).unwrap();
        notes.push(format!("{source:?} r#={:.6} gamma#={:.6}", pair.r_sharp, pair.gamma_sharp));
        if !(pair.r_sharp < 8.0) {
            failures.push(format!("{source:?}: r# = {} not below N", pair.r_sharp));
        }
        let above = cfg.with_r(pair.r_sharp + 0.5).unwrap();
        let roots = solver::find_mixed_roots(&above, source, 1e-12).unwrap();
        if roots.len() != 2 {
            failures.push(format!("{source:?}: {} roots at r# + 0.5", roots.len()));
        }
        for &g in &roots.roots {
            let rep = verify_equilibrium(&above, &StrategyProfile::forgiving(g).unwrap(), 1e-6).unwrap();
            if rep.gain_dirty.abs() > 1e-6 {
                failures.push(format!("{source:?}: root {g} has gain {:.3e}", rep.gain_dirty));
            }
        }
        let below = cfg.with_r(pair.r_sharp - 0.5).unwrap();
        let roots = solver::find_mixed_roots(&below, source, 1e-12).unwrap();
        if !roots.is_empty() {
            failures.push(format!("{source:?}: {} roots at r# - 0.5", roots.len()));
        }
    }
    let mut out = summarize(&failures, 2, "sources");
    out.detail = format!("{}; {}", notes.join(", "), out.detail);
    out
}

fn c6_single_player_groups() -> Outcome {
    let grid = unit_grid(257);
    let mut failures = Vec::new();
    let mut total = 0;
    for b in 2..=8 {
        let cfg = GameConfig::symmetric(b, 1, 1, 1.0).unwrap();
        for t in 2..=b {
            let k = (b - t + 1) as i32;
            for &g in &grid {
                total += 1;
                let expected = if g == 0.0 {
                    k as f64
                } else {
                    (1.0 - (1.0 - g).powi(k)) / g
                };
                let closed = closedform::phi_dirty(&cfg, t, g).unwrap();
                let exact = oracle::oracle_phi(&cfg, t, g, SampleClass::Dirty).unwrap();
                let err = (closed - expected).abs().max((exact - expected).abs());
                if err > 1e-12 {
                    failures.push(format!("b={b} t={t} gamma={g}: {err:.3e}"));
                }
            }
        }
    }
    summarize(&failures, total, "grid points")
}

fn c7_threshold_example() -> Outcome {
    let cfg = GameConfig::new(vec![1, 2, 2], 2, 1.0).unwrap();
    let max = closedform::pure_threshold_m_gt_1(&cfg, BoundMode::Max).unwrap();
    let avg = closedform::pure_threshold_m_gt_1(&cfg, BoundMode::Average).unwrap();
    let out = pogg_cli::run_from_args([
        "pogg",
        "reconcile",
        "--sizes",
        "1,2,2",
        "--m",
        "2",
        "--reference",
        &(5.0f64 / 9.0).to_string(),
    ])
    .unwrap();
    let report: Report<pogg_cli::commands::ReconcileResult> = serde_json::from_str(&out.json).unwrap();
    let cmp: ThresholdComparison = report.result.threshold.unwrap();
    let exact = cmp.exact.unwrap();
    let passed = max == 5.0 && avg == 3.0 && exact <= 5.0 && cmp.bound_max == Some(5.0) && cmp.bound_average == Some(3.0);
    Outcome::new(
        passed,
        format!(
            "max-size bound {max}, average bound {avg}, exact {exact:.8}; reference 5/9 differs from exact by {:.6}",
            cmp.reference_minus_exact.unwrap()
        ),
    )
}

fn grid_roots(rows: &[CurveRow]) -> Vec<f64> {
    rows.windows(2)
        .filter(|w| (w[0].h_oracle < 0.0) != (w[1].h_oracle < 0.0))
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            a.gamma + (b.gamma - a.gamma) * a.h_oracle / (a.h_oracle - b.h_oracle)
        })
        .collect()
}

fn peak_second_difference(rows: &[CurveRow]) -> (f64, f64) {
    let imax = (0..rows.len())
        .max_by(|&a, &b| rows[a].h_oracle.partial_cmp(&rows[b].h_oracle).unwrap())
        .unwrap();
    let i = imax.clamp(1, rows.len() - 2);
    let step = rows[1].gamma - rows[0].gamma;
    let d2 = (rows[i + 1].h_oracle - 2.0 * rows[i].h_oracle + rows[i - 1].h_oracle) / (step * step);
    (rows[imax].gamma, d2)
}

fn c8_group_size_overlay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("overlay.csv");
    let res = pogg_cli::run_from_args([
        "pogg",
        "sweep-h",
        "--b",
        "12",
        "--n",
        "2",
        "--r",
        "18",
        "--overlay-n",
        "1,2,4",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    let summary: Report<SweepResult> = serde_json::from_str(&res.json).unwrap();
    let mut stats = Vec::new();
    for c in &summary.result.curves {
        let file = read_curve(std::path::Path::new(&c.path)).unwrap();
        assert_eq!(file.rows.len(), solver::DEFAULT_GRID);
        let (peak, d2) = peak_second_difference(&file.rows);
        stats.push((c.config.sizes()[0], peak, d2, grid_roots(&file.rows)));
    }
    // stats are in overlay order: n = 1, 2, 4
    let flatter = stats.windows(2).all(|w| w[0].2 > w[1].2);
    let pairs = stats[1].3.len() == 2 && stats[2].3.len() == 2;
    let upper_left = stats.windows(2).all(|w| match (w[0].3.last(), w[1].3.last()) {
        (Some(a), Some(b)) => a < b,
        _ => false,
    });
    let lower_left = pairs && stats[1].3[0] < stats[2].3[0];
    let detail: Vec<String> = stats
        .iter()
        .map(|(n, peak, d2, roots)| format!("n={n}: peak at {peak:.3}, second difference {d2:.2}, roots {roots:.4?}"))
        .collect();
    Outcome::new(
        flatter && pairs && upper_left && lower_left,
        format!(
            "N=24 r=18; {}; flatter as n decreases: {flatter}; root pairs for n>1: {pairs}; roots move left: {}",
            detail.join("; "),
            upper_left && lower_left
        ),
    )
}

fn c9_asymmetric_bounds() -> Outcome {
    let grid = unit_grid(513);
    let mut failures = Vec::new();
    let mut total = 0;
    for sizes in [vec![1, 2, 3], vec![2, 3, 4]] {
        let cfg = GameConfig::new(sizes.clone(), 1, 1.0).unwrap();
        for t in 2..=cfg.b() {
            for &g in &grid {
                total += 1;
                let (lo, hi) = closedform::phi_bounds_asym(&cfg, t, g).unwrap();
                let exact = oracle::oracle_phi(&cfg, t, g, SampleClass::Dirty).unwrap();
                if lo > exact + 1e-9 || exact > hi + 1e-9 {
                    failures.push(format!("{sizes:?} t={t} gamma={g}: {lo} <= {exact} <= {hi} violated"));
                }
                if (g == 0.0 || g == 1.0) && ((lo - 1.0).abs() > 1e-9 || (hi - 1.0).abs() > 1e-9) {
                    failures.push(format!("{sizes:?} t={t} gamma={g}: bounds ({lo}, {hi}) not 1"));
                }
            }
        }
    }
    summarize(&failures, total, "grid points")
}

fn c10_monte_carlo() -> Outcome {
    let cfg = GameConfig::symmetric(3, 2, 1, 4.0).unwrap();
    let p = StrategyProfile::forgiving(0.5).unwrap();
    let runs = 100_000;
    let mut failures = Vec::new();
    let mut checked = 0;
    let window = WindowState::dirty(&cfg, 2);
    for (action, cond) in [(Action::C, Conditioning::PlayerContributes), (Action::D, Conditioning::PlayerDefects)] {
        let start = ForcedStart {
            position: 2,
            window: window.clone(),
            deviator: Some(action),
        };
        let sim = simulate(&cfg, &p, runs, SEED, 0.0, Some(&start)).unwrap();
        let again = simulate(&cfg, &p, runs, SEED, 0.0, Some(&start)).unwrap();
        if sim != again {
            failures.push(format!("{action:?}: repeated simulation differs"));
        }
        let exact = chain_expectations(&cfg, &p, 2, &window, cond).unwrap();
        for (i, &x) in exact.iter().enumerate() {
            checked += 1;
            let (m, se) = (sim.per_position_means[i], sim.per_position_std_errors[i]);
            if (m - x).abs() > 3.0 * se + 1e-12 {
                failures.push(format!("{action:?} position {}: {m:.5} +- {se:.5} vs {x:.5}", i + 2));
            }
        }
    }
    for info in [
        InfoSet::ROOT,
        InfoSet::full_window(&cfg, SampleClass::Clean),
        InfoSet::full_window(&cfg, SampleClass::Dirty),
    ] {
        checked += 1;
        let exact = info_set_gain(&cfg, &p, info).unwrap().gain;
        let est = estimate_deviation_gain(&cfg, &p, info, runs, SEED).unwrap();
        let again = estimate_deviation_gain(&cfg, &p, info, runs, SEED).unwrap();
        if est != again {
            failures.push(format!("{info}: repeated estimate differs"));
        }
        if (est.gain - exact).abs() > 3.0 * est.std_error + 1e-12 {
            failures.push(format!("{info}: {:.5} +- {:.5} vs {exact:.5}", est.gain, est.std_error));
        }
    }
    summarize(&failures, checked, "estimates")
}

fn c11_conjecture_exploration() -> Outcome {
    let cfg = GameConfig::symmetric(3, 2, 2, 1.0).unwrap();
    let r_grid: Vec<f64> = (1..=12).map(|k| k as f64 * 0.5).collect();
    let table = solver::conjecture_explore(&cfg, &r_grid, 1e-12).unwrap();
    let mut failures = Vec::new();
    if table.rows.len() != r_grid.len() {
        failures.push(format!("{} rows for {} returns", table.rows.len(), r_grid.len()));
    }
    let mut roots = 0;
    let flat = table.rows.iter().filter(|r| r.roots.flat).count();
    for row in &table.rows {
        let target = row.r / 6.0 - 1.0;
        if (row.gain_at_zero - target).abs() > 1e-12 || (row.gain_at_one - target).abs() > 1e-12 {
            failures.push(format!("r={}: endpoint gains {} / {}", row.r, row.gain_at_zero, row.gain_at_one));
        }
        for c in &row.checks {
            roots += 1;
            if !c.indifferent {
                failures.push(format!("r={} root {} not indifferent", row.r, c.gamma));
            }
        }
    }
    let mut out = summarize(&failures, table.rows.len(), "returns");
    out.detail = format!("{}; {roots} isolated roots, {flat} returns with H = 0 everywhere", out.detail);
    out
}

fn main() {
    let checks: &[(u32, &str, pogg_validation::Check)] = &[
        (1, "endpoint identities", c1_endpoints),
        (2, "interior excess and interior peak", c2_bell_shape),
        (3, "chain versus enumeration", c3_oracle_consistency),
        (4, "grim profile with m = 1", c4_grim_equilibrium),
        (5, "two mixed roots above the critical return", c5_mixed_roots),
        (6, "single-player groups", c6_single_player_groups),
        (7, "threshold bounds for sizes (1,2,2), m = 2", c7_threshold_example),
        (8, "group-size overlay", c8_group_size_overlay),
        (9, "asymmetric bounds", c9_asymmetric_bounds),
        (10, "Monte Carlo against the oracle", c10_monte_carlo),
        (11, "window of two groups", c11_conjecture_exploration),
    ];
    let failed = run_all(checks);
    if failed > 0 {
        std::process::exit(1);
    }
}
