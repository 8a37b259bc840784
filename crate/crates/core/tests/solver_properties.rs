use pogg_core::closedform;
use pogg_core::num::unit_grid;
use pogg_core::oracle::{verify_equilibrium, Verdict};
use pogg_core::solver::*;
use pogg_core::{GameConfig, StrategyProfile};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_root_is_an_indifferent_mixed_equilibrium(b in 3usize..7, n in 2usize..4, frac in 0.3f64..0.99) {
        let players = (b * n) as f64;
        let cfg = GameConfig::symmetric(b, n, 1, frac * players).unwrap();
        for source in [HSource::ClosedForm, HSource::Oracle] {
            let roots = find_mixed_roots(&cfg, source, 1e-12).unwrap();
            prop_assert!(roots.roots.windows(2).all(|w| w[1] - w[0] >= MERGE_DISTANCE));
            for &g in &roots.roots {
                let rep = verify_equilibrium(&cfg, &StrategyProfile::forgiving(g).unwrap(), INDIFFERENCE_TOL).unwrap();
                prop_assert_eq!(rep.verdict, Verdict::IndifferentMixed);
            }
        }
    }

    #[test]
    fn r_sharp_separates_root_counts(b in 3usize..7, n in 2usize..4) {
        let cfg = GameConfig::symmetric(b, n, 1, 1.0).unwrap();
        let pair = find_r_sharp(&cfg, HSource::ClosedForm).unwrap();
        prop_assert!(pair.r_sharp < (b * n) as f64);
        let below = find_mixed_roots(&cfg.with_r(pair.r_sharp * 0.98).unwrap(), HSource::ClosedForm, 1e-12).unwrap();
        prop_assert!(below.is_empty());
        let above = find_mixed_roots(&cfg.with_r(pair.r_sharp * 1.02).unwrap(), HSource::ClosedForm, 1e-12).unwrap();
        prop_assert!(above.len() >= 2);
    }
}

#[test]
fn sources_agree_on_r_sharp_for_asymmetric_groups() {
    for sizes in [vec![2, 3, 2], vec![3, 2, 4, 2], vec![2, 2, 5]] {
        let cfg = GameConfig::new(sizes, 1, 1.0).unwrap();
        let a = find_r_sharp(&cfg, HSource::ClosedForm).unwrap();
        let b = find_r_sharp(&cfg, HSource::Oracle).unwrap();
        assert!((a.r_sharp - b.r_sharp).abs() < 1e-8);
    }
}

#[test]
fn pure_region_matches_clean_condition() {
    // grim holds with m = 1 exactly when contributing after a clean sample pays
    let cfg = GameConfig::symmetric(4, 2, 1, 1.0).unwrap();
    let grid: Vec<f64> = (1..=16).map(|k| k as f64 * 0.5).collect();
    let rows = pure_region_m1(&cfg, &grid).unwrap();
    let cutoff = 2.0 * 4.0 * 2.0 / ((4.0 - 2.0) * 2.0 + 2.0);
    for (r, rep) in rows {
        assert_eq!(rep.verdict.holds(), r >= cutoff - 1e-9, "r = {r}");
    }
}

#[test]
fn exact_threshold_below_bounds_for_single_player_groups() {
    for (b, m) in [(4, 2), (5, 2), (5, 3), (6, 3)] {
        let cfg = GameConfig::symmetric(b, 1, m, 1.0).unwrap();
        let exact = pure_threshold_exact_m_gt_1(&cfg, 1e-10).unwrap();
        let bound = closedform::pure_threshold_m_gt_1(&cfg, closedform::BoundMode::Max).unwrap();
        assert!(exact <= bound + 1e-6, "b={b} m={m}: {exact} vs {bound}");
    }
}

#[test]
fn conjecture_table_endpoints() {
    let cfg = GameConfig::symmetric(5, 2, 2, 1.0).unwrap();
    let grid: Vec<f64> = (1..=10).map(|k| k as f64).collect();
    let table = conjecture_explore(&cfg, &grid, 1e-12).unwrap();
    for row in &table.rows {
        assert!((row.gain_at_zero - (row.r / 10.0 - 1.0)).abs() < 1e-12);
        assert!((row.gain_at_one - (row.r / 10.0 - 1.0)).abs() < 1e-12);
        assert!(row.checks.iter().all(|c| c.indifferent));
    }
}

#[test]
fn smaller_groups_flatten_peaks_at_fixed_group_count() {
    // same number of groups, same per-capita return
    for b in [4, 6, 8] {
        let mut last: Option<(f64, f64)> = None;
        for n in [4, 3, 2] {
            let cfg = GameConfig::symmetric(b, n, 1, 0.9 * (b * n) as f64).unwrap();
            let grid = unit_grid(DEFAULT_GRID);
            let h: Vec<f64> = grid.iter().map(|&g| closedform::h(&cfg, g).unwrap()).collect();
            let i = (0..h.len()).max_by(|&x, &y| h[x].partial_cmp(&h[y]).unwrap()).unwrap();
            let step = grid[1];
            let d2 = (h[i + 1] - 2.0 * h[i] + h[i - 1]) / (step * step);
            if let Some((prev_d2, prev_peak)) = last {
                assert!(d2 > prev_d2, "b={b} n={n}");
                assert!(grid[i] < prev_peak, "b={b} n={n}");
            }
            last = Some((d2, grid[i]));
        }
    }
}
