//! Small runner for the acceptance checks: every check runs, panics are
//! caught, and one line per check is printed whatever the outcome.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use pogg_core::GameConfig;

pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

pub type Check = fn() -> Outcome;

/// Runs every check in order and returns the number that failed.
pub fn run_all(checks: &[(u32, &str, Check)]) -> usize {
    let mut failed = 0;
    for &(id, name, check) in checks {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_else(|| "panic".to_string());
                Outcome::new(false, format!("panicked: {msg}"))
            });
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [{}] {name} ({:.2}s): {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    failed
}

/// Every ordered way to split `total` players into nonempty groups.
pub fn compositions(total: usize) -> Vec<Vec<usize>> {
    if total == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=total {
        for mut rest in compositions(total - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// All games with at most `max_players` players, at least two groups and
/// every admissible window length.
pub fn small_games(max_players: usize, r_frac: f64) -> Vec<GameConfig> {
    let mut v = Vec::new();
    for total in 2..=max_players {
        for sizes in compositions(total).into_iter().filter(|s| s.len() >= 2) {
            for m in 1..sizes.len() {
                v.push(GameConfig::new(sizes.clone(), m, r_frac * total as f64).expect("valid by construction"));
            }
        }
    }
    v
}
