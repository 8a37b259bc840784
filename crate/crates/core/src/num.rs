//! Small numeric helpers.

use std::ops::{Add, Mul, Sub};

/// `(1 - (1 - y)^k) / y`, i.e. `sum_{j<k} (1 - y)^j`, with the limit `k` at `y = 0`.
///
/// Evaluated through `expm1`/`ln_1p` so that tiny `y` keeps full precision.
pub fn geometric_tail(y: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    if y == 0.0 {
        return k as f64;
    }
    if y >= 1.0 {
        return 1.0;
    }
    -(k as f64 * (-y).ln_1p()).exp_m1() / y
}

/// First-order truncated power series `re + eps * ε`, used to carry tremble
/// probabilities through a chain and read off the leading order.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const ZERO: Dual = Dual { re: 0.0, eps: 0.0 };
    pub const ONE: Dual = Dual { re: 1.0, eps: 0.0 };

    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }

    /// Probability `p` played with an independent tremble of size ε:
    /// `(1 - ε) p + ε (1 - p)`.
    pub fn trembled(p: f64) -> Self {
        Dual::new(p, 1.0 - 2.0 * p)
    }

    pub fn powi(self, k: usize) -> Dual {
        let mut acc = Dual::ONE;
        for _ in 0..k {
            acc = acc * self;
        }
        acc
    }

    pub fn scale(self, c: f64) -> Dual {
        Dual::new(self.re * c, self.eps * c)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

/// Uniform grid of `points` values covering `[0, 1]` inclusive.
pub fn unit_grid(points: usize) -> Vec<f64> {
    assert!(points >= 2, "grid needs at least two points");
    let last = (points - 1) as f64;
    (0..points).map(|i| i as f64 / last).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_matches_direct_sum() {
        for &y in &[1e-9f64, 0.01, 0.3, 0.75, 0.999] {
            for k in 0..12 {
                let direct: f64 = (0..k).map(|j| (1.0 - y).powi(j as i32)).sum();
                assert!((geometric_tail(y, k) - direct).abs() < 1e-12, "y={y} k={k}");
            }
        }
        assert_eq!(geometric_tail(0.0, 5), 5.0);
        assert_eq!(geometric_tail(1.0, 5), 1.0);
    }

    #[test]
    fn dual_tremble_power() {
        // P(all n contribute) = (1 - ε)^n ≈ 1 - n ε
        let d = Dual::trembled(1.0).powi(3);
        assert_eq!(d, Dual::new(1.0, -3.0));
        let d = Dual::trembled(0.0);
        assert_eq!(d, Dual::new(0.0, 1.0));
    }
}
