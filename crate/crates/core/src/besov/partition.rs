//! Smooth dyadic partition of unity.
//!
//! `χ` is radial, equal to 1 on `|ξ| ≤ 1` and 0 on `|ξ| ≥ 3/2`, built from the
//! smooth step `h(u)/(h(u) + h(1−u))` with `h(u) = e^{−1/u}`. With
//! `ψ = χ − χ(2·)` and `ψ_j = ψ(2^{−j}·)` the sum telescopes:
//! `χ(2ξ) + Σ_{j=0}^{k} ψ_j(ξ) = χ(2^{−k}ξ)`.

use serde::{Deserialize, Serialize};

fn bump_tail(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp()
    }
}

/// Smooth step: 0 for `u ≤ 0`, 1 for `u ≥ 1`.
pub fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = bump_tail(u);
        a / (a + bump_tail(1.0 - u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub j_max: i32,
}

impl DyadicPartition {
    pub fn new(j_max: i32) -> Self {
        DyadicPartition { j_max }
    }

    /// `χ(r)` for `r = |ξ|`.
    pub fn chi(&self, r: f64) -> f64 {
        1.0 - smooth_step(2.0 * (r - 1.0))
    }

    /// `ψ(r) = χ(r) − χ(2r)`.
    pub fn psi(&self, r: f64) -> f64 {
        self.chi(r) - self.chi(2.0 * r)
    }

    /// Block multiplier: `ψ_j(r)` for `j ≥ 0`, `χ(2r)` for `j = −1`.
    pub fn block_multiplier(&self, j: i32, r: f64) -> f64 {
        if j < 0 {
            self.chi(2.0 * r)
        } else {
            self.psi(r * (-j as f64).exp2())
        }
    }

    /// `|χ(2ξ) + Σ_{j=0}^{j_max} ψ_j(ξ) − χ(2^{−j_max}ξ)|`.
    pub fn unity_residual(&self, r: f64) -> f64 {
        let sum: f64 = (-1..=self.j_max).map(|j| self.block_multiplier(j, r)).sum();
        (sum - self.chi(r * (-self.j_max as f64).exp2())).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        let p = DyadicPartition::new(10);
        for i in 0..=1000 {
            let r = i as f64 / 1000.0;
            assert_eq!(p.chi(r), 1.0);
        }
        for i in 0..100 {
            let r = 1.5 + i as f64 * 0.1;
            assert_eq!(p.chi(r), 0.0);
        }
        for i in 0..2000 {
            let r = i as f64 * 0.002;
            let v = p.psi(r);
            assert!((0.0..=1.0).contains(&v));
            if !(0.5..=1.5).contains(&r) {
                assert!(v.abs() < 1e-14, "ψ({r}) = {v}");
            }
        }
    }

    #[test]
    fn block_is_one_on_inner_annulus() {
        let p = DyadicPartition::new(10);
        for j in 0..8 {
            for t in [0.76, 0.8, 0.9, 0.95, 1.0] {
                let r = t * (j as f64).exp2();
                assert_eq!(p.block_multiplier(j, r), 1.0);
                assert_eq!(p.block_multiplier(j + 1, r), 0.0);
                assert_eq!(p.block_multiplier(j - 1, r), 0.0);
            }
        }
    }
}
