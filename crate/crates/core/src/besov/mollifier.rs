//! The standard bump mollifier and its Fourier multiplier.
//!
//! `φ(x) = Z⁻¹ exp(−1/(1 − |x|²))` on the unit ball. Because `φ` is radial,
//! `μ(r) = ∫ cos(r y₁) φ(y) dy` depends only on the one-dimensional marginal
//! `φ₁` of `φ`; convolution with `φ_m = m^d φ(m·)` multiplies the mode `e^{iξ·x}`
//! by `μ(|ξ|/m)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{ensure, Result};
use crate::quadrature::composite_gauss_legendre;

const TABLE_MAX: f64 = 16.0;
const TABLE_STEP: f64 = 1.0 / 256.0;
/// Beyond this radius `|μ| < 1e-25`; the multiplier is returned as 0.
const CUTOFF: f64 = 2000.0;

fn bump(u2: f64) -> f64 {
    if u2 >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u2)).exp()
    }
}

#[derive(Debug, Clone)]
pub struct Mollifier {
    dim: usize,
    norm: f64,
    inner_nodes: Vec<f64>,
    inner_weights: Vec<f64>,
    table: Vec<f64>,
}

impl Mollifier {
    pub fn new(dim: usize) -> Result<Self> {
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        let (inner_nodes, inner_weights) = composite_gauss_legendre(-1.0, 1.0, 16, 16);
        let mut m = Mollifier {
            dim,
            norm: 1.0,
            inner_nodes,
            inner_weights,
            table: Vec::new(),
        };
        let (s, w) = composite_gauss_legendre(0.0, 1.0, 64, 16);
        m.norm = 2.0 * s.iter().zip(&w).map(|(s, w)| w * m.marginal_unnormalised(*s)).sum::<f64>();
        let phi: Vec<f64> = s.iter().map(|&x| m.marginal(x)).collect();
        let (s2, w2) = composite_gauss_legendre(0.0, 1.0, 64, 16);
        let phi2: Vec<f64> = s2.iter().map(|&x| m.marginal(x)).collect();
        let count = (TABLE_MAX / TABLE_STEP).round() as usize + 3;
        m.table = (0..count)
            .map(|i| {
                let r = i as f64 * TABLE_STEP;
                let (nodes, weights, vals) = if r < 4.0 { (&s, &w, &phi) } else { (&s2, &w2, &phi2) };
                2.0 * nodes
                    .iter()
                    .zip(weights)
                    .zip(vals)
                    .map(|((x, w), p)| w * (r * x).cos() * p)
                    .sum::<f64>()
            })
            .collect();
        Ok(m)
    }

    /// Shared instance for `d ∈ {1, 2}`.
    pub fn standard(dim: usize) -> Result<&'static Mollifier> {
        static ONE: OnceLock<Mollifier> = OnceLock::new();
        static TWO: OnceLock<Mollifier> = OnceLock::new();
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        let cell = if dim == 1 { &ONE } else { &TWO };
        Ok(cell.get_or_init(|| Mollifier::new(dim).expect("dimension checked")))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Normalising constant `Z = ∫ exp(−1/(1−|x|²)) dx`.
    pub fn normalisation(&self) -> f64 {
        self.norm
    }

    /// `φ(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        bump(x.iter().map(|v| v * v).sum()) / self.norm
    }

    fn marginal_unnormalised(&self, s: f64) -> f64 {
        let s2 = s * s;
        if s2 >= 1.0 {
            return 0.0;
        }
        match self.dim {
            1 => bump(s2),
            _ => {
                let w = (1.0 - s2).sqrt();
                w * self
                    .inner_nodes
                    .iter()
                    .zip(&self.inner_weights)
                    .map(|(t, wt)| wt * bump(s2 + w * w * t * t))
                    .sum::<f64>()
            }
        }
    }

    /// One-dimensional marginal density `φ₁(s)`.
    pub fn marginal(&self, s: f64) -> f64 {
        self.marginal_unnormalised(s) / self.norm
    }

    /// `μ(r) = ∫ cos(r y₁) φ(y) dy`, even in `r`, `μ(0) = 1`.
    pub fn multiplier(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= TABLE_MAX {
            let u = r / TABLE_STEP;
            let i = (u.floor() as usize).clamp(1, self.table.len() - 3);
            let t = u - i as f64;
            // four-point Lagrange through i−1, i, i+1, i+2
            let (a, b, c, d) = (self.table[i - 1], self.table[i], self.table[i + 1], self.table[i + 2]);
            -t * (t - 1.0) * (t - 2.0) / 6.0 * a + (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0 * b
                - (t + 1.0) * t * (t - 2.0) / 2.0 * c
                + (t + 1.0) * t * (t - 1.0) / 6.0 * d
        } else if r < CUTOFF {
            self.multiplier_direct(r)
        } else {
            0.0
        }
    }

    /// `μ(r)` by direct quadrature, panels scaled with the oscillation count.
    pub fn multiplier_direct(&self, r: f64) -> f64 {
        let panels = 32 + (r / PI).ceil() as usize;
        let (s, w) = composite_gauss_legendre(0.0, 1.0, panels, 16);
        2.0 * s.iter().zip(&w).map(|(s, w)| w * (r * s).cos() * self.marginal(*s)).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiplier_basic_properties() {
        for d in [1, 2] {
            let m = Mollifier::standard(d).unwrap();
            assert!((m.multiplier(0.0) - 1.0).abs() < 1e-10);
            for i in 0..400 {
                let r = i as f64 * 0.173;
                let v = m.multiplier(r);
                assert!(v.abs() <= 1.0 + 1e-10);
                assert_eq!(v, m.multiplier(-r));
            }
        }
    }

    #[test]
    fn table_matches_direct_quadrature() {
        for d in [1, 2] {
            let m = Mollifier::standard(d).unwrap();
            for r in [0.3, 1.7, 5.123, 9.99, 15.9] {
                let a = m.multiplier(r);
                let b = m.multiplier_direct(r);
                assert!((a - b).abs() <= 1e-9 * b.abs().max(1e-3), "d={d} r={r}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn normalisation_matches_polar_integral() {
        let m = Mollifier::standard(2).unwrap();
        // Z₂ = 2π ∫₀¹ r e^{−1/(1−r²)} dr
        let (x, w) = composite_gauss_legendre(0.0, 1.0, 64, 16);
        let z: f64 = 2.0 * PI * x.iter().zip(&w).map(|(r, w)| w * r * bump(r * r)).sum::<f64>();
        assert!((m.normalisation() - z).abs() < 1e-10 * z, "{} vs {z}", m.normalisation());
    }
}
