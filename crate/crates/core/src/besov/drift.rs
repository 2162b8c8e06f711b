//! Lacunary cosine drifts in `B^{−β}_{∞,∞}` and their exact mollifications.
//!
//! A drift is a finite sum `b(x) = Σ_j a_j cos(k_j·x + φ_j) v_j` with one
//! lattice frequency per dyadic level, placed where `ψ_j(k_j) = 1` and all
//! other blocks vanish. Then `R_j b` is exactly the j-th term and every Besov
//! norm is known in closed form.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::field::FieldOnGrid;
use super::mollifier::Mollifier;
use crate::error::{ensure, Error, Result};
use crate::rng::{derive_seed, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriftKind {
    /// Coefficient direction `e_{j mod d}` at level `j`.
    Componentwise,
    /// Coefficient direction `k_j^⊥/|k_j|` (d = 2): divergence-free by construction.
    DivergenceFree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftTerm {
    pub level: i32,
    pub freq: Vec<f64>,
    pub amplitude: f64,
    pub phase: f64,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftSpec {
    pub dim: usize,
    pub period: u32,
    pub beta: f64,
    pub truncation: i32,
    pub kind: DriftKind,
    pub terms: Vec<DriftTerm>,
    /// Mollification level `m` if this is `b * φ_m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mollification: Option<f64>,
}

/// Lattice point `n ∈ Z²` with `0.9R ≤ |n| ≤ R` closest in angle to `omega`.
fn annulus_point(radius: i64, omega: f64) -> (i64, i64) {
    let (us, uc) = omega.sin_cos();
    let r2 = (radius * radius) as f64;
    let inner2 = 0.81 * r2;
    let mut best = (radius, 0);
    let mut best_cos = f64::NEG_INFINITY;
    for n0 in -radius..=radius {
        let rest_hi = r2 - (n0 * n0) as f64;
        let hi = rest_hi.max(0.0).sqrt().floor() as i64;
        let lo = (inner2 - (n0 * n0) as f64).max(0.0).sqrt().ceil() as i64;
        if lo > hi {
            continue;
        }
        let ideal = if uc.abs() > 1e-12 { n0 as f64 * us / uc } else { us.signum() * hi as f64 };
        for sign in [1i64, -1] {
            let target = (sign as f64 * ideal).round().clamp(lo as f64, hi as f64) as i64;
            for n1 in [target, lo, hi] {
                let v = (n0, sign * n1);
                let norm = ((v.0 * v.0 + v.1 * v.1) as f64).sqrt();
                let c = (v.0 as f64 * uc + v.1 as f64 * us) / norm;
                if c > best_cos + 1e-15 || ((c - best_cos).abs() <= 1e-15 && norm > norm_of(best)) {
                    best_cos = c;
                    best = v;
                }
            }
        }
    }
    best
}

fn norm_of(v: (i64, i64)) -> f64 {
    ((v.0 * v.0 + v.1 * v.1) as f64).sqrt()
}

impl DriftSpec {
    /// `b(x) = Σ_{j=0}^{J} A·2^{βj} cos(k_j·x + φ_j) v_j` on the torus of period `2π`,
    /// random frequency directions (d = 2) and phases drawn from `seed`.
    pub fn synthesize(beta: f64, j_top: i32, amplitude: f64, seed: u64, dim: usize, kind: DriftKind) -> Result<Self> {
        ensure(beta > 0.0, "beta", || format!("β > 0, got {beta}"))?;
        ensure(j_top >= 0, "J", || format!("J ≥ 0, got {j_top}"))?;
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        ensure(kind == DriftKind::Componentwise || dim == 2, "kind", || {
            "divergence-free drifts need d = 2".into()
        })?;
        ensure(j_top <= 30, "J", || format!("J ≤ 30, got {j_top}"))?;
        let period = 1u32;
        let mut rng = RngStream::new(derive_seed(seed, 0xD21F), 0);
        let mut terms = Vec::with_capacity(j_top as usize + 1);
        for j in 0..=j_top {
            let radius = (1i64 << j) * period as i64;
            let omega = PI * rng.uniform_open();
            let phase = 2.0 * PI * rng.uniform_open();
            let freq: Vec<f64> = if dim == 1 {
                vec![radius as f64 / period as f64]
            } else {
                let n = annulus_point(radius, omega);
                vec![n.0 as f64 / period as f64, n.1 as f64 / period as f64]
            };
            let direction = match kind {
                DriftKind::Componentwise => {
                    let mut e = vec![0.0; dim];
                    e[j as usize % dim] = 1.0;
                    e
                }
                DriftKind::DivergenceFree => {
                    let r = (freq[0] * freq[0] + freq[1] * freq[1]).sqrt();
                    vec![-freq[1] / r, freq[0] / r]
                }
            };
            terms.push(DriftTerm {
                level: j,
                freq,
                amplitude: amplitude * (beta * j as f64).exp2(),
                phase,
                direction,
            });
        }
        Self::from_terms(dim, period, beta, j_top, kind, terms)
    }

    /// Validates that each frequency sits where its own block multiplier is 1.
    pub fn from_terms(
        dim: usize,
        period: u32,
        beta: f64,
        truncation: i32,
        kind: DriftKind,
        terms: Vec<DriftTerm>,
    ) -> Result<Self> {
        ensure(period >= 1, "period", || "P ≥ 1".into())?;
        for t in &terms {
            ensure(t.freq.len() == dim && t.direction.len() == dim, "terms", || "dimension mismatch".into())?;
            ensure(t.level >= 0, "terms", || "levels must be ≥ 0".into())?;
            let r = t.freq.iter().map(|x| x * x).sum::<f64>().sqrt();
            let top = (t.level as f64).exp2();
            ensure(r > 0.75 * top && r <= top, "terms", || {
                format!("|k| = {r} must lie in (0.75·2^j, 2^j] for level {}", t.level)
            })?;
            for x in &t.freq {
                let n = x * period as f64;
                ensure((n - n.round()).abs() < 1e-9, "terms", || format!("frequency {x} is off the lattice Z/{period}"))?;
            }
            if kind == DriftKind::DivergenceFree {
                let dot: f64 = t.freq.iter().zip(&t.direction).map(|(a, b)| a * b).sum();
                ensure(dot.abs() < 1e-12 * r, "terms", || "divergence-free terms need k·v = 0".into())?;
            }
        }
        Ok(DriftSpec {
            dim,
            period,
            beta,
            truncation,
            kind,
            terms,
            mollification: None,
        })
    }

    /// The zero drift.
    pub fn zero(dim: usize) -> Self {
        DriftSpec {
            dim,
            period: 1,
            beta: 1.0,
            truncation: 0,
            kind: DriftKind::Componentwise,
            terms: Vec::new(),
            mollification: None,
        }
    }

    /// `sup_j 2^{sj} Σ_{terms at level j} |a|` (exact for one term per level).
    pub fn besov_norm(&self, s: f64) -> f64 {
        let mut levels: Vec<(i32, f64)> = Vec::new();
        for t in &self.terms {
            match levels.iter_mut().find(|(l, _)| *l == t.level) {
                Some(e) => e.1 += t.amplitude.abs(),
                None => levels.push((t.level, t.amplitude.abs())),
            }
        }
        levels.iter().map(|(j, a)| (s * *j as f64).exp2() * a).fold(0.0, f64::max)
    }

    /// Designed `‖b‖_{B^{−β}_{∞,∞}}`.
    pub fn designed_norm(&self) -> f64 {
        self.besov_norm(-self.beta)
    }

    /// `Σ |a_j| ≥ ‖b‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.amplitude.abs()).sum()
    }

    /// `b * φ_m`: amplitudes multiplied by `μ(|k_j|/m)`.
    pub fn mollify(&self, mollifier: &Mollifier, m: f64) -> Result<Self> {
        ensure(m > 0.0 && m.is_finite(), "m", || format!("m > 0, got {m}"))?;
        ensure(mollifier.dim() == self.dim, "mollifier", || "dimension mismatch".into())?;
        let mut out = self.clone();
        for t in &mut out.terms {
            let r = t.freq.iter().map(|x| x * x).sum::<f64>().sqrt();
            t.amplitude *= mollifier.multiplier(r / m);
        }
        out.mollification = Some(m);
        Ok(out)
    }

    /// `self − other` for drifts sharing frequencies, phases and directions.
    pub fn difference(&self, other: &Self) -> Result<Self> {
        ensure(self.terms.len() == other.terms.len(), "other", || "term counts differ".into())?;
        let mut out = self.clone();
        for (t, o) in out.terms.iter_mut().zip(&other.terms) {
            ensure(t.freq == o.freq && t.phase == o.phase && t.direction == o.direction, "other", || {
                "drifts do not share their frequencies".into()
            })?;
            t.amplitude -= o.amplitude;
        }
        out.mollification = None;
        Ok(out)
    }

    /// `b(x)` written into `out`.
    #[inline]
    pub fn evaluate_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for t in &self.terms {
            let phase: f64 = t.freq.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + t.phase;
            let c = t.amplitude * phase.cos();
            for (o, v) in out.iter_mut().zip(&t.direction) {
                *o += c * v;
            }
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(x, &mut out);
        out
    }

    /// Component fields on an `M^d` grid of the drift's torus.
    pub fn render(&self, m: usize) -> Result<Vec<FieldOnGrid>> {
        let nyq = m as f64 / (2.0 * self.period as f64);
        for t in &self.terms {
            if t.freq.iter().any(|k| k.abs() >= nyq) {
                return Err(Error::NotRepresentable(format!(
                    "level {} frequency {:?} is at or above the grid Nyquist {nyq}",
                    t.level, t.freq
                )));
            }
        }
        (0..self.dim)
            .map(|c| FieldOnGrid::from_fn(self.dim, m, self.period, |x| self.evaluate(x)[c]))
            .collect()
    }
}

/// CSV with columns `x0[,x1],v0[,v1]` for the given component fields.
pub fn write_fields_csv<W: Write>(fields: &[FieldOnGrid], mut w: W) -> Result<()> {
    ensure(!fields.is_empty(), "fields", || "at least one field".into())?;
    let d = fields[0].dim();
    let head: Vec<String> = (0..d).map(|i| format!("x{i}")).chain((0..fields.len()).map(|i| format!("v{i}"))).collect();
    writeln!(w, "{}", head.join(","))?;
    for i in 0..fields[0].values().len() {
        let x = fields[0].point(i);
        let row: Vec<String> = x
            .iter()
            .map(|v| format!("{v:.17e}"))
            .chain(fields.iter().map(|f| format!("{:.17e}", f.values()[i])))
            .collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annulus_points_are_in_range() {
        for j in 0..12 {
            let r = 1i64 << j;
            for q in 0..7 {
                let n = annulus_point(r, q as f64 * 0.45);
                let norm = norm_of(n);
                assert!(norm <= r as f64 && norm >= 0.9 * r as f64, "j={j} n={n:?}");
            }
        }
    }

    #[test]
    fn single_term_at_origin_is_amplitude_vector() {
        let t = DriftTerm {
            level: 3,
            freq: vec![8.0, 0.0],
            amplitude: 2.5,
            phase: 0.0,
            direction: vec![0.0, 1.0],
        };
        let d = DriftSpec::from_terms(2, 1, 0.3, 3, DriftKind::DivergenceFree, vec![t]).unwrap();
        assert_eq!(d.evaluate(&[0.0, 0.0]), vec![0.0, 2.5]);
        assert_eq!(DriftSpec::zero(2).evaluate(&[0.3, -1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn straddling_frequency_rejected() {
        let t = DriftTerm {
            level: 3,
            freq: vec![9.0],
            amplitude: 1.0,
            phase: 0.0,
            direction: vec![1.0],
        };
        assert!(DriftSpec::from_terms(1, 1, 0.3, 3, DriftKind::Componentwise, vec![t]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let d = DriftSpec::synthesize(0.2, 6, 1.0, 7, 2, DriftKind::DivergenceFree).unwrap();
        let s = serde_json::to_string(&d).unwrap();
        let back: DriftSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }
}
