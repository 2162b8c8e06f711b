//! Real fields on a periodic grid and their Littlewood–Paley blocks.
//!
//! The torus has side `2πP`; the grid has `M` points per axis at
//! `x_i = 2πP·i/M` and the dual lattice is `Z^d/P`. The spectrum holds the
//! Fourier-series coefficients `c_ξ`, so `f(x) = Σ_ξ c_ξ e^{iξ·x}` and a Fourier
//! multiplier `g(D)` acts as `c_ξ ↦ g(ξ) c_ξ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::partition::DyadicPartition;
use crate::error::{ensure, Error, Result};

pub const MAX_M_1D: usize = 1 << 16;
pub const MAX_M_2D: usize = 1 << 10;

#[derive(Debug, Clone)]
pub struct FieldOnGrid {
    dim: usize,
    m: usize,
    period: u32,
    values: Vec<f64>,
    spectrum: Vec<Complex64>,
}

/// In-place unnormalised DFT along every axis of a row-major `m^d` array.
pub(crate) fn fft_nd(data: &mut [Complex64], dim: usize, m: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    // last axis is contiguous
    for row in data.chunks_mut(m) {
        fft.process(row);
    }
    if dim == 2 {
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for c in 0..m {
            for r in 0..m {
                col[r] = data[r * m + c];
            }
            fft.process(&mut col);
            for r in 0..m {
                data[r * m + c] = col[r];
            }
        }
    }
}

/// Signed frequency index of DFT bin `i`.
#[inline]
pub(crate) fn signed_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

impl FieldOnGrid {
    pub fn new(dim: usize, m: usize, period: u32, values: Vec<f64>) -> Result<Self> {
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        ensure(m.is_power_of_two() && m >= 4, "m", || format!("M must be a power of two ≥ 4, got {m}"))?;
        let cap = if dim == 1 { MAX_M_1D } else { MAX_M_2D };
        ensure(m <= cap, "m", || format!("M ≤ {cap} in d = {dim}, got {m}"))?;
        ensure(period >= 1, "period", || "P ≥ 1".into())?;
        ensure(values.len() == m.pow(dim as u32), "values", || format!("expected {} values", m.pow(dim as u32)))?;
        let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut spec, dim, m, false);
        let norm = 1.0 / values.len() as f64;
        spec.iter_mut().for_each(|c| *c *= norm);
        Ok(FieldOnGrid {
            dim,
            m,
            period,
            values,
            spectrum: spec,
        })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(dim: usize, m: usize, period: u32, f: F) -> Result<Self> {
        let n = m.checked_pow(dim as u32).ok_or_else(|| Error::invalid("m", "grid too large"))?;
        let h = 2.0 * PI * period as f64 / m as f64;
        let mut x = vec![0.0; dim];
        let values = (0..n)
            .map(|idx| {
                fill_point(idx, dim, m, h, &mut x);
                f(&x)
            })
            .collect();
        Self::new(dim, m, period, values)
    }

    /// Field from Hermitian-symmetric coefficients (multipliers used here all
    /// satisfy `g(−ξ) = conj g(ξ)`, so the imaginary part is round-off).
    fn from_spectrum(&self, spec: Vec<Complex64>) -> Self {
        let mut vals = spec.clone();
        fft_nd(&mut vals, self.dim, self.m, true);
        let values: Vec<f64> = vals.iter().map(|c| c.re).collect();
        FieldOnGrid {
            dim: self.dim,
            m: self.m,
            period: self.period,
            values,
            spectrum: spec,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI * self.period as f64 / self.m as f64
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        fill_point(idx, self.dim, self.m, self.spacing(), &mut x);
        x
    }

    /// Largest representable frequency per axis, `M/(2P)`.
    pub fn nyquist(&self) -> f64 {
        self.m as f64 / (2.0 * self.period as f64)
    }

    /// Frequency `ξ ∈ Z^d/P` of spectrum entry `idx`.
    pub fn frequency(&self, idx: usize) -> Vec<f64> {
        let p = self.period as f64;
        match self.dim {
            1 => vec![signed_index(idx, self.m) as f64 / p],
            _ => vec![
                signed_index(idx / self.m, self.m) as f64 / p,
                signed_index(idx % self.m, self.m) as f64 / p,
            ],
        }
    }

    fn is_nyquist_bin(&self, idx: usize, axis: usize) -> bool {
        let i = if self.dim == 1 {
            idx
        } else if axis == 0 {
            idx / self.m
        } else {
            idx % self.m
        };
        i == self.m / 2
    }

    /// `g(D) f` for a Fourier multiplier `g`.
    pub fn apply_multiplier<G: Fn(&[f64]) -> Complex64>(&self, g: G) -> Self {
        let spec = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, c)| c * g(&self.frequency(i)))
            .collect();
        self.from_spectrum(spec)
    }

    /// `∂_axis f` (Nyquist bin dropped: its sign is ambiguous).
    pub fn derivative(&self, axis: usize) -> Self {
        let spec = self
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if self.is_nyquist_bin(i, axis) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * Complex64::new(0.0, self.frequency(i)[axis])
                }
            })
            .collect();
        self.from_spectrum(spec)
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        FieldOnGrid {
            dim: self.dim,
            m: self.m,
            period: self.period,
            values: self.values.iter().map(|v| lambda * v).collect(),
            spectrum: self.spectrum.iter().map(|c| c * lambda).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(FieldOnGrid {
            dim: self.dim,
            m: self.m,
            period: self.period,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
            spectrum: self.spectrum.iter().zip(&other.spectrum).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.sub(&other.scaled(-1.0))
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        ensure(
            self.dim == other.dim && self.m == other.m && self.period == other.period,
            "field",
            || "fields live on different grids".into(),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Highest block level with `3/2 · 2^j` strictly below the Nyquist frequency.
    pub fn max_block_level(&self) -> i32 {
        let mut j = -1;
        while 1.5 * ((j + 1) as f64).exp2() < self.nyquist() {
            j += 1;
        }
        j
    }

    /// Littlewood–Paley block `R_j f`.
    pub fn block(&self, partition: &DyadicPartition, j: i32) -> Result<Self> {
        ensure(j >= -1, "j", || format!("j ≥ −1, got {j}"))?;
        if j > self.max_block_level() {
            return Err(Error::NotRepresentable(format!(
                "block {j} needs 3/2·2^j < Nyquist {}",
                self.nyquist()
            )));
        }
        Ok(self.apply_multiplier(|xi| {
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            Complex64::new(partition.block_multiplier(j, r), 0.0)
        }))
    }

    /// Errors unless the spectrum vanishes (relative 1e-12) beyond the
    /// frequencies covered by the representable blocks.
    pub fn check_band_limited(&self, partition: &DyadicPartition) -> Result<()> {
        let top = self.max_block_level();
        let cap = self.spectrum.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        for (i, c) in self.spectrum.iter().enumerate() {
            let xi = self.frequency(i);
            let r = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
            let covered = partition.chi(r * (-top as f64).exp2());
            if (1.0 - covered) * c.norm() > 1e-12 * cap.max(1e-300) {
                return Err(Error::NotRepresentable(format!(
                    "frequency {xi:?} lies above the top representable block {top}"
                )));
            }
        }
        Ok(())
    }
}

fn fill_point(idx: usize, dim: usize, m: usize, h: f64, x: &mut [f64]) {
    if dim == 1 {
        x[0] = idx as f64 * h;
    } else {
        x[0] = (idx / m) as f64 * h;
        x[1] = (idx % m) as f64 * h;
    }
}

/// Pointwise Euclidean sup norm of a vector field given by its components.
pub fn vector_max_norm(components: &[FieldOnGrid]) -> f64 {
    let n = components[0].values.len();
    (0..n)
        .map(|i| components.iter().map(|c| c.values[i] * c.values[i]).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// `‖f‖_{B^s_{∞,∞}} = sup_j 2^{sj} ‖R_j f‖_∞` over the representable levels.
pub fn besov_norm(field: &FieldOnGrid, partition: &DyadicPartition, s: f64) -> Result<f64> {
    besov_norm_vector(std::slice::from_ref(field), partition, s)
}

/// Besov norm of a vector field with the pointwise Euclidean norm.
pub fn besov_norm_vector(components: &[FieldOnGrid], partition: &DyadicPartition, s: f64) -> Result<f64> {
    ensure(!components.is_empty(), "components", || "at least one component".into())?;
    let top = components[0].max_block_level();
    let mut best = 0.0f64;
    for j in -1..=top {
        let blocks: Vec<FieldOnGrid> = components.iter().map(|c| c.block(partition, j)).collect::<Result<_>>()?;
        best = best.max((s * j as f64).exp2() * vector_max_norm(&blocks));
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_cosine_spectrum() {
        let f = FieldOnGrid::from_fn(1, 64, 1, |x| (3.0 * x[0]).cos()).unwrap();
        let back = f.apply_multiplier(|_| Complex64::new(1.0, 0.0));
        let err = f.values().iter().zip(back.values()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        assert!(err < 1e-13);
        assert!((f.spectrum()[3].re - 0.5).abs() < 1e-14);
        assert!((f.spectrum()[61].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let f = FieldOnGrid::from_fn(2, 32, 2, |x| (1.5 * x[1]).sin()).unwrap();
        let dy = f.derivative(1);
        let want = FieldOnGrid::from_fn(2, 32, 2, |x| 1.5 * (1.5 * x[1]).cos()).unwrap();
        let err = dy.sub(&want).unwrap().max_abs();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(FieldOnGrid::from_fn(1, 48, 1, |_| 0.0).is_err());
        assert!(FieldOnGrid::from_fn(3, 8, 1, |_| 0.0).is_err());
        assert!(FieldOnGrid::from_fn(2, 2048, 1, |_| 0.0).is_err());
    }

    #[test]
    fn block_level_limit() {
        let f = FieldOnGrid::from_fn(1, 64, 1, |_| 0.0).unwrap();
        // Nyquist 32: 1.5·2^4 = 24 < 32, 1.5·2^5 = 48 ≥ 32
        assert_eq!(f.max_block_level(), 4);
        assert!(f.block(&DyadicPartition::new(4), 5).is_err());
    }
}
