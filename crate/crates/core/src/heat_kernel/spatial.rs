//! Whole-space density grids and the moment-integral checks.
//!
//! A grid of `M` points per axis with spacing `h` samples the inverse
//! transform at frequencies `2πk/(Mh)`; the result is the periodisation of
//! the density over the box of side `Mh`, which is why integrals are taken
//! over an inner window with the far tail supplied by the Lévy-measure
//! surrogate `p(x) ≈ A/|S^{d−1}|·|x|^{−d−α}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{radial_integral, stable_tail_mass_1d, Exponent, KernelGrid, EXP_CUT, TRUNCATION_TOL};
use crate::besov::DyadicPartition;
use crate::besov::{fft_nd, signed_index};
use crate::error::{ensure, Error, Result};
use crate::metrics::linear_fit;
use crate::quadrature::composite_gauss_legendre;
use crate::reduce::Neumaier;

pub const C_BLOCK: f64 = 64.0;
/// Inner window half-width as a fraction of the box side.
const WINDOW: f64 = 0.45;

/// Values of a kernel-derived function at `x_i = (i − M/2)·h` per axis.
#[derive(Debug, Clone, Serialize)]
pub struct KernelField {
    pub dim: usize,
    pub m: usize,
    pub spacing: f64,
    /// Row-major, axis 0 slowest.
    pub values: Vec<f64>,
}

impl KernelField {
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let c = |i: usize| (i as f64 - (self.m / 2) as f64) * self.spacing;
        match self.dim {
            1 => vec![c(idx)],
            _ => vec![c(idx / self.m), c(idx % self.m)],
        }
    }

    pub fn box_side(&self) -> f64 {
        self.m as f64 * self.spacing
    }

    /// Index of the point `−x`.
    fn mirror(&self, idx: usize) -> Option<usize> {
        let f = |i: usize| if i == 0 { None } else { Some(self.m - i) };
        match self.dim {
            1 => f(idx),
            _ => Some(f(idx / self.m)? * self.m + f(idx % self.m)?),
        }
    }

    /// `max |v(x) − v(−x)|`.
    pub fn symmetry_residual(&self) -> f64 {
        (0..self.values.len())
            .filter_map(|i| self.mirror(i).map(|j| (self.values[i] - self.values[j]).abs()))
            .fold(0.0, f64::max)
    }

    /// `h^d Σ v` over the whole box.
    pub fn total(&self) -> f64 {
        let mut acc = Neumaier::default();
        self.values.iter().for_each(|v| acc.add(*v));
        acc.value() * self.spacing.powi(self.dim as i32)
    }
}

/// Samples of `(2π)^{−d} ∫ g(ξ) e^{−E_{s,t}(ξ)} e^{iξ·x} dξ` (with `|ξ| ≤ Ξ`).
fn transform_grid<G: Fn(&[f64]) -> Complex64 + Sync>(
    grid: &KernelGrid,
    e: &Exponent<'_>,
    spacing: f64,
    m: usize,
    g: G,
) -> Vec<f64> {
    let d = grid.dim();
    let n = m.pow(d as u32);
    let dw = 2.0 * PI / (m as f64 * spacing);
    let cutoff2 = grid.cutoff() * grid.cutoff();
    let mut data: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (idx, w): (Vec<usize>, Vec<f64>) = match d {
                1 => (vec![i], vec![signed_index(i, m) as f64 * dw]),
                _ => {
                    let (a, b) = (i / m, i % m);
                    (vec![a, b], vec![signed_index(a, m) as f64 * dw, signed_index(b, m) as f64 * dw])
                }
            };
            let r2: f64 = w.iter().map(|v| v * v).sum();
            if r2 > cutoff2 {
                return Complex64::new(0.0, 0.0);
            }
            // centre the output: x_i = (i − M/2)h multiplies by (−1)^k per axis
            let sign = if idx.iter().sum::<usize>() % 2 == 0 { 1.0 } else { -1.0 };
            let ex = e.eval(&w);
            if ex > 2.0 * EXP_CUT {
                return Complex64::new(0.0, 0.0);
            }
            g(&w) * (sign * (-ex).exp())
        })
        .collect();
    fft_nd(&mut data, d, m, true);
    let norm = (m as f64 * spacing).powi(-(d as i32));
    data.iter().map(|c| c.re * norm).collect()
}

fn check_grid_cutoff(grid: &KernelGrid, s: f64, t: f64, spacing: f64) -> Result<()> {
    grid.check_truncation(s, t)?;
    let nyquist = PI / spacing;
    if nyquist < grid.cutoff() && grid.truncation_error(s, t, nyquist)? >= TRUNCATION_TOL {
        return Err(Error::Truncation {
            cutoff: nyquist,
            required: grid.required_cutoff(s, t)?,
        });
    }
    Ok(())
}

/// `∂^{axes} p^σ(s, t, ·)` on a centred grid (`axes` lists the derivative
/// directions; empty for the density itself).
pub fn kernel_field(grid: &KernelGrid, s: f64, t: f64, spacing: f64, m: usize, axes: &[usize]) -> Result<KernelField> {
    let d = grid.dim();
    ensure(spacing > 0.0, "spacing", || "h > 0".into())?;
    ensure(m.is_power_of_two() && m >= 16, "m", || "M must be a power of two ≥ 16".into())?;
    ensure(axes.iter().all(|a| *a < d), "axes", || format!("derivative axes must be < {d}"))?;
    check_grid_cutoff(grid, s, t, spacing)?;
    let e = grid.exponent(s, t)?;
    let values = transform_grid(grid, &e, spacing, m, |w| derivative_symbol(w, axes));
    Ok(KernelField {
        dim: d,
        m,
        spacing,
        values,
    })
}

fn derivative_symbol(w: &[f64], axes: &[usize]) -> Complex64 {
    axes.iter().fold(Complex64::new(1.0, 0.0), |acc, &a| acc * Complex64::new(0.0, w[a]))
}

/// Spacing resolving both the length scale and the truncation cutoff.
fn whole_space_spacing(grid: &KernelGrid, s: f64, t: f64, e: &Exponent<'_>) -> Result<f64> {
    let per_scale = if grid.dim() == 1 { 16.0 } else { 8.0 };
    let h = e.length_scale() / per_scale;
    let required = grid.required_cutoff(s, t)?;
    Ok(h.min(PI / required))
}

#[derive(Debug, Clone, Serialize)]
pub struct MassReport {
    pub mass: f64,
    /// Mass integrated from computed values.
    pub window_mass: f64,
    /// Tail mass added analytically (0 when the whole box is summed).
    pub tail_mass: f64,
    pub method: &'static str,
}

/// `∫ p^σ(s, t, x) dx`.
///
/// In d = 1 the pointwise density is integrated over `[−40ℓ, 40ℓ]` and the
/// exterior mass is taken from the large-`x` expansion of the stable law. In
/// d = 2 the whole-space grid is summed over its full periodic box.
pub fn mass_check(grid: &KernelGrid, s: f64, t: f64) -> Result<MassReport> {
    grid.check_truncation(s, t)?;
    let e = grid.exponent(s, t)?;
    if grid.dim() == 1 {
        let alpha = e.alpha();
        let c = e.eval(&[1.0]);
        let ell = c.powf(1.0 / alpha);
        let r = 40.0 * ell;
        let (xs, ws) = composite_gauss_legendre(0.0, r, 160, 16);
        let mut acc = Neumaier::default();
        let vals: Vec<f64> = xs
            .par_iter()
            .map(|x| radial_integral(c, alpha, *x, grid.cutoff(), 0) / PI)
            .collect();
        vals.iter().zip(&ws).for_each(|(v, w)| acc.add(v * w));
        let window = 2.0 * acc.value();
        let tail = if alpha < 2.0 { stable_tail_mass_1d(alpha, c, r, 16) } else { 0.0 };
        Ok(MassReport {
            mass: window + tail,
            window_mass: window,
            tail_mass: tail,
            method: "pointwise quadrature with series tail",
        })
    } else {
        let h = whole_space_spacing(grid, s, t, &e)?;
        let f = kernel_field(grid, s, t, h, grid.resolution(), &[])?;
        let total = f.total();
        Ok(MassReport {
            mass: total,
            window_mass: total,
            tail_mass: 0.0,
            method: "periodic grid sum",
        })
    }
}

/// Derivative components of order `k` and their multiplicities in the
/// Frobenius norm of `∇^k`.
fn components(d: usize, k: usize) -> Vec<(Vec<usize>, f64)> {
    match (d, k) {
        (_, 0) => vec![(vec![], 1.0)],
        (1, 1) => vec![(vec![0], 1.0)],
        (1, 2) => vec![(vec![0, 0], 1.0)],
        (_, 1) => vec![(vec![0], 1.0), (vec![1], 1.0)],
        _ => vec![(vec![0, 0], 1.0), (vec![0, 1], 2.0), (vec![1, 1], 1.0)],
    }
}

/// `|∇^k r^{−q}| = D_k(q) r^{−q−k}` in dimension `d`.
fn radial_derivative_factor(q: f64, k: usize, d: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => q,
        _ => q * ((q + 1.0).powi(2) + (d as f64 - 1.0)).sqrt(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentIntegralRow {
    pub t: f64,
    pub integral: f64,
    pub tail: f64,
    pub tail_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentIntegralReport {
    pub k: usize,
    pub beta: f64,
    pub rows: Vec<MomentIntegralRow>,
    pub slope: f64,
    pub expected_slope: f64,
    pub passed: bool,
}

/// `I(t) = ∫ |x|^β |∇^k p^σ(0, t, x)| dx` over a t-ladder and the fitted
/// slope of `log I` against `log t`, expected `−(k − β)/α`.
pub fn moment_integral_check(grid: &KernelGrid, t_ladder: &[f64], k: usize, beta: f64) -> Result<MomentIntegralReport> {
    let alpha = grid.alpha();
    ensure(k <= 2, "k", || format!("k ∈ {{0, 1, 2}}, got {k}"))?;
    ensure(beta >= 0.0 && beta < alpha, "beta", || format!("0 ≤ β < α = {alpha}, got β = {beta}"))?;
    ensure(t_ladder.len() >= 2, "t_ladder", || "at least two times".into())?;
    ensure(t_ladder.iter().all(|t| *t > 0.0), "t_ladder", || "times must be positive".into())?;
    let d = grid.dim();
    let m = grid.resolution();
    let mut rows = Vec::with_capacity(t_ladder.len());
    for &t in t_ladder {
        let e = grid.exponent(0.0, t)?;
        let h = whole_space_spacing(grid, 0.0, t, &e)?;
        let comps: Vec<(KernelField, f64)> = components(d, k)
            .into_iter()
            .map(|(axes, mult)| kernel_field(grid, 0.0, t, h, m, &axes).map(|f| (f, mult)))
            .collect::<Result<_>>()?;
        let window = WINDOW * m as f64 * h;
        let first = &comps[0].0;
        let mut acc = Neumaier::default();
        for i in 0..first.values.len() {
            let x = first.point(i);
            if x.iter().any(|c| c.abs() > window) {
                continue;
            }
            let norm = comps.iter().map(|(f, w)| w * f.values[i] * f.values[i]).sum::<f64>().sqrt();
            let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
            acc.add(if beta == 0.0 { norm } else { r.powf(beta) * norm });
        }
        let inner = acc.value() * h.powi(d as i32);
        let q = d as f64 + alpha;
        let tail = if alpha < 2.0 {
            e.tail_amplitude() * radial_derivative_factor(q, k, d) * window.powf(beta - alpha - k as f64)
                / (alpha + k as f64 - beta)
        } else {
            0.0
        };
        let integral = inner + tail;
        rows.push(MomentIntegralRow {
            t,
            integral,
            tail,
            tail_fraction: tail / integral,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.t.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.integral.ln()).collect();
    let fit = linear_fit(&xs, &ys, &vec![1.0; xs.len()])?;
    let expected = -(k as f64 - beta) / alpha;
    let passed = (fit.slope - expected).abs() <= 0.1 && rows.iter().all(|r| r.tail_fraction < 0.01);
    Ok(MomentIntegralReport {
        k,
        beta,
        rows,
        slope: fit.slope,
        expected_slope: expected,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockMomentRow {
    pub j: i32,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockMomentReport {
    pub n: usize,
    pub gamma: f64,
    pub theta: f64,
    pub rows: Vec<BlockMomentRow>,
    pub sup_ratio: f64,
    pub passed: bool,
}

/// Ratio of `∫|x|^γ |∇^n R_j p^σ(0,t,x)| dx` to
/// `2^{(n−ϑ)j} t^{−ϑ/α}(t^{γ/α} + 2^{−jγ})` over the `(j, t)` lattice.
///
/// Blocks `j ≥ 0` are band-limited to `|ξ| ≤ 3/2·2^j`; the grid resolves
/// twice that frequency and spans a few hundred block wavelengths.
pub fn block_moment_check(
    grid: &KernelGrid,
    partition: &DyadicPartition,
    js: &[i32],
    n: usize,
    gamma: f64,
    theta: f64,
    t_ladder: &[f64],
) -> Result<BlockMomentReport> {
    let alpha = grid.alpha();
    let d = grid.dim();
    ensure(n <= 1, "n", || format!("n ∈ {{0, 1}}, got {n}"))?;
    ensure(gamma >= 0.0 && gamma < alpha, "gamma", || format!("0 ≤ γ < α = {alpha}, got γ = {gamma}"))?;
    ensure(theta >= gamma, "theta", || format!("ϑ ≥ γ required, got ϑ = {theta}, γ = {gamma}"))?;
    ensure(!js.is_empty() && !t_ladder.is_empty(), "js", || "non-empty j and t ladders".into())?;
    ensure(t_ladder.iter().all(|t| *t > 0.0), "t_ladder", || "times must be positive".into())?;
    for &j in js {
        ensure(j >= 0 && j <= partition.j_max, "j", || {
            format!("0 ≤ j ≤ {} required, got j = {j}", partition.j_max)
        })?;
        if 1.5 * (j as f64).exp2() > grid.cutoff() {
            return Err(Error::NotRepresentable(format!(
                "block {j} reaches |ξ| = {} beyond the cutoff {}",
                1.5 * (j as f64).exp2(),
                grid.cutoff()
            )));
        }
    }
    let m = if d == 1 { 4096 } else { 512 };
    let lattice: Vec<(i32, f64)> = js.iter().flat_map(|&j| t_ladder.iter().map(move |&t| (j, t))).collect();
    let rows: Vec<Result<BlockMomentRow>> = lattice
        .par_iter()
        .map(|&(j, t)| {
            let e = grid.exponent(0.0, t)?;
            let scale = (j as f64).exp2();
            let h = PI / (3.0 * scale);
            let block = |w: &[f64]| partition.block_multiplier(j, w.iter().map(|v| v * v).sum::<f64>().sqrt());
            let comps: Vec<Vec<f64>> = components(d, n)
                .into_iter()
                .map(|(axes, _)| transform_grid(grid, &e, h, m, |w| derivative_symbol(w, &axes) * block(w)))
                .collect();
            let probe = KernelField {
                dim: d,
                m,
                spacing: h,
                values: Vec::new(),
            };
            let mut acc = Neumaier::default();
            for i in 0..comps[0].len() {
                let x = probe.point(i);
                let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let norm = comps.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt();
                acc.add(if gamma == 0.0 { norm } else { r.powf(gamma) * norm });
            }
            let lhs = acc.value() * h.powi(d as i32);
            let rhs = ((n as f64 - theta) * j as f64).exp2()
                * t.powf(-theta / alpha)
                * (t.powf(gamma / alpha) + (-(j as f64) * gamma).exp2());
            Ok(BlockMomentRow {
                j,
                t,
                lhs,
                rhs,
                ratio: lhs / rhs,
            })
        })
        .collect();
    let rows: Vec<BlockMomentRow> = rows.into_iter().collect::<Result<_>>()?;
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(BlockMomentReport {
        n,
        gamma,
        theta,
        rows,
        sup_ratio,
        passed: sup_ratio <= C_BLOCK,
    })
}
