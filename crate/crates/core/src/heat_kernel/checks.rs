//! Semigroup on periodic fields and the gradient and time-regularity checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{Exponent, KernelGrid};
use crate::besov::{vector_max_norm, FieldOnGrid};
use crate::error::{ensure, Result};

pub const C_GRAD: f64 = 32.0;
pub const C_TIME: f64 = 32.0;

fn max_frequency(f: &FieldOnGrid) -> f64 {
    f.nyquist() * (f.dim() as f64).sqrt()
}

fn multiplier_of<'a>(e: &'a Exponent<'a>, cutoff: f64) -> impl Fn(&[f64]) -> Complex64 + 'a {
    move |xi: &[f64]| {
        let r2: f64 = xi.iter().map(|v| v * v).sum();
        if r2 > cutoff * cutoff {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((-e.eval(xi)).exp(), 0.0)
        }
    }
}

/// `P^σ_{s,t} f` for a periodic field: multiplication of the Fourier
/// coefficients by `exp(−E_{s,t}(ξ))`, frequencies above `Ξ` dropped.
///
/// The truncation criterion is enforced only when the field carries
/// frequencies beyond the cutoff.
pub fn semigroup_apply(grid: &KernelGrid, s: f64, t: f64, f: &FieldOnGrid) -> Result<FieldOnGrid> {
    ensure(f.dim() == grid.dim(), "f", || "field dimension mismatch".into())?;
    if max_frequency(f) > grid.cutoff() {
        grid.check_truncation(s, t)?;
    }
    let e = grid.exponent(s, t)?;
    Ok(f.apply_multiplier(multiplier_of(&e, grid.cutoff())))
}

/// `P^σ_{s,t} f` for a callable `f` sampled on an `M^d` periodic grid.
pub fn semigroup_apply_fn<F: Fn(&[f64]) -> f64>(
    grid: &KernelGrid,
    s: f64,
    t: f64,
    m: usize,
    period: u32,
    f: F,
) -> Result<FieldOnGrid> {
    let field = FieldOnGrid::from_fn(grid.dim(), m, period, f)?;
    semigroup_apply(grid, s, t, &field)
}

/// `‖∇^k g‖_∞` (Euclidean norm of the gradient for k = 1).
fn derivative_sup(g: &FieldOnGrid, k: usize) -> f64 {
    if k == 0 {
        g.max_abs()
    } else {
        let parts: Vec<FieldOnGrid> = (0..g.dim()).map(|a| g.derivative(a)).collect();
        vector_max_norm(&parts)
    }
}

/// Bounded test fields on the `2π`-torus: a smoothed step (product of
/// steps in d = 2) and a plane wave.
pub fn standard_test_fields(dim: usize, m: usize) -> Result<Vec<FieldOnGrid>> {
    let eps = 16.0 * 2.0 * PI / m as f64;
    let step = |x: f64| (x.sin() / eps).tanh();
    Ok(vec![
        FieldOnGrid::from_fn(dim, m, 1, |x| x.iter().map(|v| step(*v)).product())?,
        FieldOnGrid::from_fn(dim, m, 1, |x| if dim == 1 { (3.0 * x[0]).cos() } else { (x[0] + 2.0 * x[1]).cos() })?,
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct GradientReport {
    pub k: usize,
    /// `(t, Q(t))` with `Q(t) = t^{k/α} max_f ‖∇^k P_{0,t} f‖_∞ / ‖f‖_∞`.
    pub rows: Vec<(f64, f64)>,
    pub sup_q: f64,
    /// `Q` at the smallest time over the median of `Q`.
    pub small_over_median: f64,
    pub passed: bool,
}

pub fn gradient_bound_check(grid: &KernelGrid, t_ladder: &[f64], fields: &[FieldOnGrid], k: usize) -> Result<GradientReport> {
    ensure(k <= 1, "k", || format!("k ∈ {{0, 1}}, got {k}"))?;
    ensure(!t_ladder.is_empty() && !fields.is_empty(), "t_ladder", || "non-empty times and fields".into())?;
    ensure(t_ladder.iter().all(|t| *t > 0.0 && *t <= 1.0), "t_ladder", || "times in (0, 1]".into())?;
    let alpha = grid.alpha();
    let mut rows = Vec::with_capacity(t_ladder.len());
    for &t in t_ladder {
        let mut q = 0.0f64;
        for f in fields {
            let norm = f.max_abs();
            if norm == 0.0 {
                continue;
            }
            let g = semigroup_apply(grid, 0.0, t, f)?;
            q = q.max(t.powf(k as f64 / alpha) * derivative_sup(&g, k) / norm);
        }
        rows.push((t, q));
    }
    let sup_q = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut qs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    qs.sort_by(f64::total_cmp);
    let median = qs[qs.len() / 2];
    let smallest = rows.iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|r| r.1).unwrap_or(0.0);
    let small_over_median = if median > 0.0 { smallest / median } else { 0.0 };
    Ok(GradientReport {
        k,
        rows,
        sup_q,
        small_over_median,
        passed: sup_q <= C_GRAD && small_over_median <= 4.0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeIncrementRow {
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeIncrementReport {
    pub k: usize,
    pub u: f64,
    pub rows: Vec<TimeIncrementRow>,
    pub sup_ratio: f64,
    /// `‖∇^k ℒ_{σ(t)} P_{s,t} f‖_∞ / ((t−s)^{−(k+α)/α} ‖f‖_∞)`.
    pub generator_rows: Vec<TimeIncrementRow>,
    pub generator_sup: f64,
    pub passed: bool,
}

/// Matrix of the scaling piece active at time `t`.
fn matrix_at(grid: &KernelGrid, t: f64) -> Vec<f64> {
    let pieces = grid.scaling().pieces();
    pieces
        .iter()
        .find(|p| p.start <= t && t < p.end)
        .unwrap_or_else(|| pieces.last().expect("scaling has pieces"))
        .matrix
        .clone()
}

/// Ratio of `‖∇^k P_{u,t} f − ∇^k P_{u,s} f‖_∞` to
/// `‖f‖_∞ · min((s−u)^{−k/α}, (s−u)^{−(k+α)/α}(t−s))` over pairs `t ≥ s > u`,
/// plus the generator bound `‖∇^k ℒ P_{s,t} f‖ ≲ (t−s)^{−(k+α)/α}‖f‖` with
/// multiplier `ψ(σ_tᵀξ) e^{−E_{s,t}(ξ)}`.
pub fn time_increment_check(
    grid: &KernelGrid,
    u: f64,
    s_ladder: &[f64],
    t_ladder: &[f64],
    fields: &[FieldOnGrid],
    k: usize,
) -> Result<TimeIncrementReport> {
    ensure(k <= 1, "k", || format!("k ∈ {{0, 1}}, got {k}"))?;
    ensure(s_ladder.iter().all(|s| *s > u), "s_ladder", || format!("u < s required for every s (u = {u})"))?;
    ensure(u >= 0.0, "u", || format!("u ≥ 0, got {u}"))?;
    ensure(!fields.is_empty(), "fields", || "at least one field".into())?;
    let alpha = grid.alpha();
    let kf = k as f64;
    let mut rows = Vec::new();
    let mut generator_rows = Vec::new();
    for &s in s_ladder {
        let base: Vec<FieldOnGrid> = fields.iter().map(|f| semigroup_apply(grid, u, s, f)).collect::<Result<_>>()?;
        for &t in t_ladder.iter().filter(|t| **t >= s) {
            let mut lhs_ratio = 0.0f64;
            let mut lhs_max = 0.0f64;
            for (f, pb) in fields.iter().zip(&base) {
                let norm = f.max_abs();
                if norm == 0.0 {
                    continue;
                }
                let diff = if t == s {
                    0.0
                } else {
                    let pt = semigroup_apply(grid, u, t, f)?;
                    derivative_sup(&pt.sub(pb)?, k)
                };
                lhs_max = lhs_max.max(diff);
                lhs_ratio = lhs_ratio.max(diff / norm);
            }
            let bound = (s - u).powf(-kf / alpha).min((s - u).powf(-(kf + alpha) / alpha) * (t - s));
            rows.push(TimeIncrementRow {
                s,
                t,
                lhs: lhs_max,
                bound,
                ratio: if bound > 0.0 { lhs_ratio / bound } else { 0.0 },
            });
            if t > s {
                let e = grid.exponent(s, t)?;
                let m = matrix_at(grid, t);
                let symbol = grid.symbol();
                let cutoff = grid.cutoff();
                let mut ratio = 0.0f64;
                let mut lhs = 0.0f64;
                for f in fields {
                    let norm = f.max_abs();
                    if norm == 0.0 {
                        continue;
                    }
                    if max_frequency(f) > cutoff {
                        grid.check_truncation(s, t)?;
                    }
                    let g = f.apply_multiplier(|xi| {
                        let r2: f64 = xi.iter().map(|v| v * v).sum();
                        if r2 > cutoff * cutoff {
                            return Complex64::new(0.0, 0.0);
                        }
                        let mut b = [0.0; 2];
                        crate::stable_model::transpose_apply(&m, xi, &mut b[..xi.len()]);
                        Complex64::new(symbol.psi(&b[..xi.len()]) * (-e.eval(xi)).exp(), 0.0)
                    });
                    let v = derivative_sup(&g, k);
                    lhs = lhs.max(v);
                    ratio = ratio.max(v / norm);
                }
                let bound = (t - s).powf(-(kf + alpha) / alpha);
                generator_rows.push(TimeIncrementRow {
                    s,
                    t,
                    lhs,
                    bound,
                    ratio: ratio / bound,
                });
            }
        }
    }
    let sup_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let generator_sup = generator_rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(TimeIncrementReport {
        k,
        u,
        rows,
        sup_ratio,
        generator_rows,
        generator_sup,
        passed: sup_ratio <= C_TIME && generator_sup <= C_TIME,
    })
}

/// `max |e^{−E_{s,u}(ξ)} e^{−E_{u,t}(ξ)} − e^{−E_{s,t}(ξ)}|` over the given frequencies.
pub fn chapman_kolmogorov_residual(grid: &KernelGrid, s: f64, u: f64, t: f64, freqs: &[Vec<f64>]) -> Result<f64> {
    ensure(s < u && u < t, "u", || format!("s < u < t required, got {s}, {u}, {t}"))?;
    let (a, b, c) = (grid.exponent(s, u)?, grid.exponent(u, t)?, grid.exponent(s, t)?);
    Ok(freqs
        .iter()
        .map(|xi| ((-a.eval(xi)).exp() * (-b.eval(xi)).exp() - (-c.eval(xi)).exp()).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct CfDecay {
    /// Largest `c` with `|E e^{iξ·L_t}| ≤ e^{−ct|ξ|^α}` for all `ξ`.
    pub c: f64,
    pub checked: usize,
    pub violations: usize,
}

/// Decay constant of the characteristic function at time `t`, verified on
/// `|ξ| ∈ [1, radius_max]` (40 radii × 64 directions in d = 2).
pub fn cf_decay_constant(grid: &KernelGrid, t: f64, radius_max: f64) -> Result<CfDecay> {
    ensure(radius_max >= 1.0, "radius_max", || "radius_max ≥ 1".into())?;
    let e = grid.exponent(0.0, t)?;
    let c = e.min_unit() / t;
    let alpha = grid.alpha();
    let dirs: Vec<Vec<f64>> = if grid.dim() == 1 {
        vec![vec![1.0], vec![-1.0]]
    } else {
        (0..64)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 64.0;
                vec![a.cos(), a.sin()]
            })
            .collect()
    };
    let mut checked = 0;
    let mut violations = 0;
    for i in 0..40 {
        let r = radius_max.powf(i as f64 / 39.0);
        for u in &dirs {
            let xi: Vec<f64> = u.iter().map(|v| v * r).collect();
            let cf = (-e.eval(&xi)).exp();
            checked += 1;
            if cf > (-c * t * r.powf(alpha)).exp() * (1.0 + 1e-12) {
                violations += 1;
            }
        }
    }
    Ok(CfDecay { c, checked, violations })
}
