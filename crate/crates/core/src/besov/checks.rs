//! Numerical checks of Bernstein and interpolation inequalities.

use serde::Serialize;

use super::field::{besov_norm, vector_max_norm, FieldOnGrid};
use super::partition::DyadicPartition;
use crate::error::{ensure, Result};

pub const C_BERNSTEIN: f64 = 8.0;
pub const C_INTERPOLATION: f64 = 16.0;

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinReport {
    pub k: u32,
    /// `(j, ‖∇^k R_j f‖_∞ / (2^{kj} ‖R_j f‖_∞))` for every non-empty block.
    pub ratios: Vec<(i32, f64)>,
    pub max_ratio: f64,
    pub passed: bool,
}

/// `∇^k` of a scalar field as its list of partial-derivative fields.
fn derivatives(f: &FieldOnGrid, k: u32) -> Vec<FieldOnGrid> {
    let d = f.dim();
    let first: Vec<FieldOnGrid> = (0..d).map(|a| f.derivative(a)).collect();
    if k == 1 {
        first
    } else {
        first.iter().flat_map(|g| (0..d).map(move |a| g.derivative(a))).collect()
    }
}

/// Ratios `‖∇^k R_j f‖_∞ / (2^{kj}‖R_j f‖_∞)` with the pointwise Euclidean
/// (Frobenius for k = 2) norm of the derivative tensor.
pub fn bernstein_check(field: &FieldOnGrid, partition: &DyadicPartition, k: u32) -> Result<BernsteinReport> {
    ensure(k == 1 || k == 2, "k", || format!("k ∈ {{1, 2}}, got {k}"))?;
    field.check_band_limited(partition)?;
    let scale = field.max_abs();
    let mut ratios = Vec::new();
    for j in -1..=field.max_block_level() {
        let rj = field.block(partition, j)?;
        let base = rj.max_abs();
        if base <= 1e-12 * scale.max(1e-300) {
            continue;
        }
        let grad = vector_max_norm(&derivatives(&rj, k));
        ratios.push((j, grad / ((k as f64 * j as f64).exp2() * base)));
    }
    let max_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(BernsteinReport {
        k,
        ratios,
        max_ratio,
        passed: max_ratio <= C_BERNSTEIN,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationReport {
    pub sup_norm: f64,
    pub theta: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub passed: bool,
}

/// `‖f‖_∞ ≤ C ‖f‖^θ_{B^{s₁}} ‖f‖^{1−θ}_{B^{s₂}}` with `θ = s₂/(s₂ − s₁)`.
pub fn interpolation_check(
    field: &FieldOnGrid,
    s1: f64,
    s2: f64,
    partition: &DyadicPartition,
) -> Result<InterpolationReport> {
    ensure(s1 < 0.0, "s1", || format!("s₁ < 0, got {s1}"))?;
    ensure(s2 > 0.0, "s2", || format!("s₂ > 0, got {s2}"))?;
    let sup_norm = field.max_abs();
    ensure(sup_norm > 0.0, "field", || "field must be non-zero".into())?;
    field.check_band_limited(partition)?;
    let theta = s2 / (s2 - s1);
    let lo = besov_norm(field, partition, s1)?;
    let hi = besov_norm(field, partition, s2)?;
    let rhs = lo.powf(theta) * hi.powf(1.0 - theta);
    let ratio = sup_norm / rhs;
    Ok(InterpolationReport {
        sup_norm,
        theta,
        rhs,
        ratio,
        passed: ratio <= C_INTERPOLATION,
    })
}

/// `max |R_i R_j f|` over pairs with `|i − j| ≥ 2`.
pub fn block_orthogonality_residual(field: &FieldOnGrid, partition: &DyadicPartition) -> Result<f64> {
    let top = field.max_block_level();
    let blocks: Vec<FieldOnGrid> = (-1..=top).map(|j| field.block(partition, j)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for i in -1..=top {
        for (jj, bj) in blocks.iter().enumerate() {
            let j = jj as i32 - 1;
            if (i - j).abs() >= 2 {
                worst = worst.max(bj.block(partition, i)?.max_abs());
            }
        }
    }
    Ok(worst)
}

/// `max |f − Σ_j R_j f|` over the representable levels.
pub fn reconstruction_residual(field: &FieldOnGrid, partition: &DyadicPartition) -> Result<f64> {
    field.check_band_limited(partition)?;
    let mut acc = field.scaled(0.0);
    for j in -1..=field.max_block_level() {
        acc = acc.add(&field.block(partition, j)?)?;
    }
    Ok(field.sub(&acc)?.max_abs())
}

/// Largest partition-of-unity residual over every lattice frequency of the grid
/// with `|ξ| ≤ 2^{j_max}`.
pub fn partition_residual_on_grid(field: &FieldOnGrid, partition: &DyadicPartition) -> f64 {
    let cap = (partition.j_max as f64).exp2();
    (0..field.values().len())
        .map(|i| field.frequency(i).iter().map(|x| x * x).sum::<f64>().sqrt())
        .filter(|&r| r <= cap)
        .map(|r| partition.unity_residual(r))
        .fold(0.0, f64::max)
}
