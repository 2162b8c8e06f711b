//! Densities `p^σ(s,t,·)` of `∫_s^t σ_r dL_r` by Fourier inversion, the
//! semigroup `P^σ_{s,t}` on periodic fields, and numerical checks of the
//! kernel estimates.
//!
//! The characteristic function is `exp(−E_{s,t}(ξ))` with
//! `E_{s,t}(ξ) = ∫_s^t ψ(σ_rᵀξ) dr`, α-homogeneous in `ξ`.

mod checks;
mod spatial;

use std::f64::consts::PI;

use crate::error::{ensure, Error, Result};
use crate::quadrature::{gauss_legendre, integrate_to_infinity, Tolerance};
use crate::stable_model::{dot, transpose_apply, Atom, SpectralMeasure, StableSpec, TimeScaling};

pub use checks::{
    cf_decay_constant, chapman_kolmogorov_residual, gradient_bound_check, semigroup_apply, semigroup_apply_fn,
    standard_test_fields, time_increment_check, CfDecay, GradientReport, TimeIncrementReport, C_GRAD, C_TIME,
};
pub use spatial::{
    block_moment_check, kernel_field, mass_check, moment_integral_check, BlockMomentReport, KernelField, MassReport,
    MomentIntegralReport, C_BLOCK,
};

/// Bound on the inversion error from truncating at the cutoff.
pub const TRUNCATION_TOL: f64 = 1e-10;
/// Gauss–Legendre order per panel.
const ORDER: usize = 16;
/// `exp(−46) ≈ 1e-20`: beyond this exponent the integrand is dropped.
const EXP_CUT: f64 = 46.0;

/// Symbol `ψ` of the driving noise.
#[derive(Debug, Clone, PartialEq)]
pub enum Symbol {
    Stable(StableSpec),
    /// `ψ(ξ) = coeff·|ξ|²`, admitted for machinery validation.
    Gaussian { dim: usize, coeff: f64 },
}

impl Symbol {
    /// Standard Cauchy symbol `|ξ|` in d = 1.
    pub fn cauchy() -> Result<Self> {
        let w = 1.0 / PI;
        let m = SpectralMeasure::atoms(vec![Atom { dir: vec![1.0], w }, Atom { dir: vec![-1.0], w }])?;
        Ok(Symbol::Stable(StableSpec::validation(1.0, m)?))
    }

    pub fn gaussian(dim: usize, coeff: f64) -> Result<Self> {
        ensure(coeff > 0.0, "coeff", || format!("coefficient must be positive, got {coeff}"))?;
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        Ok(Symbol::Gaussian { dim, coeff })
    }

    pub fn dim(&self) -> usize {
        match self {
            Symbol::Stable(s) => s.dim(),
            Symbol::Gaussian { dim, .. } => *dim,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            Symbol::Stable(s) => s.alpha(),
            Symbol::Gaussian { .. } => 2.0,
        }
    }

    #[inline]
    pub fn psi(&self, xi: &[f64]) -> f64 {
        match self {
            Symbol::Stable(s) => s.characteristic_exponent(xi),
            Symbol::Gaussian { coeff, .. } => coeff * dot(xi, xi),
        }
    }
}

/// `E_{s,t}` for a fixed time interval.
#[derive(Debug, Clone)]
pub struct Exponent<'a> {
    symbol: &'a Symbol,
    pieces: Vec<(f64, Vec<f64>)>,
}

impl Exponent<'_> {
    pub fn alpha(&self) -> f64 {
        self.symbol.alpha()
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    #[inline]
    pub fn eval(&self, xi: &[f64]) -> f64 {
        let mut buf = [0.0; 2];
        let b = &mut buf[..xi.len()];
        self.pieces
            .iter()
            .map(|(len, m)| {
                transpose_apply(m, xi, b);
                len * self.symbol.psi(b)
            })
            .sum()
    }

    /// Values on unit vectors at the given angles (d = 2).
    fn on_circle(&self, angles: &[f64]) -> Vec<f64> {
        angles.iter().map(|a| self.eval(&[a.cos(), a.sin()])).collect()
    }

    /// Angles in `[0, π)` where the exponent is not smooth (atomic symbols).
    fn kinks(&self) -> Vec<f64> {
        let mut out = Vec::new();
        if let Symbol::Stable(spec) = self.symbol {
            if let SpectralMeasure::Atoms { atoms } = spec.measure() {
                if self.dim() == 2 {
                    for (_, m) in &self.pieces {
                        for a in atoms {
                            // |θ·Mᵀξ| = |(Mθ)·ξ| vanishes for ξ ⊥ Mθ
                            let v = [m[0] * a.dir[0] + m[1] * a.dir[1], m[2] * a.dir[0] + m[3] * a.dir[1]];
                            let ang = (v[1].atan2(v[0]) + PI / 2.0).rem_euclid(PI);
                            out.push(ang);
                        }
                    }
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// `min_{|u|=1} E(u)`.
    pub fn min_unit(&self) -> f64 {
        match self.dim() {
            1 => self.eval(&[1.0]),
            _ => {
                let mut angles: Vec<f64> = (0..1440).map(|i| PI * i as f64 / 1440.0).collect();
                angles.extend(self.kinks());
                self.on_circle(&angles).into_iter().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Natural length scale `(mean_{|u|=1} E(u))^{1/α}` of the density.
    pub fn length_scale(&self) -> f64 {
        let mean = match self.dim() {
            1 => self.eval(&[1.0]),
            _ => {
                let angles: Vec<f64> = (0..256).map(|i| PI * (i as f64 + 0.5) / 256.0).collect();
                self.on_circle(&angles).iter().sum::<f64>() / 256.0
            }
        };
        mean.powf(1.0 / self.alpha())
    }

    /// `A` such that the Lévy measure of the time-integrated noise puts
    /// mass `A·R^{−α}/α` outside the ball of radius `R` (0 for Gaussian).
    pub fn tail_amplitude(&self) -> f64 {
        let Symbol::Stable(spec) = self.symbol else {
            return 0.0;
        };
        let alpha = spec.alpha();
        let d = self.dim();
        let mut buf = [0.0; 2];
        self.pieces
            .iter()
            .map(|(len, m)| {
                let moment = match spec.measure() {
                    SpectralMeasure::Atoms { atoms } => atoms
                        .iter()
                        .map(|a| {
                            crate::stable_model::matrix_apply(m, &a.dir, &mut buf[..d]);
                            a.w * dot(&buf[..d], &buf[..d]).powf(alpha / 2.0)
                        })
                        .sum::<f64>(),
                    SpectralMeasure::Uniform { mass, .. } => {
                        if d == 1 {
                            mass * m[0].abs().powf(alpha)
                        } else {
                            let k = 512;
                            (0..k)
                                .map(|i| {
                                    let a = 2.0 * PI * (i as f64 + 0.5) / k as f64;
                                    crate::stable_model::matrix_apply(m, &[a.cos(), a.sin()], &mut buf);
                                    dot(&buf, &buf).powf(alpha / 2.0)
                                })
                                .sum::<f64>()
                                * mass
                                / k as f64
                        }
                    }
                };
                len * moment
            })
            .sum()
    }
}

/// Inversion setup: symbol, time scaling, frequency cutoff `Ξ` and the
/// number of grid points per axis used for whole-space density grids.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    symbol: Symbol,
    scaling: TimeScaling,
    cutoff: f64,
    resolution: usize,
}

/// Horizon of the default identity scaling.
const UNBOUNDED_HORIZON: f64 = 1e12;

impl KernelGrid {
    pub fn new(symbol: Symbol, scaling: Option<TimeScaling>, cutoff: f64, resolution: usize) -> Result<Self> {
        let d = symbol.dim();
        ensure(d == 1 || d == 2, "dim", || format!("d ∈ {{1, 2}}, got {d}"))?;
        ensure(cutoff > 0.0, "cutoff", || format!("Ξ > 0, got {cutoff}"))?;
        ensure(resolution.is_power_of_two() && resolution >= 16, "resolution", || {
            format!("resolution must be a power of two ≥ 16, got {resolution}")
        })?;
        let cap = if d == 1 { 1 << 18 } else { 1 << 11 };
        ensure(resolution <= cap, "resolution", || format!("resolution ≤ {cap} in d = {d}"))?;
        let scaling = match scaling {
            Some(s) => {
                ensure(s.dim() == d, "scaling", || "scaling dimension mismatch".into())?;
                s
            }
            None => TimeScaling::identity(d, UNBOUNDED_HORIZON),
        };
        Ok(KernelGrid {
            symbol,
            scaling,
            cutoff,
            resolution,
        })
    }

    /// Grid whose cutoff meets the truncation criterion for every `t − s ≥ t_min`
    /// (intervals starting at 0).
    pub fn for_times(symbol: Symbol, scaling: Option<TimeScaling>, t_min: f64) -> Result<Self> {
        let res = if symbol.dim() == 1 { 1 << 16 } else { 1 << 10 };
        let probe = Self::new(symbol, scaling, 1.0, res)?;
        let xi = probe.required_cutoff(0.0, t_min)?;
        Ok(KernelGrid { cutoff: xi, ..probe })
    }

    pub fn symbol(&self) -> &Symbol {
        &self.symbol
    }

    pub fn scaling(&self) -> &TimeScaling {
        &self.scaling
    }

    pub fn dim(&self) -> usize {
        self.symbol.dim()
    }

    pub fn alpha(&self) -> f64 {
        self.symbol.alpha()
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn with_resolution(self, resolution: usize) -> Result<Self> {
        Self::new(self.symbol, Some(self.scaling), self.cutoff, resolution)
    }

    pub fn exponent(&self, s: f64, t: f64) -> Result<Exponent<'_>> {
        ensure(s >= 0.0 && s < t, "t", || format!("0 ≤ s < t required, got s = {s}, t = {t}"))?;
        let pieces = self.scaling.overlaps(s, t)?.into_iter().map(|(len, m)| (len, m.to_vec())).collect();
        Ok(Exponent {
            symbol: &self.symbol,
            pieces,
        })
    }

    /// `(2π)^{−d}|S^{d−1}| ∫_Ξ^∞ ρ^{d−1} e^{−E_min ρ^α} dρ`, a bound on the
    /// inversion error from discarding `|ξ| > Ξ`.
    pub fn truncation_error(&self, s: f64, t: f64, cutoff: f64) -> Result<f64> {
        let e = self.exponent(s, t)?;
        truncation_bound(e.min_unit(), e.alpha(), self.dim(), cutoff)
    }

    /// Smallest cutoff (up to 1%) meeting the truncation criterion.
    pub fn required_cutoff(&self, s: f64, t: f64) -> Result<f64> {
        let e = self.exponent(s, t)?;
        let (m, alpha, d) = (e.min_unit(), e.alpha(), self.dim());
        ensure(m > 0.0, "symbol", || "degenerate exponent: min over unit ξ is 0".into())?;
        let mut hi = (EXP_CUT / m).powf(1.0 / alpha).max(1e-300);
        while truncation_bound(m, alpha, d, hi)? >= TRUNCATION_TOL {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        while hi - lo > 0.005 * hi {
            let mid = 0.5 * (lo + hi);
            if truncation_bound(m, alpha, d, mid)? < TRUNCATION_TOL {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Errors with the required cutoff unless `Ξ` meets the criterion on `[s, t]`.
    pub fn check_truncation(&self, s: f64, t: f64) -> Result<()> {
        if self.truncation_error(s, t, self.cutoff)? < TRUNCATION_TOL {
            Ok(())
        } else {
            Err(Error::Truncation {
                cutoff: self.cutoff,
                required: self.required_cutoff(s, t)?,
            })
        }
    }

    /// `p^σ(s, t, x) = (2π)^{−d} ∫_{|ξ|≤Ξ} e^{−ix·ξ} e^{−E_{s,t}(ξ)} dξ` by
    /// composite Gauss–Legendre quadrature (polar coordinates in d = 2).
    pub fn density(&self, s: f64, t: f64, x: &[f64]) -> Result<f64> {
        ensure(x.len() == self.dim(), "x", || format!("x must have {} coordinates", self.dim()))?;
        self.check_truncation(s, t)?;
        let e = self.exponent(s, t)?;
        let alpha = e.alpha();
        let p = match self.dim() {
            1 => {
                let c = e.eval(&[1.0]);
                radial_integral(c, alpha, x[0].abs(), self.cutoff, 0) / PI
            }
            _ => {
                let r = dot(x, x).sqrt();
                let scale = e.length_scale();
                let (angles, weights) = angular_rule(&e.kinks(), r / scale);
                let prof = e.on_circle(&angles);
                let sum: f64 = angles
                    .iter()
                    .zip(&weights)
                    .zip(&prof)
                    .map(|((a, w), c)| {
                        let proj = (x[0] * a.cos() + x[1] * a.sin()).abs();
                        w * radial_integral(*c, alpha, proj, self.cutoff, 1)
                    })
                    .sum();
                sum / (2.0 * PI * PI)
            }
        };
        if p < -TRUNCATION_TOL {
            return Err(Error::Quadrature { estimate: p, error: p.abs() });
        }
        Ok(p.max(0.0))
    }
}

fn sphere_area(d: usize) -> f64 {
    if d == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

fn truncation_bound(m: f64, alpha: f64, d: usize, cutoff: f64) -> Result<f64> {
    if m <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let scale = m.powf(-1.0 / alpha);
    let tail = integrate_to_infinity(
        |v| {
            let r = cutoff + v;
            r.powi(d as i32 - 1) * (-m * r.powf(alpha)).exp()
        },
        0.0,
        scale,
        Tolerance::new(1e-30, 1e-8),
    )?
    .value;
    Ok(sphere_area(d) * tail / (2.0 * PI).powi(d as i32))
}

/// `∫_0^{min(Ξ, ρ_max)} ρ^{power} cos(aρ) e^{−cρ^α} dρ`, with geometric
/// panels towards 0 (the integrand has a `ρ^α` cusp there) and panels no
/// wider than half an oscillation.
fn radial_integral(c: f64, alpha: f64, a: f64, cutoff: f64, power: i32) -> f64 {
    let decay = c.powf(-1.0 / alpha);
    let top = cutoff.min((EXP_CUT / c).powf(1.0 / alpha));
    let width = (0.5 * decay).min(if a > 0.0 { PI / a } else { f64::INFINITY }).min(top);
    let (gx, gw) = gl16();
    let mut total = 0.0;
    let mut panel = |lo: f64, hi: f64| {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut s = 0.0;
        for (x, w) in gx.iter().zip(gw) {
            let r = mid + half * x;
            s += w * r.powi(power) * (a * r).cos() * (-c * r.powf(alpha)).exp();
        }
        total += half * s;
    };
    let mut hi = width;
    for _ in 0..48 {
        panel(0.5 * hi, hi);
        hi *= 0.5;
    }
    panel(0.0, hi);
    let n = ((top - width) / width).ceil().max(0.0) as usize;
    if n > 0 {
        let step = (top - width) / n as f64;
        for i in 0..n {
            panel(width + i as f64 * step, width + (i + 1) as f64 * step);
        }
    }
    total
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Composite rule on `[0, π)` split at the kink angles; more panels for
/// points far from the origin (`r_rel = |x|/length scale`).
fn angular_rule(kinks: &[f64], r_rel: f64) -> (Vec<f64>, Vec<f64>) {
    let mut cuts = vec![0.0];
    cuts.extend(kinks.iter().copied().filter(|k| *k > 1e-14 && *k < PI - 1e-14));
    cuts.push(PI);
    let per_radian = (8.0 * (1.0 + r_rel)).ceil();
    let (gx, gw) = gl16();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for w in cuts.windows(2) {
        let n = ((w[1] - w[0]) * per_radian).ceil().max(2.0) as usize;
        let h = (w[1] - w[0]) / n as f64;
        for p in 0..n {
            let mid = w[0] + (p as f64 + 0.5) * h;
            for (x, wt) in gx.iter().zip(gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * wt);
            }
        }
    }
    (nodes, weights)
}

/// Mass outside `[−R, R]` of the symmetric stable law with `ψ = c|ξ|^α` in
/// d = 1, from the large-`x` expansion
/// `p(x) = π^{−1} Σ_k (−1)^{k+1} Γ(αk+1)/k! sin(παk/2) c^k |x|^{−αk−1}`.
pub fn stable_tail_mass_1d(alpha: f64, c: f64, r: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 1..=terms {
        let kf = k as f64;
        fact *= kf;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign * libm::tgamma(alpha * kf) / fact * (PI * alpha * kf / 2.0).sin() * c.powf(kf) * r.powf(-alpha * kf);
    }
    2.0 * sum / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cauchy_at_origin() {
        let g = KernelGrid::for_times(Symbol::cauchy().unwrap(), None, 1.0).unwrap();
        assert!((g.density(0.0, 1.0, &[0.0]).unwrap() - 1.0 / PI).abs() < 1e-8);
        let x = 2.5;
        assert!((g.density(0.0, 1.0, &[x]).unwrap() - 1.0 / (PI * (1.0 + x * x))).abs() < 1e-8);
    }

    #[test]
    fn truncation_rejected_with_required_cutoff() {
        let g = KernelGrid::new(Symbol::cauchy().unwrap(), None, 5.0, 1024).unwrap();
        match g.density(0.0, 1.0, &[0.0]) {
            Err(Error::Truncation { required, .. }) => assert!(required > 20.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn cauchy_tail_series() {
        // P(|X| > R) = 1 − (2/π) atan R for the standard Cauchy law
        let r: f64 = 50.0;
        let want = 1.0 - 2.0 / PI * r.atan();
        assert!((stable_tail_mass_1d(1.0, 1.0, r, 12) - want).abs() < 1e-15);
    }
}
