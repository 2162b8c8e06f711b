//! Symmetric α-stable noise: spectral measures, the characteristic exponent
//! and piecewise-constant time scalings.
//!
//! The Lévy measure is `ν(A) = ∫₀^∞ ∫_S 1_A(rθ) Σ(dθ) r^{-1-α} dr`. Its
//! characteristic exponent is
//!
//! ```text
//! ψ(ξ) = C_α ∫_S |θ·ξ|^α Σ(dθ),     C_α = ∫₀^∞ (1 − cos u) u^{-1-α} du,
//! ```
//!
//! and `exp(−tψ(ξ))` is the characteristic function of `L_t`. Everything
//! downstream (samplers, kernels) is normalised against this exponent.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, Tolerance};
use crate::rng::RngStream;

/// Unit-norm tolerance for atom directions and symmetry matching.
pub const ATOM_TOLERANCE: f64 = 1e-12;

/// Default threshold below which `g(θ₀)` counts as zero.
pub const ND_TOLERANCE: f64 = 1e-10;

/// Smallest admissible probe grid for the non-degeneracy search.
pub const MIN_PROBES: usize = 64;

/// A point mass of the spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub dir: Vec<f64>,
    pub w: f64,
}

/// The finite measure Σ on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase", try_from = "RawMeasure")]
pub enum SpectralMeasure {
    /// Rotation-invariant measure of the given total mass.
    Uniform { dim: usize, mass: f64 },
    /// Finitely many symmetric atoms.
    Atoms { atoms: Vec<Atom> },
}

#[derive(Deserialize)]
#[serde(tag = "variant", rename_all = "lowercase")]
enum RawMeasure {
    Uniform { dim: usize, mass: f64 },
    Atoms { atoms: Vec<Atom> },
}

impl TryFrom<RawMeasure> for SpectralMeasure {
    type Error = Error;

    fn try_from(raw: RawMeasure) -> Result<Self> {
        match raw {
            RawMeasure::Uniform { dim, mass } => SpectralMeasure::uniform(dim, mass),
            RawMeasure::Atoms { atoms } => SpectralMeasure::atoms(atoms),
        }
    }
}

impl SpectralMeasure {
    pub fn uniform(dim: usize, mass: f64) -> Result<Self> {
        ensure(dim >= 1, "dim", || "dimension must be at least 1".into())?;
        ensure(mass.is_finite() && mass > 0.0, "mass", || format!("0 < mass < ∞, got {mass}"))?;
        Ok(SpectralMeasure::Uniform { dim, mass })
    }

    /// Finite atomic measure; must be symmetric with unit directions.
    pub fn atoms(atoms: Vec<Atom>) -> Result<Self> {
        ensure(!atoms.is_empty(), "atoms", || "at least one atom required".into())?;
        let dim = atoms[0].dir.len();
        ensure(dim >= 1, "atoms", || "atom directions must be non-empty".into())?;
        for a in &atoms {
            ensure(a.dir.len() == dim, "atoms", || "all atoms must share one dimension".into())?;
            let norm = a.dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            ensure((norm - 1.0).abs() <= ATOM_TOLERANCE, "atoms", || {
                format!("|θ| = 1 within {ATOM_TOLERANCE:e}, got |θ| = {norm}")
            })?;
            ensure(a.w.is_finite() && a.w > 0.0, "atoms", || format!("weight > 0, got {}", a.w))?;
        }
        for a in &atoms {
            let has_mirror = atoms.iter().any(|b| {
                (a.w - b.w).abs() <= ATOM_TOLERANCE
                    && a.dir.iter().zip(&b.dir).all(|(x, y)| (x + y).abs() <= ATOM_TOLERANCE)
            });
            ensure(has_mirror, "atoms", || {
                format!("Σ must be symmetric: no mirror atom (−θ, w) for θ = {:?}, w = {}", a.dir, a.w)
            })?;
        }
        Ok(SpectralMeasure::Atoms { atoms })
    }

    /// Symmetric atoms `(±θ, w)` built from one representative per pair.
    pub fn symmetric_pairs(pairs: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(2 * pairs.len());
        for (dir, w) in pairs {
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            ensure(norm > 0.0, "atoms", || "direction must be non-zero".into())?;
            let unit: Vec<f64> = dir.iter().map(|x| x / norm).collect();
            atoms.push(Atom { dir: unit.iter().map(|x| -x).collect(), w: *w });
            atoms.push(Atom { dir: unit, w: *w });
        }
        Self::atoms(atoms)
    }

    /// Σ = Σᵢ w (δ_{eᵢ} + δ_{−eᵢ}): independent one-dimensional components.
    pub fn cylindrical(dim: usize, weight: f64) -> Result<Self> {
        let pairs: Vec<_> = (0..dim)
            .map(|i| {
                let mut e = vec![0.0; dim];
                e[i] = 1.0;
                (e, weight)
            })
            .collect();
        Self::symmetric_pairs(&pairs)
    }

    pub fn dim(&self) -> usize {
        match self {
            SpectralMeasure::Uniform { dim, .. } => *dim,
            SpectralMeasure::Atoms { atoms } => atoms[0].dir.len(),
        }
    }

    /// Σ(S^{d-1}).
    pub fn total_mass(&self) -> f64 {
        match self {
            SpectralMeasure::Uniform { mass, .. } => *mass,
            SpectralMeasure::Atoms { atoms } => atoms.iter().map(|a| a.w).sum(),
        }
    }

    /// One representative `(θ, w)` per symmetric pair.
    pub fn pair_representatives(&self) -> Vec<(Vec<f64>, f64)> {
        let SpectralMeasure::Atoms { atoms } = self else {
            return Vec::new();
        };
        let mut used = vec![false; atoms.len()];
        let mut reps = Vec::new();
        for i in 0..atoms.len() {
            if used[i] {
                continue;
            }
            used[i] = true;
            if let Some(j) = (0..atoms.len()).find(|&j| {
                !used[j]
                    && (atoms[i].w - atoms[j].w).abs() <= ATOM_TOLERANCE
                    && atoms[i].dir.iter().zip(&atoms[j].dir).all(|(x, y)| (x + y).abs() <= ATOM_TOLERANCE)
            }) {
                used[j] = true;
            }
            reps.push((atoms[i].dir.clone(), atoms[i].w));
        }
        reps
    }

    /// `g(θ₀) = ∫ |θ·θ₀| Σ(dθ)`.
    pub fn projection_mass(&self, theta0: &[f64]) -> f64 {
        match self {
            SpectralMeasure::Uniform { dim, mass } => mass * sphere_abs_moment(*dim, 1.0),
            SpectralMeasure::Atoms { atoms } => atoms.iter().map(|a| a.w * dot(&a.dir, theta0).abs()).sum(),
        }
    }
}

/// Outcome of the non-degeneracy test.
#[derive(Debug, Clone, PartialEq)]
pub enum Nondegeneracy {
    NonDegenerate { min_value: f64 },
    Degenerate { witness: Vec<f64> },
}

impl Nondegeneracy {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, Nondegeneracy::NonDegenerate { .. })
    }
}

/// Minimises `g(θ₀) = ∫|θ·θ₀|Σ(dθ)` over the sphere.
///
/// Fibonacci-sphere probe grid (equally spaced angles in d = 2) followed by
/// golden-section refinement along great circles through the best probe.
pub fn check_nondegeneracy(measure: &SpectralMeasure, tolerance: f64, probe_count: usize) -> Result<Nondegeneracy> {
    ensure(probe_count >= MIN_PROBES, "probe_count", || {
        format!("probe_count ≥ {MIN_PROBES}, got {probe_count}")
    })?;
    ensure(tolerance > 0.0, "tolerance", || "tolerance > 0".into())?;
    if let SpectralMeasure::Atoms { atoms } = measure {
        // re-validate symmetry in case the value was built by hand
        SpectralMeasure::atoms(atoms.clone())?;
    }
    let d = measure.dim();
    if let SpectralMeasure::Uniform { .. } = measure {
        let mut e1 = vec![0.0; d];
        e1[0] = 1.0;
        let v = measure.projection_mass(&e1);
        return Ok(if v > tolerance {
            Nondegeneracy::NonDegenerate { min_value: v }
        } else {
            Nondegeneracy::Degenerate { witness: e1 }
        });
    }

    let g = |th: &[f64]| measure.projection_mass(th);
    let probes = sphere_probes(d, probe_count);
    let (mut best, mut best_val) = probes
        .iter()
        .map(|p| (p.clone(), g(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("probe grid is non-empty");

    if d >= 2 {
        let cell = match d {
            2 => PI / probe_count as f64,
            3 => (4.0 * PI / probe_count as f64).sqrt(),
            _ => 0.5,
        };
        for _sweep in 0..2 {
            for v in tangent_basis(&best) {
                let along = |tau: f64| -> Vec<f64> {
                    let mut p: Vec<f64> = best.iter().zip(&v).map(|(b, t)| tau.cos() * b + tau.sin() * t).collect();
                    normalize(&mut p);
                    p
                };
                let tau = golden_section_min(|tau| g(&along(tau)), -cell, cell, 20);
                let cand = along(tau);
                let val = g(&cand);
                if val < best_val {
                    best = cand;
                    best_val = val;
                }
            }
        }
    }

    if best_val > tolerance {
        Ok(Nondegeneracy::NonDegenerate { min_value: best_val })
    } else {
        canonicalize_sign(&mut best);
        Ok(Nondegeneracy::Degenerate { witness: best })
    }
}

fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, steps: usize) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..steps {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    // the midpoint candidate never beats 0 when the bracket collapses on it
    let mid = 0.5 * (a + b);
    [(0.0, f(0.0)), (c, fc), (d, fd), (mid, f(mid))]
        .into_iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|x| x.0)
        .unwrap_or(0.0)
}

/// Deterministic probe directions on the half-sphere (g is even).
fn sphere_probes(d: usize, count: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0]],
        2 => (0..count)
            .map(|i| {
                let phi = PI * i as f64 / count as f64;
                vec![phi.cos(), phi.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|i| {
                    let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let phi = golden * i as f64;
                    vec![r * phi.cos(), r * phi.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut s = RngStream::new(0x5EED_5EED, d as u64);
            (0..count)
                .map(|_| {
                    let mut v: Vec<f64> = (0..d).map(|_| s.standard_normal()).collect();
                    normalize(&mut v);
                    v
                })
                .collect()
        }
    }
}

/// Orthonormal basis of the tangent space at `p` (Gram–Schmidt on e₁..e_d).
fn tangent_basis(p: &[f64]) -> Vec<Vec<f64>> {
    let d = p.len();
    let mut basis: Vec<Vec<f64>> = vec![p.to_vec()];
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for (x, y) in e.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-8 {
            e.iter_mut().for_each(|x| *x /= n);
            basis.push(e);
        }
        if basis.len() == d {
            break;
        }
    }
    basis.remove(0);
    basis
}

fn canonicalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

/// `E|θ₁|^p` for θ uniform on S^{d-1}.
///
/// Computed by quadrature in the polar angle: the density of `θ₁ = sin φ` is
/// proportional to `cos^{d-2} φ` on `[-π/2, π/2]`.
pub fn sphere_abs_moment(dim: usize, p: f64) -> f64 {
    if dim == 1 {
        return 1.0;
    }
    let tol = Tolerance::new(1e-15, 1e-13);
    let k = (dim - 2) as i32;
    let num = integrate(|phi: f64| phi.sin().powf(p) * phi.cos().powi(k), 0.0, FRAC_PI_2, tol)
        .expect("smooth integrand on a bounded interval")
        .value;
    let den = integrate(|phi: f64| phi.cos().powi(k), 0.0, FRAC_PI_2, tol)
        .expect("smooth integrand on a bounded interval")
        .value;
    num / den
}

/// Range of stability indices admitted by [`radial_constant`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaDomain {
    /// α ∈ (1, 2): the process model.
    Model,
    /// α ∈ (0, 2): closed-form kernel validation only.
    Validation,
}

/// `C_α = ∫₀^∞ (1 − cos u) u^{-1-α} du`.
///
/// On `[0, 1]` the leading `u²/2` of `1 − cos u` is integrated exactly and the
/// remainder by quadrature; on `[1, ∞)` the oscillatory part is integrated
/// period by period up to `U = 200π` and closed with a two-term
/// integration-by-parts tail.
pub fn radial_constant(alpha: f64, domain: AlphaDomain) -> Result<f64> {
    match domain {
        AlphaDomain::Model => ensure(alpha > 1.0 && alpha < 2.0, "alpha", || format!("1 < α < 2, got {alpha}"))?,
        AlphaDomain::Validation => {
            ensure(alpha > 0.0 && alpha < 2.0, "alpha", || format!("0 < α < 2, got {alpha}"))?
        }
    }
    let tol = Tolerance::new(1e-16, 1e-13);
    // 1 − cos u − u²/2, accurate for small u
    let remainder = |u: f64| -> f64 {
        if u < 0.1 {
            let u2 = u * u;
            -u2 * u2 / 24.0 * (1.0 - u2 / 30.0 * (1.0 - u2 / 56.0 * (1.0 - u2 / 90.0)))
        } else {
            2.0 * (0.5 * u).sin().powi(2) - 0.5 * u * u
        }
    };
    let near = integrate(|u| remainder(u) * u.powf(-1.0 - alpha), 0.0, 1.0, tol)?.value + 0.5 / (2.0 - alpha);

    let periods = 100usize;
    let mut osc = integrate(|u: f64| u.cos() * u.powf(-1.0 - alpha), 1.0, 2.0 * PI, tol)?.value;
    for k in 1..periods {
        let a = 2.0 * PI * k as f64;
        osc += integrate(|u: f64| u.cos() * u.powf(-1.0 - alpha), a, a + 2.0 * PI, tol)?.value;
    }
    let big_u = 2.0 * PI * periods as f64;
    let a = 1.0 + alpha;
    osc += a * big_u.powf(-a - 1.0) - a * (a + 1.0) * (a + 2.0) * big_u.powf(-a - 3.0);

    Ok(near + 1.0 / alpha - osc)
}

/// Stability index plus spectral measure, with cached normalisations.
#[derive(Debug, Clone, PartialEq)]
pub struct StableSpec {
    alpha: f64,
    measure: SpectralMeasure,
    c_alpha: f64,
    /// `E|θ₁|^α` under the normalised uniform measure (Uniform only).
    sphere_moment: f64,
}

impl StableSpec {
    /// Model spec, α ∈ (1, 2).
    pub fn new(alpha: f64, measure: SpectralMeasure) -> Result<Self> {
        Self::with_domain(alpha, measure, AlphaDomain::Model)
    }

    /// Spec admitting α ∈ (0, 2), for kernel machinery validation.
    pub fn validation(alpha: f64, measure: SpectralMeasure) -> Result<Self> {
        Self::with_domain(alpha, measure, AlphaDomain::Validation)
    }

    fn with_domain(alpha: f64, measure: SpectralMeasure, domain: AlphaDomain) -> Result<Self> {
        let c_alpha = radial_constant(alpha, domain)?;
        let sphere_moment = match &measure {
            SpectralMeasure::Uniform { dim, .. } => sphere_abs_moment(*dim, alpha),
            SpectralMeasure::Atoms { .. } => 0.0,
        };
        Ok(StableSpec {
            alpha,
            measure,
            c_alpha,
            sphere_moment,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn measure(&self) -> &SpectralMeasure {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.measure.dim()
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    /// `ψ(ξ) = C_α ∫|θ·ξ|^α Σ(dθ)`; `exp(−ψ)` is the characteristic function of `L₁`.
    pub fn characteristic_exponent(&self, xi: &[f64]) -> f64 {
        match &self.measure {
            SpectralMeasure::Uniform { mass, .. } => {
                let r2 = dot(xi, xi);
                if r2 == 0.0 {
                    0.0
                } else {
                    self.c_alpha * mass * self.sphere_moment * r2.powf(0.5 * self.alpha)
                }
            }
            SpectralMeasure::Atoms { atoms } => {
                self.c_alpha * atoms.iter().map(|a| a.w * dot(&a.dir, xi).abs().powf(self.alpha)).sum::<f64>()
            }
        }
    }

    /// `ψ(ξ) / |ξ|^α` for the uniform measure (direction independent).
    pub fn isotropic_coefficient(&self) -> Option<f64> {
        match &self.measure {
            SpectralMeasure::Uniform { mass, .. } => Some(self.c_alpha * mass * self.sphere_moment),
            SpectralMeasure::Atoms { .. } => None,
        }
    }

    pub fn nondegeneracy(&self) -> Result<Nondegeneracy> {
        check_nondegeneracy(&self.measure, ND_TOLERANCE, 4 * MIN_PROBES)
    }
}

/// `(∫_{|z|≤1} |z|^{γ₂} ν(dz), ∫_{|z|>1} |z|^{γ₁} ν(dz))` for `γ₁ < α < γ₂`.
///
/// Both integrals factor into Σ(S) times a radial integral that does not
/// depend on the direction; the radial integrals are evaluated by quadrature
/// in the logarithmic variable.
pub fn levy_moment_check(spec: &StableSpec, gamma1: f64, gamma2: f64) -> Result<(f64, f64)> {
    let alpha = spec.alpha();
    ensure(gamma1 >= 0.0 && gamma1 < alpha, "gamma1", || {
        format!("0 ≤ γ₁ < α = {alpha}, got γ₁ = {gamma1}")
    })?;
    ensure(gamma2 > alpha, "gamma2", || format!("γ₂ > α = {alpha}, got γ₂ = {gamma2}"))?;
    let tol = Tolerance::new(1e-300, 1e-12);
    // r = e^{-s}: ∫₀¹ r^{γ₂-1-α} dr = ∫₀^∞ e^{-(γ₂-α)s} ds
    let inner_rate = gamma2 - alpha;
    let inner = integrate_to_infinity(|s| (-inner_rate * s).exp(), 0.0, 1.0, tol)?.value;
    // r = e^{s}: ∫₁^∞ r^{γ₁-1-α} dr = ∫₀^∞ e^{-(α-γ₁)s} ds
    let outer_rate = alpha - gamma1;
    let outer = integrate_to_infinity(|s| (-outer_rate * s).exp(), 0.0, 1.0, tol)?.value;
    let mass = spec.measure().total_mass();
    Ok((mass * inner, mass * outer))
}

/// One constant piece `σ(t) = M` on `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPiece {
    pub start: f64,
    pub end: f64,
    /// Row-major `d × d`.
    pub matrix: Vec<f64>,
}

/// Piecewise-constant matrix-valued time scaling with
/// `κ₀⁻¹|ξ| ≤ |σ(t)ξ| ≤ κ₀|ξ|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeScaling {
    dim: usize,
    pieces: Vec<ScalingPiece>,
    kappa0: f64,
}

impl TimeScaling {
    pub fn new(dim: usize, pieces: Vec<ScalingPiece>, kappa0: f64) -> Result<Self> {
        ensure(kappa0 > 1.0, "kappa0", || format!("κ₀ > 1, got {kappa0}"))?;
        ensure(!pieces.is_empty(), "pieces", || "at least one piece".into())?;
        ensure(pieces[0].start == 0.0, "pieces", || "first piece must start at 0".into())?;
        for w in pieces.windows(2) {
            ensure(w[0].end == w[1].start, "pieces", || {
                format!("pieces must be contiguous: gap or overlap at {} / {}", w[0].end, w[1].start)
            })?;
        }
        for p in &pieces {
            ensure(p.end > p.start, "pieces", || format!("empty interval [{}, {})", p.start, p.end))?;
            ensure(p.matrix.len() == dim * dim, "matrix", || format!("matrix must be {dim}×{dim}"))?;
            let sv = DMatrix::from_row_slice(dim, dim, &p.matrix).singular_values();
            let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &s| (l.min(s), h.max(s)));
            ensure(lo >= 1.0 / kappa0 && hi <= kappa0, "matrix", || {
                format!("singular values must lie in [κ₀⁻¹, κ₀] = [{}, {kappa0}], got [{lo}, {hi}]", 1.0 / kappa0)
            })?;
        }
        Ok(TimeScaling { dim, pieces, kappa0 })
    }

    /// `σ ≡ I` on `[0, horizon)`.
    pub fn identity(dim: usize, horizon: f64) -> Self {
        Self::constant(dim, horizon, &identity_matrix(dim), 2.0).expect("identity satisfies (H0)")
    }

    /// `σ ≡ M` on `[0, horizon)`.
    pub fn constant(dim: usize, horizon: f64, matrix: &[f64], kappa0: f64) -> Result<Self> {
        Self::new(
            dim,
            vec![ScalingPiece {
                start: 0.0,
                end: horizon,
                matrix: matrix.to_vec(),
            }],
            kappa0,
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kappa0(&self) -> f64 {
        self.kappa0
    }

    pub fn horizon(&self) -> f64 {
        self.pieces.last().map(|p| p.end).unwrap_or(0.0)
    }

    pub fn pieces(&self) -> &[ScalingPiece] {
        &self.pieces
    }

    /// `(length, matrix)` for each piece intersected with `[s, t]`.
    pub fn overlaps(&self, s: f64, t: f64) -> Result<Vec<(f64, &[f64])>> {
        ensure(s < t, "s", || format!("s < t required, got s = {s}, t = {t}"))?;
        ensure(s >= 0.0 && t <= self.horizon(), "t", || {
            format!("[s, t] ⊂ [0, {}], got [{s}, {t}]", self.horizon())
        })?;
        Ok(self
            .pieces
            .iter()
            .filter_map(|p| {
                let lo = p.start.max(s);
                let hi = p.end.min(t);
                (hi > lo).then_some((hi - lo, p.matrix.as_slice()))
            })
            .collect())
    }

    /// `∫_s^t ψ(σ_rᵀ ξ) dr` for an arbitrary symbol `psi`.
    pub fn integrated_exponent<F: Fn(&[f64]) -> f64>(&self, psi: F, s: f64, t: f64, xi: &[f64]) -> Result<f64> {
        let mut buf = vec![0.0; self.dim];
        Ok(self
            .overlaps(s, t)?
            .into_iter()
            .map(|(len, m)| {
                transpose_apply(m, xi, &mut buf);
                len * psi(&buf)
            })
            .sum())
    }
}

pub fn identity_matrix(dim: usize) -> Vec<f64> {
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        m[i * dim + i] = 1.0;
    }
    m
}

/// `out = Mᵀ ξ` for row-major square `M`.
pub fn transpose_apply(m: &[f64], xi: &[f64], out: &mut [f64]) {
    let d = xi.len();
    for j in 0..d {
        out[j] = (0..d).map(|i| m[i * d + j] * xi[i]).sum();
    }
}

/// `out = M v` for row-major square `M`.
pub fn matrix_apply(m: &[f64], v: &[f64], out: &mut [f64]) {
    let d = v.len();
    for i in 0..d {
        out[i] = (0..d).map(|j| m[i * d + j] * v[j]).sum();
    }
}
