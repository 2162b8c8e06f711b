//! Bounded test functions and the weak-error lower bound on total variation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::law::EmpiricalLaw;
use crate::error::{ensure, Result};
use crate::reduce::par_sum_vec;

/// 95% two-sided normal quantile used for confidence half-widths.
pub const Z95: f64 = 1.959963984540054;

/// A test function of the standardized variable `z = (x − centre)/scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TestFunction {
    Cos { k: Vec<f64> },
    Sin { k: Vec<f64> },
    /// `tanh((v·z − c)/h)`.
    Tanh { v: Vec<f64>, c: f64, h: f64 },
    /// `exp(−|z − centre|²/(2w²))`.
    Bump { centre: Vec<f64>, w: f64 },
}

impl TestFunction {
    pub fn eval(&self, z: &[f64]) -> f64 {
        let dot = |a: &[f64]| a.iter().zip(z).map(|(p, q)| p * q).sum::<f64>();
        match self {
            TestFunction::Cos { k } => dot(k).cos(),
            TestFunction::Sin { k } => dot(k).sin(),
            TestFunction::Tanh { v, c, h } => ((dot(v) - c) / h).tanh(),
            TestFunction::Bump { centre, w } => {
                let r2: f64 = centre.iter().zip(z).map(|(p, q)| (p - q).powi(2)).sum();
                (-r2 / (2.0 * w * w)).exp()
            }
        }
    }

    pub fn label(&self) -> String {
        let v = |a: &[f64]| a.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
        match self {
            TestFunction::Cos { k } => format!("cos(k=[{}])", v(k)),
            TestFunction::Sin { k } => format!("sin(k=[{}])", v(k)),
            TestFunction::Tanh { v: dir, c, h } => format!("tanh(v=[{}],c={c:.3},h={h:.3})", v(dir)),
            TestFunction::Bump { centre, w } => format!("bump(c=[{}],w={w:.3})", v(centre)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestDictionary {
    pub dim: usize,
    pub centre: Vec<f64>,
    pub scale: Vec<f64>,
    pub functions: Vec<TestFunction>,
}

pub const DICT_RADII: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const MAX_FUNCTIONS: usize = 128;

impl TestDictionary {
    pub fn new(dim: usize, centre: Vec<f64>, scale: Vec<f64>, functions: Vec<TestFunction>) -> Result<Self> {
        ensure(dim == 1 || dim == 2, "dim", || format!("d ∈ {{1, 2}}, got {dim}"))?;
        ensure(centre.len() == dim && scale.len() == dim, "centre", || "one centre and scale per axis".into())?;
        ensure(scale.iter().all(|s| *s > 0.0 && s.is_finite()), "scale", || "scales must be positive".into())?;
        ensure(!functions.is_empty(), "functions", || "empty dictionary".into())?;
        ensure(functions.len() <= MAX_FUNCTIONS, "functions", || format!("at most {MAX_FUNCTIONS} functions"))?;
        Ok(TestDictionary {
            dim,
            centre,
            scale,
            functions,
        })
    }

    /// Standard dictionary: trigonometric pairs at `|k| ∈ {0.5, 1, 2, 4}`
    /// (8 directions on `[0, π)` in d = 2), 12 smoothed half-space
    /// indicators and 6 Gaussian bumps, in coordinates centred at the
    /// per-axis median and scaled by the interquartile range.
    pub fn standard(reference: &EmpiricalLaw) -> Result<Self> {
        ensure(!reference.is_empty(), "samples", || "reference law is empty".into())?;
        let d = reference.dim;
        let mut centre = Vec::with_capacity(d);
        let mut scale = Vec::with_capacity(d);
        for a in 0..d {
            let mut v: Vec<f64> = reference.axis(a).collect();
            let q1 = super::law::select_quantile(&mut v, 0.25);
            let med = super::law::select_quantile(&mut v, 0.5);
            let q3 = super::law::select_quantile(&mut v, 0.75);
            centre.push(med);
            scale.push(if q3 > q1 { q3 - q1 } else { 1.0 });
        }
        Self::new(d, centre, scale, Self::standard_functions(d)?)
    }

    pub fn standard_functions(d: usize) -> Result<Vec<TestFunction>> {
        ensure(d == 1 || d == 2, "dim", || format!("d ∈ {{1, 2}}, got {d}"))?;
        let mut f = Vec::new();
        let dirs: Vec<Vec<f64>> = if d == 1 {
            vec![vec![1.0]]
        } else {
            (0..8).map(|i| {
                let a = PI * i as f64 / 8.0;
                vec![a.cos(), a.sin()]
            })
            .collect()
        };
        for r in DICT_RADII {
            for u in &dirs {
                let k: Vec<f64> = u.iter().map(|c| r * c).collect();
                f.push(TestFunction::Cos { k: k.clone() });
                f.push(TestFunction::Sin { k });
            }
        }
        if d == 1 {
            for i in 0..12 {
                let c = -2.75 + 0.5 * i as f64;
                f.push(TestFunction::Tanh { v: vec![1.0], c, h: 0.25 });
            }
            for i in 0..6 {
                f.push(TestFunction::Bump { centre: vec![-2.5 + i as f64], w: 0.5 });
            }
        } else {
            for i in 0..4 {
                let a = PI * i as f64 / 4.0;
                for c in [-1.0, 0.0, 1.0] {
                    f.push(TestFunction::Tanh { v: vec![a.cos(), a.sin()], c, h: 0.25 });
                }
            }
            f.push(TestFunction::Bump { centre: vec![0.0, 0.0], w: 0.75 });
            for i in 0..5 {
                let a = 2.0 * PI * i as f64 / 5.0;
                f.push(TestFunction::Bump { centre: vec![1.5 * a.cos(), 1.5 * a.sin()], w: 0.75 });
            }
        }
        Ok(f)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn eval_all(&self, x: &[f64], z: &mut [f64], out: &mut [f64]) {
        for a in 0..self.dim {
            z[a] = (x[a] - self.centre[a]) / self.scale[a];
        }
        for (o, f) in out.iter_mut().zip(&self.functions) {
            *o = f.eval(z);
        }
    }

    /// Sums of `φ` and `φ²` over the sample, per function.
    fn moments(&self, law: &EmpiricalLaw) -> Vec<f64> {
        let k = self.len();
        let d = self.dim;
        par_sum_vec(law.len(), 2 * k, |i, acc| {
            let mut z = [0.0; 2];
            let mut v = [0.0; MAX_FUNCTIONS];
            self.eval_all(&law.samples[i * d..(i + 1) * d], &mut z, &mut v[..k]);
            for (j, f) in v[..k].iter().enumerate() {
                acc[j] = *f;
                acc[k + j] = f * f;
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakError {
    pub max_gap: f64,
    pub argmax: usize,
    pub label: String,
    /// 95% half-width for the gap of the maximizing function.
    pub ci: f64,
    /// `(gap, ci)` per dictionary function.
    pub gaps: Vec<(f64, f64)>,
}

fn finish(dict: &TestDictionary, gaps: Vec<(f64, f64)>) -> WeakError {
    let mut argmax = 0;
    for (i, g) in gaps.iter().enumerate() {
        if g.0 > gaps[argmax].0 {
            argmax = i;
        }
    }
    WeakError {
        max_gap: gaps[argmax].0,
        argmax,
        label: dict.functions[argmax].label(),
        ci: gaps[argmax].1,
        gaps,
    }
}

fn check(a: &EmpiricalLaw, b: &EmpiricalLaw, dict: &TestDictionary) -> Result<()> {
    ensure(!dict.is_empty(), "dictionary", || "empty dictionary".into())?;
    ensure(!a.is_empty() && !b.is_empty(), "samples", || "both laws need samples".into())?;
    ensure(a.dim == dict.dim && b.dim == dict.dim, "dim", || "dimension mismatch".into())
}

/// `max_φ |mean_a φ − mean_b φ|` for independent samples, with a CLT
/// confidence half-width for each function.
pub fn weak_error(a: &EmpiricalLaw, b: &EmpiricalLaw, dict: &TestDictionary) -> Result<WeakError> {
    check(a, b, dict)?;
    let k = dict.len();
    let (ma, mb) = (dict.moments(a), dict.moments(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let var = |s: f64, s2: f64, n: f64| ((s2 - s * s / n) / (n - 1.0).max(1.0)).max(0.0);
    let gaps = (0..k)
        .map(|j| {
            let gap = (ma[j] / na - mb[j] / nb).abs();
            let se = (var(ma[j], ma[k + j], na) / na + var(mb[j], mb[k + j], nb) / nb).sqrt();
            (gap, Z95 * se)
        })
        .collect();
    Ok(finish(dict, gaps))
}

/// As [`weak_error`] for coupled samples (row `i` of `a` and `b` share
/// their noise); the CI uses the variance of the paired differences.
pub fn weak_error_paired(a: &EmpiricalLaw, b: &EmpiricalLaw, dict: &TestDictionary) -> Result<WeakError> {
    check(a, b, dict)?;
    ensure(a.len() == b.len(), "samples", || "paired laws need equal sample counts".into())?;
    let k = dict.len();
    let d = dict.dim;
    let n = a.len();
    let sums = par_sum_vec(n, 2 * k, |i, acc| {
        let mut z = [0.0; 2];
        let mut fa = [0.0; MAX_FUNCTIONS];
        let mut fb = [0.0; MAX_FUNCTIONS];
        dict.eval_all(&a.samples[i * d..(i + 1) * d], &mut z, &mut fa[..k]);
        dict.eval_all(&b.samples[i * d..(i + 1) * d], &mut z, &mut fb[..k]);
        for j in 0..k {
            let diff = fa[j] - fb[j];
            acc[j] = diff;
            acc[k + j] = diff * diff;
        }
    });
    let nf = n as f64;
    let gaps = (0..k)
        .map(|j| {
            let mean = sums[j] / nf;
            let var = ((sums[k + j] - sums[j] * mean) / (nf - 1.0).max(1.0)).max(0.0);
            (mean.abs(), Z95 * (var / nf).sqrt())
        })
        .collect();
    Ok(finish(dict, gaps))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(n: usize, shift: f64) -> EmpiricalLaw {
        let v: Vec<f64> = (0..n).map(|i| ((i as f64 + 0.5) / n as f64 - 0.5) * 6.0 + shift).collect();
        EmpiricalLaw::new(v, 1, 1.0).unwrap()
    }

    #[test]
    fn sizes_and_sup_norms() {
        assert_eq!(TestDictionary::standard_functions(1).unwrap().len(), 8 + 12 + 6);
        assert_eq!(TestDictionary::standard_functions(2).unwrap().len(), 64 + 12 + 6);
        for f in TestDictionary::standard_functions(2).unwrap() {
            for i in 0..200 {
                let z = [(i as f64 * 0.37).sin() * 5.0, (i as f64 * 0.91).cos() * 5.0];
                assert!(f.eval(&z).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn identical_laws_have_zero_gap() {
        let a = law(1000, 0.0);
        let dict = TestDictionary::standard(&a).unwrap();
        assert_eq!(weak_error(&a, &a, &dict).unwrap().max_gap, 0.0);
        let w = weak_error_paired(&a, &a, &dict).unwrap();
        assert_eq!((w.max_gap, w.ci), (0.0, 0.0));
    }

    #[test]
    fn shift_is_detected() {
        let a = law(1000, 0.0);
        let b = law(1000, 1.0);
        let dict = TestDictionary::standard(&a).unwrap();
        assert!(weak_error(&a, &b, &dict).unwrap().max_gap > 0.2);
    }
}
