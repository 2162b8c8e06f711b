//! Log-log rate fitting and rank correlation.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Points must exceed this multiple of their CI half-width to enter a fit.
pub const NOISE_FLOOR: f64 = 3.0;
pub const MIN_FIT_POINTS: usize = 4;
/// Errors at or below this level are floating-point round-off, not signal.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
}

/// Weighted least squares `y ≈ intercept + slope·x`. The slope standard error
/// uses the weighted residual variance.
pub fn linear_fit(x: &[f64], y: &[f64], w: &[f64]) -> Result<LinearFit> {
    ensure(x.len() == y.len() && x.len() == w.len(), "points", || "length mismatch".into())?;
    ensure(x.len() >= 2, "points", || "at least two points".into())?;
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, w)| a * w).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, w)| w * (a - mx).powi(2)).sum();
    ensure(sxx > 0.0, "points", || "abscissae must not all coincide".into())?;
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, b), w)| w * (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if x.len() > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .zip(w)
            .map(|((a, b), w)| w * (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (x.len() - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_se,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub n: f64,
    pub error: f64,
    /// Half-width of the Monte Carlo confidence interval of `error`.
    pub ci: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub points: Vec<RatePoint>,
    /// Indices of points below the noise floor.
    pub excluded: Vec<usize>,
    pub fit: Option<LinearFit>,
}

impl RateFit {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    pub fn used(&self) -> usize {
        self.points.len() - self.excluded.len()
    }

    /// Consistent when `slope ≤ theory + slack` (the bound is one-sided).
    pub fn verdict_upper(&self, theory: f64, slack: f64) -> Verdict {
        match self.fit {
            None => Verdict::Inconclusive,
            Some(f) if f.slope <= theory + slack => Verdict::Consistent,
            Some(_) => Verdict::Inconsistent,
        }
    }

    /// Consistent when `|slope − theory| ≤ tol`.
    pub fn verdict_two_sided(&self, theory: f64, tol: f64) -> Verdict {
        match self.fit {
            None => Verdict::Inconclusive,
            Some(f) if (f.slope - theory).abs() <= tol => Verdict::Consistent,
            Some(_) => Verdict::Inconsistent,
        }
    }
}

/// Fits `log error` against `log n` over the points with `error > 3·ci`
/// and above the round-off floor,
/// weighting each by `1/ci²` (uniform weights if any CI is zero). Fewer than
/// four usable points leave the fit empty, which reads as inconclusive.
pub fn fit_rate(points: &[RatePoint]) -> Result<RateFit> {
    ensure(!points.is_empty(), "points", || "at least one point".into())?;
    for p in points {
        ensure(p.n > 0.0 && p.error >= 0.0 && p.ci >= 0.0, "points", || {
            format!("need n > 0, error ≥ 0, ci ≥ 0; got {p:?}")
        })?;
    }
    let excluded: Vec<usize> = points
        .iter()
        .enumerate()
        .filter(|(_, p)| !(p.error > NOISE_FLOOR * p.ci && p.error > ROUNDOFF_FLOOR))
        .map(|(i, _)| i)
        .collect();
    let used: Vec<&RatePoint> = points
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded.contains(i))
        .map(|(_, p)| p)
        .collect();
    let fit = if used.len() >= MIN_FIT_POINTS {
        let x: Vec<f64> = used.iter().map(|p| p.n.ln()).collect();
        let y: Vec<f64> = used.iter().map(|p| p.error.ln()).collect();
        let w: Vec<f64> = if used.iter().any(|p| p.ci == 0.0) {
            vec![1.0; used.len()]
        } else {
            used.iter().map(|p| 1.0 / (p.ci * p.ci)).collect()
        };
        Some(linear_fit(&x, &y, &w)?)
    } else {
        None
    };
    Ok(RateFit {
        points: points.to_vec(),
        excluded,
        fit,
    })
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = 0.5 * (i + j) as f64 + 1.0;
        for k in i..=j {
            r[idx[k]] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    ensure(a.len() == b.len() && a.len() >= 2, "samples", || "two equal-length series of length ≥ 2".into())?;
    let ra = ranks(a);
    let rb = ranks(b);
    let fit = pearson(&ra, &rb);
    fit.ok_or_else(|| Error::invalid("samples", "a series is constant"))
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<RatePoint> = [8.0, 16.0, 32.0, 64.0, 128.0]
            .iter()
            .map(|&n| RatePoint { n, error: 3.0 * f64::powf(n, -0.7), ci: 0.0 })
            .collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope().unwrap() + 0.7).abs() < 1e-12);
    }

    #[test]
    fn noise_floor_makes_inconclusive() {
        let pts: Vec<RatePoint> = (3..9).map(|k| RatePoint { n: f64::from(1u32 << k), error: 0.01, ci: 0.01 }).collect();
        let f = fit_rate(&pts).unwrap();
        assert!(f.fit.is_none());
        assert_eq!(f.verdict_upper(-0.3, 0.3), Verdict::Inconclusive);
    }

    #[test]
    fn spearman_monotone() {
        assert!((spearman(&[1.0, 2.0, 3.0, 4.0], &[10.0, 20.0, 25.0, 100.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }
}
