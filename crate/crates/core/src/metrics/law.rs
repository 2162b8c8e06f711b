//! Empirical laws and the histogram total-variation estimator.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};

/// Lower and upper pooled quantiles spanning the histogram box.
pub const CLIP_QUANTILES: (f64, f64) = (0.001, 0.999);

/// Counts on a rectangular grid plus one overflow cell per axis side.
///
/// A sample outside the box is assigned to the overflow cell of the first
/// axis on which it is clipped (`2·axis` low, `2·axis + 1` high).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<Vec<f64>>,
    /// Row-major over axes, axis 0 slowest.
    pub counts: Vec<u64>,
    pub outside: Vec<u64>,
}

impl Histogram {
    pub fn with_edges(samples: &[f64], dim: usize, edges: Vec<Vec<f64>>) -> Result<Self> {
        ensure(edges.len() == dim, "edges", || format!("one edge vector per axis ({dim})"))?;
        for e in &edges {
            ensure(e.len() >= 2 && e.windows(2).all(|w| w[0] < w[1]), "edges", || {
                "at least two strictly increasing edges per axis".into()
            })?;
        }
        let cells: usize = edges.iter().map(|e| e.len() - 1).product();
        let mut counts = vec![0u64; cells];
        let mut outside = vec![0u64; 2 * dim];
        'rows: for row in samples.chunks_exact(dim) {
            let mut flat = 0;
            for (axis, (&x, e)) in row.iter().zip(&edges).enumerate() {
                let nb = e.len() - 1;
                if x < e[0] {
                    outside[2 * axis] += 1;
                    continue 'rows;
                }
                if x > e[nb] || x.is_nan() {
                    outside[2 * axis + 1] += 1;
                    continue 'rows;
                }
                let bin = e.partition_point(|&v| v <= x).saturating_sub(1).min(nb - 1);
                flat = flat * nb + bin;
            }
            counts[flat] += 1;
        }
        Ok(Histogram { edges, counts, outside })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.outside.iter().sum::<u64>()
    }

    pub fn clipped(&self) -> u64 {
        self.outside.iter().sum()
    }
}

/// An `N × d` sample (row-major) observed at time `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub samples: Vec<f64>,
    pub dim: usize,
    pub time: f64,
    /// Content hash of the generating configuration.
    pub provenance: Option<String>,
    pub histogram: Option<Histogram>,
}

impl EmpiricalLaw {
    pub fn new(samples: Vec<f64>, dim: usize, time: f64) -> Result<Self> {
        ensure(dim >= 1 && samples.len() % dim == 0, "samples", || {
            format!("length {} is not a multiple of d = {dim}", samples.len())
        })?;
        Ok(EmpiricalLaw {
            samples,
            dim,
            time,
            provenance: None,
            histogram: None,
        })
    }

    pub fn with_provenance(mut self, hash: String) -> Self {
        self.provenance = Some(hash);
        self
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn axis(&self, a: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().skip(a).step_by(self.dim).copied()
    }

    /// Attaches a histogram on the given edges.
    pub fn histogram_on(&mut self, edges: Vec<Vec<f64>>) -> Result<&Histogram> {
        let h = Histogram::with_edges(&self.samples, self.dim, edges)?;
        Ok(self.histogram.insert(h))
    }

    /// Empirical quantile `q` of axis `a` (nearest-rank on the sorted sample).
    pub fn quantile(&self, a: usize, q: f64) -> f64 {
        let mut v: Vec<f64> = self.axis(a).collect();
        select_quantile(&mut v, q)
    }
}

pub(crate) fn select_quantile(v: &mut [f64], q: f64) -> f64 {
    let k = ((v.len() - 1) as f64 * q).round() as usize;
    let (_, x, _) = v.select_nth_unstable_by(k, f64::total_cmp);
    *x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    /// `½ Σ |p̂ − q̂|` over box cells and overflow cells.
    pub tv: f64,
    /// `½ Σ |p̂ − q̂|` over box cells plus half the total clipped mass; an
    /// upper bound on the contribution of the clipped region.
    pub upper: f64,
    pub clipped_a: f64,
    pub clipped_b: f64,
}

/// Histogram estimate of the total variation distance.
///
/// Both samples share `bins` equal-width bins per axis spanning the pooled
/// 0.1%–99.9% quantile box; clipped samples fall into per-side overflow cells
/// and their masses are reported separately.
pub fn tv_histogram(a: &EmpiricalLaw, b: &EmpiricalLaw, bins: usize) -> Result<TvEstimate> {
    ensure(!a.is_empty() && !b.is_empty(), "samples", || "both laws need samples".into())?;
    ensure(a.dim == b.dim, "dim", || format!("dimension mismatch {} vs {}", a.dim, b.dim))?;
    ensure(bins >= 1, "bins", || "at least one bin".into())?;
    let d = a.dim;
    let edges: Vec<Vec<f64>> = (0..d)
        .map(|axis| {
            let mut pooled: Vec<f64> = a.axis(axis).chain(b.axis(axis)).filter(|x| x.is_finite()).collect();
            let lo = select_quantile(&mut pooled, CLIP_QUANTILES.0);
            let mut hi = select_quantile(&mut pooled, CLIP_QUANTILES.1);
            if hi <= lo {
                hi = lo + 1.0;
            }
            (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect()
        })
        .collect();
    let ha = Histogram::with_edges(&a.samples, d, edges.clone())?;
    let hb = Histogram::with_edges(&b.samples, d, edges)?;
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let half_l1 = |p: &[u64], q: &[u64]| -> f64 {
        0.5 * p.iter().zip(q).map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs()).sum::<f64>()
    };
    let inner = half_l1(&ha.counts, &hb.counts);
    let outer = half_l1(&ha.outside, &hb.outside);
    let clipped_a = ha.clipped() as f64 / na;
    let clipped_b = hb.clipped() as f64 / nb;
    Ok(TvEstimate {
        tv: (inner + outer).min(1.0),
        upper: (inner + 0.5 * (clipped_a + clipped_b)).min(1.0),
        clipped_a,
        clipped_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(v: Vec<f64>) -> EmpiricalLaw {
        EmpiricalLaw::new(v, 1, 1.0).unwrap()
    }

    #[test]
    fn histogram_counts_sum_to_n() {
        let s: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 - 50.0).collect();
        let h = Histogram::with_edges(&s, 2, vec![vec![-20.0, 0.0, 20.0], vec![-10.0, 10.0]]).unwrap();
        assert_eq!(h.total(), 500);
    }

    #[test]
    fn identical_and_disjoint() {
        let a: Vec<f64> = (0..2000).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        assert_eq!(tv_histogram(&law(a.clone()), &law(a.clone()), 50).unwrap().tv, 0.0);
        let t = tv_histogram(&law(a), &law(b), 50).unwrap().tv;
        assert!((t - 1.0).abs() <= 1.0 / 2000.0, "{t}");
    }

    #[test]
    fn empty_rejected() {
        assert!(tv_histogram(&law(vec![]), &law(vec![1.0]), 4).is_err());
    }
}
