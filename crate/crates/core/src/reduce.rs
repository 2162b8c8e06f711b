//! Parallel reductions whose result does not depend on the thread count.
//!
//! Work is cut into fixed-size chunks; each chunk is summed sequentially with
//! Neumaier compensation and the chunk totals are combined in index order.

use rayon::prelude::*;

pub const CHUNK: usize = 4096;

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    c: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

/// `Σ_{i<n} f(i)`, bit-identical for any rayon pool size.
pub fn par_sum<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    par_sum_vec(n, 1, |i, out| out[0] = f(i))[0]
}

/// Componentwise `Σ_{i<n} f(i)` for `k`-vector valued `f` writing into its buffer.
pub fn par_sum_vec<F: Fn(usize, &mut [f64]) + Sync>(n: usize, k: usize, f: F) -> Vec<f64> {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Neumaier::default(); k];
            let mut buf = vec![0.0; k];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                f(i, &mut buf);
                for (a, &v) in acc.iter_mut().zip(&buf) {
                    a.add(v);
                }
            }
            acc.iter().map(Neumaier::value).collect()
        })
        .collect();
    let mut total = vec![Neumaier::default(); k];
    for p in &partial {
        for (t, &v) in total.iter_mut().zip(p) {
            t.add(v);
        }
    }
    total.iter().map(Neumaier::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = Neumaier::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn independent_of_pool_size() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| par_sum(100_003, f));
        let many = rayon::ThreadPoolBuilder::new().num_threads(7).build().unwrap().install(|| par_sum(100_003, f));
        assert_eq!(one.to_bits(), many.to_bits());
    }
}
