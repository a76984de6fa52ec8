//! Fixed-shape pairwise reductions.
//!
//! The reduction tree depends only on the number of terms, so results are
//! bitwise reproducible regardless of thread count.

use num_complex::Complex64;
use rayon::prelude::*;

const LEAF: usize = 16;

/// Pairwise sum of `f(0) + ... + f(n-1)`.
pub fn pairwise_sum<F>(n: usize, f: &F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    pairwise_range(0, n, f)
}

fn pairwise_range<F>(lo: usize, hi: usize, f: &F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync,
{
    let len = hi - lo;
    if len <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for i in lo..hi {
            acc += f(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_range(lo, mid, f) + pairwise_range(mid, hi, f)
    }
}

/// Pairwise sum of real terms.
pub fn pairwise_sum_real(terms: &[f64]) -> f64 {
    if terms.len() <= LEAF {
        terms.iter().sum()
    } else {
        let mid = terms.len() / 2;
        pairwise_sum_real(&terms[..mid]) + pairwise_sum_real(&terms[mid..])
    }
}

/// Parallel map followed by a pairwise reduction over the mapped values in index order.
pub fn par_pairwise_sum<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let parts: Vec<Complex64> = (0..n).into_par_iter().map(&f).collect();
    pairwise_sum(parts.len(), &|i| parts[i])
}

/// Elementwise pairwise reduction of equally sized vectors, computed in parallel.
pub fn par_pairwise_sum_vec<F>(n: usize, len: usize, f: F) -> Vec<Complex64>
where
    F: Fn(usize) -> Vec<Complex64> + Sync + Send,
{
    let parts: Vec<Vec<Complex64>> = (0..n).into_par_iter().map(&f).collect();
    reduce_vecs(&parts, len)
}

fn reduce_vecs(parts: &[Vec<Complex64>], len: usize) -> Vec<Complex64> {
    if parts.is_empty() {
        return vec![Complex64::new(0.0, 0.0); len];
    }
    if parts.len() == 1 {
        return parts[0].clone();
    }
    let mid = parts.len() / 2;
    let mut left = reduce_vecs(&parts[..mid], len);
    let right = reduce_vecs(&parts[mid..], len);
    for (a, b) in left.iter_mut().zip(right) {
        *a += b;
    }
    left
}
