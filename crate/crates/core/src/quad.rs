//! Small numerical helpers shared by the quadrature routines.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;

/// Five-point Gauss–Legendre nodes on `[-1, 1]`.
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Five-point Gauss–Legendre rule for `∫_a^b f`.
#[inline]
pub fn gauss_legendre5(a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Tree summation; the reduction order depends only on `xs.len()`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// `ln Σ exp(x_i)`, ignoring `-∞` entries; `-∞` for an empty or all-`-∞` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Periodic distance `min_k |s − t + kL|`.
#[inline]
pub fn periodic_distance(s: f64, t: f64, period: f64) -> f64 {
    let d = (s - t).rem_euclid(period);
    d.min(period - d)
}

static STRICT_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Disable data parallelism in the double sums and quadratures.
///
/// Row results are always reduced in index order, so both modes give the
/// same bits; the switch exists for debugging and for single-core runs.
pub fn set_strict_sequential(on: bool) {
    STRICT_SEQUENTIAL.store(on, Ordering::Relaxed);
}

pub fn strict_sequential() -> bool {
    STRICT_SEQUENTIAL.load(Ordering::Relaxed)
}

/// `(0..n).map(f)` evaluated in parallel unless strict-sequential mode is on.
pub(crate) fn map_rows<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    if strict_sequential() {
        (0..n).map(f).collect()
    } else {
        (0..n).into_par_iter().map(f).collect()
    }
}
