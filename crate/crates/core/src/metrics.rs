//! Accuracy, samples-to-accuracy and data profiles over best-score traces.
//! A trace holds `f(x_best(N))` for `N = 1, 2, ...`.

use alloc::vec;
use alloc::vec::Vec;

/// Default accuracy threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.95;

/// Normalized progress from the first sample towards `f_star` after `n` samples
/// (1-based). Defined as 1 when the first sample already attains `f_star`.
pub fn accuracy(trace: &[f64], f_star: f64, n: usize) -> f64 {
    let first = trace[0];
    if first == f_star {
        return 1.0;
    }
    // `first - best` keeps the zero at N = 1 positive.
    (first - trace[n - 1]) / (first - f_star)
}

/// Smallest `N` with accuracy strictly above `t`, or `None` if never reached.
pub fn n_acc(trace: &[f64], f_star: f64, t: f64) -> Option<usize> {
    (1..=trace.len()).find(|&n| accuracy(trace, f_star, n) > t)
}

/// Fraction of traces solved within `N` samples, for `N = 1..=max length`.
pub fn data_profile(traces: &[Vec<f64>], f_star: f64, t: f64) -> Vec<f64> {
    let len = traces.iter().map(Vec::len).max().unwrap_or(0);
    let mut solved = vec![0usize; len + 1];
    for tr in traces {
        if let Some(n) = n_acc(tr, f_star, t) {
            solved[n] += 1;
        }
    }
    let total = traces.len().max(1) as f64;
    let mut acc = 0;
    solved[1..]
        .iter()
        .map(|s| {
            acc += s;
            acc as f64 / total
        })
        .collect()
}

/// Median of samples-to-accuracy with unsolved trials counted as infinite.
/// `None` when the median itself is infinite.
pub fn median_n_acc(values: &[Option<usize>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v: Vec<f64> = values
        .iter()
        .map(|x| x.map_or(f64::INFINITY, |n| n as f64))
        .collect();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    let med = if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    };
    med.is_finite().then_some(med)
}

/// Share of trials that reached the threshold.
pub fn solved_fraction(values: &[Option<usize>]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|v| v.is_some()).count() as f64 / values.len() as f64
}

/// Running minimum of `scores`, i.e. the best-score trace under a consistent
/// decision-maker.
pub fn best_trace(scores: &[f64]) -> Vec<f64> {
    let mut best = f64::INFINITY;
    scores
        .iter()
        .map(|s| {
            best = best.min(*s);
            best
        })
        .collect()
}

/// Largest distance from a grid point to its nearest sample.
pub fn fill_distance(grid: &[Vec<f64>], samples: &[Vec<f64>]) -> f64 {
    let worst = grid
        .iter()
        .map(|g| {
            samples
                .iter()
                .map(|s| crate::linalg::dist_sq(g, s))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    libm::sqrt(worst)
}
