//! Augmented sample set and min-max normalization of the acquisition terms.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist_sq;
use crate::rng::Rng;

/// Points closer than this are merged when building the augmented set.
pub const DEDUP_TOL: f64 = 1e-9;
const KMEANS_MAX_ITERS: usize = 300;

/// K-means with k-means++ seeding and Lloyd iterations. Requires more points than clusters.
pub fn kmeans(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if k == 0 {
        return Err(Error::InvalidInput(
            "k-means needs at least one cluster".into(),
        ));
    }
    if points.len() < k {
        return Err(Error::InvalidInput(
            "k-means needs at least as many points as clusters".into(),
        ));
    }
    let dim = points[0].len();
    for p in points {
        check_dim(dim, p.len())?;
    }
    let mut rng = Rng::seed_from(seed);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[rng.below(points.len())].clone());
    let mut d2: Vec<f64> = points.iter().map(|p| dist_sq(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.uniform() * total;
            let mut pick = points.len() - 1;
            for (i, d) in d2.iter().enumerate() {
                if target < *d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            rng.below(points.len())
        };
        centroids.push(points[next].clone());
        for (di, p) in d2.iter_mut().zip(points) {
            *di = di.min(dist_sq(p, &centroids[centroids.len() - 1]));
        }
    }

    let mut assign = vec![usize::MAX; points.len()];
    for _ in 0..KMEANS_MAX_ITERS {
        let mut changed = false;
        for (a, p) in assign.iter_mut().zip(points) {
            let nearest = nearest(&centroids, p);
            if *a != nearest {
                *a = nearest;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (a, p) in assign.iter().zip(points) {
            counts[*a] += 1;
            for (s, v) in sums[*a].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        // An empty cluster takes the point farthest from its own centroid.
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..points.len())
                    .max_by(|&i, &j| {
                        dist_sq(&points[i], &centroids[assign[i]])
                            .total_cmp(&dist_sq(&points[j], &centroids[assign[j]]))
                    })
                    .unwrap_or(0);
                centroids[c] = points[far].clone();
                assign[far] = c;
            }
        }
    }
    Ok(centroids)
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist_sq(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Samples, midpoints between cluster centroids (with the box corners) and the corners themselves.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AugmentedSet {
    pub points: Vec<Vec<f64>>,
    pub k_aug: usize,
    pub source_count: usize,
    /// Size before merging coincident points.
    pub raw_count: usize,
}

/// Builds the augmented set used for min-max rescaling.
pub fn augment(
    samples: &[Vec<f64>],
    k_aug: usize,
    lower: &[f64],
    upper: &[f64],
    seed: u64,
) -> Result<AugmentedSet> {
    if samples.is_empty() {
        return Err(Error::InvalidInput(
            "augmented set needs at least one sample".into(),
        ));
    }
    if k_aug == 0 {
        return Err(Error::InvalidInput("K_aug must be positive".into()));
    }
    let dim = lower.len();
    check_dim(dim, upper.len())?;
    for s in samples {
        check_dim(dim, s.len())?;
    }
    let mut centres = if samples.len() > k_aug {
        kmeans(samples, k_aug, seed)?
    } else {
        samples.to_vec()
    };
    for corner in [lower, upper] {
        if !centres
            .iter()
            .any(|c| dist_sq(c, corner) <= DEDUP_TOL * DEDUP_TOL)
        {
            centres.push(corner.to_vec());
        }
    }
    let mut raw: Vec<Vec<f64>> = samples.to_vec();
    for i in 0..centres.len() {
        for j in (i + 1)..centres.len() {
            raw.push(
                centres[i]
                    .iter()
                    .zip(&centres[j])
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            );
        }
    }
    raw.push(lower.to_vec());
    raw.push(upper.to_vec());
    let raw_count = raw.len();
    let mut points: Vec<Vec<f64>> = Vec::with_capacity(raw_count);
    for p in raw {
        if !points
            .iter()
            .any(|q| dist_sq(q, &p) <= DEDUP_TOL * DEDUP_TOL)
        {
            points.push(p);
        }
    }
    Ok(AugmentedSet {
        points,
        k_aug,
        source_count: samples.len(),
        raw_count,
    })
}

/// Range statistics used for min-max rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinMaxStats {
    pub h_min: f64,
    pub h_max: f64,
    pub delta_h: f64,
}

impl MinMaxStats {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "min-max statistics need at least one value".into(),
            ));
        }
        let h_min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = h_max - h_min;
        let delta_h = if spread > 0.0 {
            spread
        } else if h_max != 0.0 {
            // Magnitude keeps the divisor positive when all values are equal and negative.
            h_max.abs()
        } else {
            1.0
        };
        Ok(MinMaxStats {
            h_min,
            h_max,
            delta_h,
        })
    }

    /// `(h - h_min) / delta_h`.
    pub fn rescale(&self, h: f64) -> f64 {
        (h - self.h_min) / self.delta_h
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn kmeans_separates_two_groups() {
        let mut rng = Rng::seed_from(3);
        let mut pts = Vec::new();
        for centre in [[0.0, 0.0], [10.0, 10.0]] {
            for _ in 0..5 {
                let (a, r) = (
                    rng.uniform_in(0.0, core::f64::consts::TAU),
                    rng.uniform_in(0.0, 0.3),
                );
                pts.push(vec![
                    centre[0] + r * libm::cos(a),
                    centre[1] + r * libm::sin(a),
                ]);
            }
        }
        let c = kmeans(&pts, 2, 11).unwrap();
        for target in [[0.0, 0.0], [10.0, 10.0]] {
            assert!(c.iter().any(|c| dist_sq(c, &target) < 0.25));
        }
        assert_eq!(c, kmeans(&pts, 2, 11).unwrap());
    }

    #[test]
    fn kmeans_identical_points() {
        let pts = vec![vec![1.5, -2.0]; 4];
        assert_eq!(kmeans(&pts, 1, 0).unwrap(), vec![vec![1.5, -2.0]]);
        assert!(kmeans(&pts, 5, 0).is_err());
    }

    #[test]
    fn augmented_cardinality() {
        let mut rng = Rng::seed_from(5);
        let x: Vec<Vec<f64>> = (0..10)
            .map(|_| vec![rng.uniform_in(-0.9, 0.9), rng.uniform_in(-0.9, 0.9)])
            .collect();
        let aug = augment(&x, 5, &[-1.0, -1.0], &[1.0, 1.0], 1).unwrap();
        assert_eq!(aug.raw_count, 33);
        assert_eq!(aug.points.len(), 33);
        assert_eq!(&aug.points[..10], &x[..]);
    }

    #[test]
    fn augmented_small_sample_set() {
        let x = vec![vec![0.2], vec![0.6]];
        let aug = augment(&x, 5, &[-1.0], &[1.0], 0).unwrap();
        // X_c = {0.2, 0.6, -1, 1}: 6 midpoints
        assert_eq!(aug.raw_count, 2 + 6 + 2);
        assert!(aug.points.len() <= 10);
        assert!(aug.points.contains(&vec![-1.0]) && aug.points.contains(&vec![1.0]));
    }

    #[test]
    fn corner_sample_appears_once() {
        let x = vec![vec![-1.0, -1.0], vec![0.5, 0.1]];
        let aug = augment(&x, 5, &[-1.0, -1.0], &[1.0, 1.0], 0).unwrap();
        assert_eq!(
            aug.points
                .iter()
                .filter(|p| **p == vec![-1.0, -1.0])
                .count(),
            1
        );
    }

    #[test]
    fn min_max_conventions() {
        let s = MinMaxStats::from_values(&[2.0, 6.0, 4.0]).unwrap();
        assert_eq!((s.h_min, s.h_max, s.delta_h), (2.0, 6.0, 4.0));
        assert_eq!(s.rescale(4.0), 0.5);
        assert_eq!(s.rescale(2.0), 0.0);
        assert_eq!(s.rescale(6.0), 1.0);
        assert_eq!(MinMaxStats::from_values(&[3.0, 3.0]).unwrap().delta_h, 3.0);
        assert_eq!(
            MinMaxStats::from_values(&[-2.0, -2.0]).unwrap().delta_h,
            2.0
        );
        assert_eq!(MinMaxStats::from_values(&[0.0]).unwrap().delta_h, 1.0);
        assert_eq!(
            MinMaxStats::from_values(&[-1.0, 3.0]).unwrap().rescale(1.0),
            0.5
        );
        assert!(MinMaxStats::from_values(&[]).is_err());
    }
}
