//! Inverse distance weighting exploration term.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::dist_sq;

use core::f64::consts::PI;

/// Distance below which a point is treated as one of the samples.
pub const COINCIDENCE_TOL: f64 = 1e-12;

/// Sample set used by the inverse distance weighting functions.
#[derive(Debug, Clone, Copy)]
pub struct IdwContext<'a> {
    pub samples: &'a [Vec<f64>],
    pub coincidence_tol: f64,
}

impl<'a> IdwContext<'a> {
    pub fn new(samples: &'a [Vec<f64>]) -> Self {
        IdwContext {
            samples,
            coincidence_tol: COINCIDENCE_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `w_i(x) = 1 / |x - x_i|^2`.
    pub fn weight(&self, i: usize, x: &[f64]) -> Result<f64> {
        let d2 = dist_sq(x, &self.samples[i]);
        if d2 <= self.coincidence_tol * self.coincidence_tol {
            return Err(Error::Domain(format!("point coincides with sample {i}")));
        }
        Ok(1.0 / d2)
    }

    /// Sum of the weights, or `None` when `x` coincides with a sample.
    fn weight_sum(&self, x: &[f64]) -> Option<f64> {
        let tol2 = self.coincidence_tol * self.coincidence_tol;
        let mut sum = 0.0;
        for s in self.samples {
            let d2 = dist_sq(x, s);
            if d2 <= tol2 {
                return None;
            }
            sum += 1.0 / d2;
        }
        Some(sum)
    }

    /// `z(x) = -(2/pi) atan(1 / sum_i w_i(x))`, and 0 on the samples.
    pub fn distance(&self, x: &[f64]) -> f64 {
        match self.weight_sum(x) {
            Some(sum) => -2.0 / PI * libm::atan(1.0 / sum),
            None => 0.0,
        }
    }

    /// `-(4/pi) sum_i (x - x_i) w_i^2 / (1 + (sum_i w_i)^2)`, and 0 on the samples.
    pub fn distance_gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        let tol2 = self.coincidence_tol * self.coincidence_tol;
        let mut sum = 0.0;
        for s in self.samples {
            let d2 = dist_sq(x, s);
            if d2 <= tol2 {
                return vec![0.0; x.len()];
            }
            let w = 1.0 / d2;
            sum += w;
            for ((gk, xk), sk) in g.iter_mut().zip(x).zip(s) {
                *gk += (xk - sk) * w * w;
            }
        }
        let c = -4.0 / PI / (1.0 + sum * sum);
        for gk in &mut g {
            *gk *= c;
        }
        g
    }

    /// Exploration term of the constrained variant:
    /// `(N/N_max - 1) atan(sum_{i != best} w_i(x_best) / sum_i w_i(x)) - (N/N_max) atan(1 / sum_i w_i(x))`.
    pub fn distance_cglisp(&self, x: &[f64], best_index: usize, n_max: usize) -> Result<f64> {
        let n = self.samples.len();
        if best_index >= n {
            return Err(Error::InvalidInput(format!(
                "best index {best_index} out of range"
            )));
        }
        if n > n_max || n_max == 0 {
            return Err(Error::InvalidInput(format!(
                "{n} samples exceed the budget {n_max}"
            )));
        }
        let sum = match self.weight_sum(x) {
            Some(sum) => sum,
            None => return Ok(0.0),
        };
        let best = &self.samples[best_index];
        let best_sum: f64 = self
            .samples
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != best_index)
            .map(|(_, s)| 1.0 / dist_sq(best, s))
            .sum();
        let ratio = n as f64 / n_max as f64;
        Ok((ratio - 1.0) * libm::atan(best_sum / sum) - ratio * libm::atan(1.0 / sum))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn weights() {
        let samples = vec![vec![0.0, 0.0]];
        let ctx = IdwContext::new(&samples);
        assert_eq!(ctx.weight(0, &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(ctx.weight(0, &[0.0, 2.0]).unwrap(), 0.25);
        assert!(ctx.weight(0, &[0.0, 0.0]).is_err());
        let one = vec![vec![0.0]];
        assert_eq!(IdwContext::new(&one).weight(0, &[0.5]).unwrap(), 4.0);
    }

    #[test]
    fn distance_values() {
        let one = vec![vec![0.0, 0.0]];
        let ctx = IdwContext::new(&one);
        assert!((ctx.distance(&[0.6, 0.8]) + 0.5).abs() < 1e-15);
        assert_eq!(ctx.distance(&[0.0, 0.0]), 0.0);
        let two = vec![vec![-1.0], vec![1.0]];
        let ctx = IdwContext::new(&two);
        // -(2/pi) atan(0.5)
        assert!((ctx.distance(&[0.0]) + 0.295_167_235_300_866_6).abs() < 1e-15);
        assert_eq!(ctx.distance(&[1.0]), 0.0);
    }

    #[test]
    fn gradient_vanishes_on_samples_and_two_point_midpoint() {
        let two = vec![vec![0.3, -0.2], vec![-0.5, 0.7]];
        let ctx = IdwContext::new(&two);
        assert_eq!(ctx.distance_gradient(&two[0]), vec![0.0, 0.0]);
        let mid = [(0.3 - 0.5) / 2.0, (-0.2 + 0.7) / 2.0];
        assert!(ctx.distance_gradient(&mid).iter().all(|g| g.abs() < 1e-12));
    }

    #[test]
    fn cglisp_values() {
        let x = vec![vec![0.0], vec![1.0]];
        let ctx = IdwContext::new(&x);
        assert_eq!(ctx.distance_cglisp(&[1.0], 0, 4).unwrap(), 0.0);
        // N = N_max drops the first term
        let v = ctx.distance_cglisp(&[0.5], 0, 2).unwrap();
        assert!((v + libm::atan(1.0 / 8.0)).abs() < 1e-15);
        // N=2, N_max=4, best 0, x=0.5: w(x) sum = 8, sum over i != best of w_i(x_best) = 1
        let v = ctx.distance_cglisp(&[0.5], 0, 4).unwrap();
        let expect = -0.5 * (1.0f64 / 8.0).atan() - 0.5 * (1.0f64 / 8.0).atan();
        assert!((v - expect).abs() < 1e-12);
        assert!(ctx.distance_cglisp(&[0.5], 2, 4).is_err());
        assert!(ctx.distance_cglisp(&[0.5], 0, 1).is_err());
    }
}
