//! Radial basis function surrogate of the latent scoring function.

mod dataset;
mod fit;
mod loocv;

pub use dataset::{Comparison, Preference, PreferenceDataset};
pub use fit::{fit_weights, FitSettings, WeightFit};
pub use loocv::{
    loocv_select, loocv_select_epsilon, loocv_select_epsilon_by_sample, LoocvHoldout,
    DEFAULT_LOOCV_GRID,
};

use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist_sq;

/// Radial function `phi(eps * r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum RadialKind {
    InverseQuadratic,
    Multiquadratic,
    Linear,
    Gaussian,
    ThinPlateSpline,
    InverseMultiquadratic,
}

impl RadialKind {
    pub const ALL: [RadialKind; 6] = [
        RadialKind::InverseQuadratic,
        RadialKind::Multiquadratic,
        RadialKind::Linear,
        RadialKind::Gaussian,
        RadialKind::ThinPlateSpline,
        RadialKind::InverseMultiquadratic,
    ];

    /// Whether `phi(eps * ||x - c||)` is differentiable at `x = c`.
    pub fn is_smooth(self) -> bool {
        !matches!(self, RadialKind::Linear | RadialKind::ThinPlateSpline)
    }

    /// `phi` as a function of `t = (eps r)^2`.
    fn of_sq(self, t: f64) -> f64 {
        match self {
            RadialKind::InverseQuadratic => 1.0 / (1.0 + t),
            RadialKind::Multiquadratic => libm::sqrt(1.0 + t),
            RadialKind::Linear => libm::sqrt(t),
            RadialKind::Gaussian => libm::exp(-t),
            RadialKind::ThinPlateSpline => {
                if t == 0.0 {
                    0.0
                } else {
                    0.5 * t * libm::log(t)
                }
            }
            RadialKind::InverseMultiquadratic => 1.0 / libm::sqrt(1.0 + t),
        }
    }

    /// `d phi / d t` with `t = (eps r)^2`; the singular kinds return 0 at `t = 0`.
    fn d_of_sq(self, t: f64) -> f64 {
        match self {
            RadialKind::InverseQuadratic => -1.0 / ((1.0 + t) * (1.0 + t)),
            RadialKind::Multiquadratic => 0.5 / libm::sqrt(1.0 + t),
            RadialKind::Linear => {
                if t == 0.0 {
                    0.0
                } else {
                    0.5 / libm::sqrt(t)
                }
            }
            RadialKind::Gaussian => -libm::exp(-t),
            RadialKind::ThinPlateSpline => {
                if t == 0.0 {
                    0.0
                } else {
                    0.5 * (libm::log(t) + 1.0)
                }
            }
            RadialKind::InverseMultiquadratic => {
                let s = 1.0 + t;
                -0.5 / (s * libm::sqrt(s))
            }
        }
    }
}

/// Evaluates `phi(eps * r)`. Thin plate spline is 0 at `r = 0`.
pub fn radial_eval(kind: RadialKind, epsilon: f64, r: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!(
            "shape parameter must be positive, got {epsilon}"
        )));
    }
    if !(r >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "distance must be nonnegative, got {r}"
        )));
    }
    let s = epsilon * r;
    Ok(kind.of_sq(s * s))
}

/// `f(x) = sum_i beta_i phi(eps ||x - x_i||)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RbfSurrogate {
    pub kind: RadialKind,
    pub epsilon: f64,
    pub centers: Vec<Vec<f64>>,
    pub beta: Vec<f64>,
}

impl RbfSurrogate {
    pub fn new(
        kind: RadialKind,
        epsilon: f64,
        centers: Vec<Vec<f64>>,
        beta: Vec<f64>,
    ) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidInput(format!(
                "shape parameter must be positive, got {epsilon}"
            )));
        }
        check_dim(centers.len(), beta.len())?;
        Ok(RbfSurrogate {
            kind,
            epsilon,
            centers,
            beta,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.first().map_or(0, Vec::len)
    }

    /// Radial basis vector `[phi_1(x), ..., phi_N(x)]`.
    pub fn basis(&self, x: &[f64]) -> Vec<f64> {
        basis_vector(self.kind, self.epsilon, &self.centers, x)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let e2 = self.epsilon * self.epsilon;
        self.centers
            .iter()
            .zip(&self.beta)
            .map(|(c, b)| b * self.kind.of_sq(e2 * dist_sq(x, c)))
            .sum()
    }

    pub fn try_eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eval(x))
    }

    /// Analytic gradient. For `Linear` and `ThinPlateSpline` the value at a
    /// center is the zero subgradient of that term.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let e2 = self.epsilon * self.epsilon;
        let mut g = alloc::vec![0.0; x.len()];
        for (c, b) in self.centers.iter().zip(&self.beta) {
            let coef = b * self.kind.d_of_sq(e2 * dist_sq(x, c)) * 2.0 * e2;
            for ((gi, xi), ci) in g.iter_mut().zip(x).zip(c) {
                *gi += coef * (xi - ci);
            }
        }
        g
    }
}

pub(crate) fn basis_vector(
    kind: RadialKind,
    epsilon: f64,
    centers: &[Vec<f64>],
    x: &[f64],
) -> Vec<f64> {
    let e2 = epsilon * epsilon;
    centers
        .iter()
        .map(|c| kind.of_sq(e2 * dist_sq(x, c)))
        .collect()
}

/// Symmetric `N x N` matrix `phi(eps ||x_i - x_j||)`, row-major.
pub(crate) fn kernel_matrix(kind: RadialKind, epsilon: f64, samples: &[Vec<f64>]) -> Vec<f64> {
    let n = samples.len();
    let e2 = epsilon * epsilon;
    let mut k = alloc::vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = kind.of_sq(0.0);
        for j in (i + 1)..n {
            let v = kind.of_sq(e2 * dist_sq(&samples[i], &samples[j]));
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    k
}

/// Surrogate preference with tolerance `sigma`: the strict branches are
/// tested first, so `|f(xi) - f(xj)| = sigma` maps to a strict preference.
pub fn surrogate_preference(s: &RbfSurrogate, xi: &[f64], xj: &[f64], sigma: f64) -> Preference {
    preference_from_gap(s.eval(xi) - s.eval(xj), sigma)
}

pub(crate) fn preference_from_gap(gap: f64, sigma: f64) -> Preference {
    if gap <= -sigma {
        Preference::FirstBetter
    } else if gap >= sigma {
        Preference::SecondBetter
    } else {
        Preference::Indifferent
    }
}
