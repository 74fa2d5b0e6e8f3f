//! Feasible set, affine rescaling to `[-1, 1]` and Latin hypercube designs.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::rng::Rng;

/// Default tolerance for equality constraints.
pub const DEFAULT_TOL_EQ: f64 = 1e-8;

/// A known constraint function `x -> g(x)`, evaluated component-wise.
pub type ConstraintFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Box bounds plus optional inequality (`g(x) <= 0`) and equality (`h(x) = 0`)
/// constraints.
#[derive(Clone)]
pub struct ConstraintSet {
    lower: Vec<f64>,
    upper: Vec<f64>,
    ineq: Option<ConstraintFn>,
    eq: Option<ConstraintFn>,
}

impl core::fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("ineq", &self.ineq.is_some())
            .field("eq", &self.eq.is_some())
            .finish()
    }
}

impl ConstraintSet {
    /// Box-only constraint set. Requires `lower <= upper` and at least one dimension.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidInput(
                "at least one decision variable is required".into(),
            ));
        }
        check_dim(lower.len(), upper.len())?;
        for (index, (&l, &u)) in lower.iter().zip(&upper).enumerate() {
            if !l.is_finite() || !u.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite bound at index {index}"
                )));
            }
            if l > u {
                return Err(Error::InvalidBounds {
                    index,
                    lower: l,
                    upper: u,
                });
            }
        }
        Ok(ConstraintSet {
            lower,
            upper,
            ineq: None,
            eq: None,
        })
    }

    pub fn with_ineq(mut self, g: ConstraintFn) -> Self {
        self.ineq = Some(g);
        self
    }

    pub fn with_eq(mut self, h: ConstraintFn) -> Self {
        self.eq = Some(h);
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// True when only the box is present.
    pub fn is_box_only(&self) -> bool {
        self.ineq.is_none() && self.eq.is_none()
    }

    pub fn in_box(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    /// Clamps `x` into the box in place.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }

    /// Box membership, `g(x) <= 0` and `|h(x)| <= tol_eq` element-wise.
    pub fn is_feasible(&self, x: &[f64], tol_eq: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        if !self.in_box(x) {
            return Ok(false);
        }
        if let Some(g) = &self.ineq {
            if g(x).iter().any(|v| !(*v <= 0.0)) {
                return Ok(false);
            }
        }
        if let Some(h) = &self.eq {
            if h(x).iter().any(|v| !(v.abs() <= tol_eq)) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Quadratic penalty of the general constraints: `sum max(0, g)^2 + sum h^2`.
    /// The box is not included.
    pub fn penalty(&self, x: &[f64]) -> f64 {
        let mut p = 0.0;
        if let Some(g) = &self.ineq {
            p += g(x)
                .iter()
                .map(|v| if *v > 0.0 { v * v } else { 0.0 })
                .sum::<f64>();
        }
        if let Some(h) = &self.eq {
            p += h(x).iter().map(|v| v * v).sum::<f64>();
        }
        p
    }
}

/// Per-coordinate affine map `y = scale * x + offset` sending `[l, u]` onto `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AffineRescaler {
    pub scale: Vec<f64>,
    pub offset: Vec<f64>,
}

impl AffineRescaler {
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.scale.iter().zip(&self.offset))
            .map(|(v, (s, o))| s * v + o)
            .collect()
    }

    pub fn inverse(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.scale.iter().zip(&self.offset))
            .map(|(v, (s, o))| (v - o) / s)
            .collect()
    }

    pub fn dim(&self) -> usize {
        self.scale.len()
    }

    /// The constraint set expressed in rescaled coordinates: the box becomes
    /// `[-1, 1]^n` and general constraints are evaluated through [`Self::inverse`].
    pub fn rescale_constraints(&self, c: &ConstraintSet) -> ConstraintSet {
        let n = self.dim();
        let mut out = ConstraintSet {
            lower: alloc::vec![-1.0; n],
            upper: alloc::vec![1.0; n],
            ineq: None,
            eq: None,
        };
        if let Some(g) = &c.ineq {
            let g = g.clone();
            let map = self.clone();
            out.ineq = Some(Arc::new(move |y: &[f64]| g(&map.inverse(y))));
        }
        if let Some(h) = &c.eq {
            let h = h.clone();
            let map = self.clone();
            out.eq = Some(Arc::new(move |y: &[f64]| h(&map.inverse(y))));
        }
        out
    }
}

/// Builds the map sending `[l, u]` onto `[-1, 1]`. Fails when some `u_i == l_i`.
pub fn make_rescaler(c: &ConstraintSet) -> Result<AffineRescaler> {
    let mut scale = Vec::with_capacity(c.dim());
    let mut offset = Vec::with_capacity(c.dim());
    for (index, (&l, &u)) in c.lower.iter().zip(&c.upper).enumerate() {
        let width = u - l;
        if !(width > 0.0) {
            return Err(Error::DegenerateDimension { index });
        }
        scale.push(2.0 / width);
        offset.push(-(u + l) / width);
    }
    Ok(AffineRescaler { scale, offset })
}

/// Latin hypercube design with `count` points in `[lower, upper]`.
///
/// Each axis is split into `count` equal slabs; every slab receives exactly one
/// point, placed uniformly at random inside it, and the slab order is an
/// independent random permutation per axis.
pub fn latin_hypercube(
    lower: &[f64],
    upper: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if count < 2 {
        return Err(Error::InvalidInput(format!(
            "design size must be at least 2, got {count}"
        )));
    }
    check_dim(lower.len(), upper.len())?;
    let n = lower.len();
    let mut rng = Rng::seed_from(seed);
    let mut points = alloc::vec![alloc::vec![0.0; n]; count];
    let mut perm: Vec<usize> = (0..count).collect();
    for d in 0..n {
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        rng.shuffle(&mut perm);
        let width = (upper[d] - lower[d]) / count as f64;
        for (point, &slab) in points.iter_mut().zip(&perm) {
            let v = lower[d] + width * (slab as f64 + rng.uniform());
            // keep the draw inside its half-open slab despite rounding
            point[d] = v.min(lower[d] + width * (slab as f64 + 1.0)).min(upper[d]);
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn feasibility_box_and_general() {
        let c = ConstraintSet::new(vec![-1.0], vec![1.0]).unwrap();
        assert!(c.is_feasible(&[0.0], DEFAULT_TOL_EQ).unwrap());
        assert!(!c.is_feasible(&[1.0001], DEFAULT_TOL_EQ).unwrap());
        assert_eq!(
            c.is_feasible(&[0.0, 0.0], DEFAULT_TOL_EQ),
            Err(Error::DimensionMismatch {
                expected: 1,
                found: 2
            })
        );

        let c = ConstraintSet::new(vec![0.0, 0.0], vec![1.0, 1.0])
            .unwrap()
            .with_ineq(Arc::new(|x: &[f64]| vec![x[0] + x[1] - 1.0]));
        // 0.7 + 0.7 - 1 = 0.4 > 0
        assert!(!c.is_feasible(&[0.7, 0.7], DEFAULT_TOL_EQ).unwrap());
        assert!(c.is_feasible(&[0.3, 0.6], DEFAULT_TOL_EQ).unwrap());
        assert!((c.penalty(&[0.7, 0.7]) - 0.16).abs() < 1e-12);
    }

    #[test]
    fn equality_tolerance() {
        let c = ConstraintSet::new(vec![-2.0], vec![2.0])
            .unwrap()
            .with_eq(Arc::new(|x: &[f64]| vec![x[0] - 1.0]));
        assert!(c.is_feasible(&[1.0 + 1e-9], DEFAULT_TOL_EQ).unwrap());
        assert!(!c.is_feasible(&[1.0 + 1e-6], DEFAULT_TOL_EQ).unwrap());
    }

    #[test]
    fn invalid_bounds_report_index() {
        let err = ConstraintSet::new(vec![0.0, 2.0], vec![1.0, 1.0]).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidBounds {
                index: 1,
                lower: 2.0,
                upper: 1.0
            }
        );
    }

    #[test]
    fn rescaler_examples() {
        let r = make_rescaler(&ConstraintSet::new(vec![0.0], vec![2.0]).unwrap()).unwrap();
        assert_eq!(r.forward(&[1.0]), vec![0.0]);
        let r = make_rescaler(&ConstraintSet::new(vec![-3.0], vec![3.0]).unwrap()).unwrap();
        assert_eq!(r.forward(&[3.0]), vec![1.0]);
        assert_eq!(r.forward(&[-3.0]), vec![-1.0]);
        let r = make_rescaler(&ConstraintSet::new(vec![0.5], vec![2.5]).unwrap()).unwrap();
        assert!((r.inverse(&[0.0])[0] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn rescaler_rejects_flat_dimension() {
        let c = ConstraintSet::new(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert_eq!(
            make_rescaler(&c),
            Err(Error::DegenerateDimension { index: 1 })
        );
    }

    #[test]
    fn rescaled_constraints_use_original_units() {
        let c = ConstraintSet::new(vec![0.0, 0.0], vec![1.0, 1.0])
            .unwrap()
            .with_ineq(Arc::new(|x: &[f64]| vec![x[0] + x[1] - 1.0]));
        let r = make_rescaler(&c).unwrap();
        let s = r.rescale_constraints(&c);
        assert_eq!(s.lower(), &[-1.0, -1.0]);
        // (0.3, 0.6) feasible, (0.7, 0.7) not
        assert!(s
            .is_feasible(&r.forward(&[0.3, 0.6]), DEFAULT_TOL_EQ)
            .unwrap());
        assert!(!s
            .is_feasible(&r.forward(&[0.7, 0.7]), DEFAULT_TOL_EQ)
            .unwrap());
    }

    #[test]
    fn lhd_one_point_per_slab_1d() {
        let pts = latin_hypercube(&[0.0], &[4.0], 4, 11).unwrap();
        let mut slabs: Vec<usize> = pts.iter().map(|p| libm::floor(p[0]) as usize).collect();
        slabs.sort_unstable();
        assert_eq!(slabs, vec![0, 1, 2, 3]);
    }

    #[test]
    fn lhd_is_deterministic_and_rejects_small_designs() {
        let a = latin_hypercube(&[-1.0, -1.0], &[1.0, 1.0], 8, 3).unwrap();
        let b = latin_hypercube(&[-1.0, -1.0], &[1.0, 1.0], 8, 3).unwrap();
        assert_eq!(a, b);
        assert!(latin_hypercube(&[0.0], &[1.0], 1, 0).is_err());
    }
}
