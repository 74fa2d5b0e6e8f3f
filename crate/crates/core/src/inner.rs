//! Global minimization of the acquisition over the feasible set: a
//! constriction particle swarm plus a projected-gradient multistart refiner.

use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::norm;
use crate::problem::ConstraintSet;
use crate::rng::Rng;

/// Equality tolerance used to decide whether a particle is feasible.
pub const FEASIBILITY_TOL_EQ: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsoConfig {
    pub swarm_size: usize,
    pub max_iters: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub seed: u64,
    pub penalty_weight: f64,
}

impl PsoConfig {
    /// Swarm of `max(30, 10 n)` particles for `200 n` iterations.
    pub fn for_dim(n: usize, seed: u64) -> Self {
        PsoConfig {
            swarm_size: (10 * n).max(30),
            max_iters: 200 * n.max(1),
            inertia: 0.729,
            cognitive: 1.49,
            social: 1.49,
            seed,
            penalty_weight: 1e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 || self.max_iters == 0 {
            return Err(Error::InvalidInput(
                "swarm size and iteration count must be positive".into(),
            ));
        }
        if !(self.penalty_weight > 0.0) {
            return Err(Error::InvalidInput(
                "penalty weight must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    pub x: Vec<f64>,
    /// Unpenalized objective at `x`.
    pub value: f64,
    /// False when no feasible particle was ever seen; `x` is then the best penalized point.
    pub feasible: bool,
}

/// Minimizes `objective` over `constraints`. Particles are clamped to the box;
/// general constraints enter through a quadratic penalty.
pub fn minimize_acquisition<F>(
    objective: F,
    constraints: &ConstraintSet,
    cfg: &PsoConfig,
) -> Result<PsoResult>
where
    F: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    let n = constraints.dim();
    let (lo, hi) = (constraints.lower(), constraints.upper());
    let box_only = constraints.is_box_only();
    let mut rng = Rng::seed_from(cfg.seed);

    let mut best_feasible: Option<(Vec<f64>, f64)> = None;
    let mut score = |x: &[f64]| -> Result<f64> {
        let f = objective(x);
        let feasible = box_only || constraints.is_feasible(x, FEASIBILITY_TOL_EQ)?;
        if feasible && best_feasible.as_ref().is_none_or(|(_, b)| f < *b) {
            best_feasible = Some((x.to_vec(), f));
        }
        Ok(if box_only {
            f
        } else {
            f + cfg.penalty_weight * constraints.penalty(x)
        })
    };

    let vmax: Vec<f64> = lo.iter().zip(hi).map(|(l, u)| u - l).collect();
    let mut pos: Vec<Vec<f64>> = Vec::with_capacity(cfg.swarm_size);
    let mut vel: Vec<Vec<f64>> = Vec::with_capacity(cfg.swarm_size);
    for _ in 0..cfg.swarm_size {
        pos.push((0..n).map(|k| rng.uniform_in(lo[k], hi[k])).collect());
        vel.push(
            (0..n)
                .map(|k| rng.uniform_in(-vmax[k], vmax[k]) * 0.5)
                .collect(),
        );
    }
    let mut pbest = pos.clone();
    let mut pval = Vec::with_capacity(cfg.swarm_size);
    for p in &pos {
        pval.push(score(p)?);
    }
    let mut g = argmin(&pval);
    let (mut gbest, mut gval) = (pbest[g].clone(), pval[g]);

    for _ in 0..cfg.max_iters {
        for i in 0..cfg.swarm_size {
            for k in 0..n {
                let (r1, r2) = (rng.uniform(), rng.uniform());
                let v = cfg.inertia * vel[i][k]
                    + cfg.cognitive * r1 * (pbest[i][k] - pos[i][k])
                    + cfg.social * r2 * (gbest[k] - pos[i][k]);
                vel[i][k] = v.clamp(-vmax[k], vmax[k]);
                pos[i][k] = (pos[i][k] + vel[i][k]).clamp(lo[k], hi[k]);
            }
            let v = score(&pos[i])?;
            if v < pval[i] {
                pval[i] = v;
                pbest[i].clone_from(&pos[i]);
            }
        }
        g = argmin(&pval);
        if pval[g] < gval {
            gval = pval[g];
            gbest.clone_from(&pbest[g]);
        }
    }

    Ok(match best_feasible {
        Some((x, value)) => PsoResult {
            x,
            value,
            feasible: true,
        },
        None => {
            let value = objective(&gbest);
            PsoResult {
                x: gbest,
                value,
                feasible: false,
            }
        }
    })
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

const REFINE_MAX_ITERS: usize = 500;
const REFINE_STEP_TOL: f64 = 1e-12;
const ARMIJO: f64 = 1e-4;

/// Projected gradient descent with backtracking from every start; returns the
/// best endpoint. Never worse than the best start.
pub fn multistart_refine<F, G>(
    objective: F,
    gradient: G,
    starts: &[Vec<f64>],
    lower: &[f64],
    upper: &[f64],
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    check_dim(lower.len(), upper.len())?;
    if starts.is_empty() {
        return Err(Error::InvalidInput("at least one start is required".into()));
    }
    let project = |x: &mut [f64]| {
        for (v, (l, u)) in x.iter_mut().zip(lower.iter().zip(upper)) {
            *v = v.clamp(*l, *u);
        }
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        check_dim(lower.len(), start.len())?;
        let mut x = start.clone();
        project(&mut x);
        let mut fx = objective(&x);
        let mut alpha = 1.0;
        for _ in 0..REFINE_MAX_ITERS {
            let g = gradient(&x);
            if norm(&g) == 0.0 {
                break;
            }
            let mut accepted = false;
            for _ in 0..60 {
                let mut y: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect();
                project(&mut y);
                let step: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
                let s = norm(&step);
                if s == 0.0 {
                    break;
                }
                let fy = objective(&y);
                if fy <= fx - ARMIJO / alpha * s * s {
                    x = y;
                    fx = fy;
                    accepted = s > REFINE_STEP_TOL;
                    alpha *= 2.0;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.as_ref().is_none_or(|(_, b)| fx < *b) {
            best = Some((x, fx));
        }
    }
    Ok(best.expect("starts is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exploration::IdwContext;
    use alloc::sync::Arc;
    use alloc::vec;

    fn unit_box(n: usize) -> ConstraintSet {
        ConstraintSet::new(vec![-1.0; n], vec![1.0; n]).unwrap()
    }

    #[test]
    fn defaults_scale_with_dimension() {
        let c = PsoConfig::for_dim(5, 0);
        assert_eq!((c.swarm_size, c.max_iters), (50, 1000));
        assert_eq!(PsoConfig::for_dim(1, 0).swarm_size, 30);
    }

    #[test]
    fn finds_interior_quadratic_minimum() {
        let c = [0.3, -0.4];
        let f = |x: &[f64]| (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
        let r = minimize_acquisition(f, &unit_box(2), &PsoConfig::for_dim(2, 3)).unwrap();
        assert!(r.feasible);
        assert!((r.x[0] - c[0]).abs() < 1e-3 && (r.x[1] - c[1]).abs() < 1e-3);
        assert_eq!(r.value, f(&r.x));
    }

    #[test]
    fn constant_objective_returns_feasible_point() {
        let r = minimize_acquisition(|_| 2.5, &unit_box(3), &PsoConfig::for_dim(3, 1)).unwrap();
        assert_eq!(r.value, 2.5);
        assert!(unit_box(3).in_box(&r.x));
    }

    #[test]
    fn pure_exploration_reaches_the_boundary() {
        let samples = vec![vec![-1.0], vec![1.0]];
        let idw = IdwContext::new(&samples);
        let cs = ConstraintSet::new(vec![-3.0], vec![3.0]).unwrap();
        let r = minimize_acquisition(|x| idw.distance(x), &cs, &PsoConfig::for_dim(1, 0)).unwrap();
        assert!(r.x[0].abs() >= 2.9, "{:?}", r.x);
    }

    #[test]
    fn penalty_respects_general_constraints() {
        let cs = unit_box(2).with_ineq(Arc::new(|x: &[f64]| vec![0.5 - x[0]]));
        let r = minimize_acquisition(
            |x| x[0] * x[0] + x[1] * x[1],
            &cs,
            &PsoConfig::for_dim(2, 4),
        )
        .unwrap();
        assert!(r.feasible);
        assert!(r.x[0] >= 0.5 && (r.x[0] - 0.5).abs() < 1e-3);
        let impossible = unit_box(1).with_ineq(Arc::new(|x: &[f64]| vec![2.0 - x[0]]));
        let r = minimize_acquisition(|x| x[0], &impossible, &PsoConfig::for_dim(1, 4)).unwrap();
        assert!(!r.feasible);
    }

    #[test]
    fn swarm_is_deterministic() {
        let f = |x: &[f64]| libm::sin(3.0 * x[0]) + x[1] * x[1];
        let a = minimize_acquisition(f, &unit_box(2), &PsoConfig::for_dim(2, 11)).unwrap();
        let b = minimize_acquisition(f, &unit_box(2), &PsoConfig::for_dim(2, 11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn refiner_keeps_stationary_midpoint() {
        let samples = vec![vec![-0.5], vec![0.5]];
        let idw = IdwContext::new(&samples);
        let (x, _) = multistart_refine(
            |x| -idw.distance(x),
            |x| idw.distance_gradient(x).iter().map(|g| -g).collect(),
            &[vec![0.0]],
            &[-1.0],
            &[1.0],
        )
        .unwrap();
        assert_eq!(x, vec![0.0]);
    }

    #[test]
    fn refiner_reaches_corner_and_quadratic_minimum() {
        let lin = |x: &[f64]| x[0] + x[1];
        let (x, _) = multistart_refine(
            lin,
            |_| vec![1.0, 1.0],
            &[vec![-1.0, -1.0]],
            &[-1.0; 2],
            &[1.0; 2],
        )
        .unwrap();
        assert_eq!(x, vec![-1.0, -1.0]);
        let c = [0.4, -0.7];
        let q = |x: &[f64]| (x[0] - c[0]).powi(2) + 3.0 * (x[1] - c[1]).powi(2);
        let dq = |x: &[f64]| vec![2.0 * (x[0] - c[0]), 6.0 * (x[1] - c[1])];
        let (x, v) = multistart_refine(q, dq, &[vec![0.36, -0.63]], &[-1.0; 2], &[1.0; 2]).unwrap();
        assert!((x[0] - c[0]).abs() < 1e-6 && (x[1] - c[1]).abs() < 1e-6);
        assert!(v <= q(&[0.36, -0.63]));
    }
}
