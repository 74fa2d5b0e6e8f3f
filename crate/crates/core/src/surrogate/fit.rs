use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{kernel_matrix, Comparison, Preference, PreferenceDataset, RadialKind, RbfSurrogate};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve};

/// Hyper-parameters of the weight fit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitSettings {
    pub kind: RadialKind,
    pub epsilon: f64,
    pub lambda: f64,
    pub sigma: f64,
}

impl Default for FitSettings {
    fn default() -> Self {
        FitSettings {
            kind: RadialKind::InverseQuadratic,
            epsilon: 1.0,
            lambda: 1e-6,
            sigma: 1e-2,
        }
    }
}

impl FitSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput(format!(
                "shape parameter must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "regularization must be nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tolerance sigma must be positive, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// Solution of the weight fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightFit {
    pub beta: Vec<f64>,
    /// One slack per comparison, set to the exact violation of `beta`.
    pub slacks: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl WeightFit {
    pub fn surrogate(&self, data: &PreferenceDataset, settings: &FitSettings) -> RbfSurrogate {
        RbfSurrogate {
            kind: settings.kind,
            epsilon: settings.epsilon,
            centers: data.samples.clone(),
            beta: self.beta.clone(),
        }
    }
}

/// Solves
///
/// ```text
/// min (lambda/2) |beta|^2 + sum_h r_h eps_h
/// s.t. the surrogate reproduces every comparison up to sigma and slack eps_h >= 0
/// ```
///
/// with `r_h = 10` for comparisons that involve the best sample and 1 otherwise.
pub fn fit_weights(data: &PreferenceDataset, settings: &FitSettings) -> Result<WeightFit> {
    data.validate()?;
    settings.validate()?;
    let kernel = kernel_matrix(settings.kind, settings.epsilon, &data.samples);
    let weights = data.slack_weights();
    fit_with_kernel(
        &kernel,
        data.len(),
        &data.comparisons,
        &weights,
        settings.lambda,
        settings.sigma,
    )
}

const MAX_ITERS: usize = 120;
const TOL: f64 = 1e-9;
const STALL_TOL: f64 = 1e-7;
const CERT_TOL: f64 = 1e-10;
const LAMBDA_FLOOR: f64 = 1e-12;

/// One inequality row `sign * D_h beta - eps_h <= rhs`; `sign = 0` is `-eps_h <= 0`.
#[derive(Clone, Copy)]
struct Row {
    h: usize,
    sign: f64,
    rhs: f64,
}

struct Problem<'a> {
    n: usize,
    m: usize,
    lambda: f64,
    /// `D_h = K[first] - K[second]`, `m x n` row-major.
    d: Vec<f64>,
    r: &'a [f64],
    rows: Vec<Row>,
}

impl Problem<'_> {
    fn d_row(&self, h: usize) -> &[f64] {
        &self.d[h * self.n..(h + 1) * self.n]
    }

    /// `G x` with `x = [beta; eps]`.
    fn g_mul(&self, beta: &[f64], eps: &[f64]) -> Vec<f64> {
        let db: Vec<f64> = (0..self.m).map(|h| dot(self.d_row(h), beta)).collect();
        self.rows
            .iter()
            .map(|row| row.sign * db[row.h] - eps[row.h])
            .collect()
    }

    /// `G^T v`, split into the beta and eps blocks.
    fn gt_mul(&self, v: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut coef = vec![0.0; self.m];
        let mut ge = vec![0.0; self.m];
        for (row, vc) in self.rows.iter().zip(v) {
            coef[row.h] += row.sign * vc;
            ge[row.h] -= vc;
        }
        let mut gb = vec![0.0; self.n];
        for h in 0..self.m {
            if coef[h] != 0.0 {
                axpy(coef[h], self.d_row(h), &mut gb);
            }
        }
        (gb, ge)
    }

    fn objective(&self, beta: &[f64], eps: &[f64]) -> f64 {
        0.5 * self.lambda * dot(beta, beta) + dot(self.r, eps)
    }
}

/// Factorization of `P + G^T W G` reduced onto the beta block.
struct Newton {
    chol: Vec<f64>,
    /// Per comparison: sum of `w_c sign_c` and the eps-block diagonal.
    gamma: Vec<f64>,
    diag: Vec<f64>,
}

impl Newton {
    fn factor(p: &Problem<'_>, w: &[f64]) -> Option<Newton> {
        let (n, m) = (p.n, p.m);
        let mut sum_w = vec![0.0; m];
        let mut gamma = vec![0.0; m];
        let mut diag = vec![0.0; m];
        for (row, wc) in p.rows.iter().zip(w) {
            diag[row.h] += wc;
            if row.sign != 0.0 {
                sum_w[row.h] += wc;
                gamma[row.h] += wc * row.sign;
            }
        }
        let mut a = vec![0.0; n * n];
        for h in 0..m {
            let alpha = sum_w[h] - gamma[h] * gamma[h] / diag[h];
            if alpha <= 0.0 {
                continue;
            }
            let dh = p.d_row(h);
            for i in 0..n {
                let ai = alpha * dh[i];
                if ai == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    a[i * n + j] += ai * dh[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                a[j * n + i] = a[i * n + j];
            }
        }
        let scale = (0..n).fold(0.0f64, |acc, i| acc.max(a[i * n + i]));
        // Near the optimum the weights spread over many orders of magnitude;
        // grow the diagonal shift until the factorization succeeds.
        let mut shift = p.lambda.max(LAMBDA_FLOOR);
        loop {
            let mut l = a.clone();
            for i in 0..n {
                l[i * n + i] += shift;
            }
            if cholesky(&mut l, n) {
                return Some(Newton {
                    chol: l,
                    gamma,
                    diag,
                });
            }
            shift = (shift * 100.0).max(1e-14 * scale);
            if shift > 1e-8 * scale.max(1.0) {
                return None;
            }
        }
    }

    /// Solves the reduced system for right-hand side `[rb; re]`.
    fn solve(&self, p: &Problem<'_>, rb: &[f64], re: &[f64]) -> (Vec<f64>, Vec<f64>) {
        // B has column h equal to -gamma_h D_h^T.
        let mut rhs = rb.to_vec();
        for h in 0..p.m {
            let c = self.gamma[h] * re[h] / self.diag[h];
            if c != 0.0 {
                axpy(c, p.d_row(h), &mut rhs);
            }
        }
        cholesky_solve(&self.chol, p.n, &mut rhs);
        let dbeta = rhs;
        let deps = (0..p.m)
            .map(|h| (re[h] + self.gamma[h] * dot(p.d_row(h), &dbeta)) / self.diag[h])
            .collect();
        (dbeta, deps)
    }
}

pub(crate) fn fit_with_kernel(
    kernel: &[f64],
    n: usize,
    comparisons: &[Comparison],
    r: &[f64],
    lambda: f64,
    sigma: f64,
) -> Result<WeightFit> {
    let m = comparisons.len();
    if m == 0 {
        return Ok(WeightFit {
            beta: vec![0.0; n],
            slacks: Vec::new(),
            objective: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut d = vec![0.0; m * n];
    let mut rows = Vec::with_capacity(3 * m);
    for (h, c) in comparisons.iter().enumerate() {
        for j in 0..n {
            d[h * n + j] = kernel[c.first * n + j] - kernel[c.second * n + j];
        }
        match c.outcome {
            Preference::FirstBetter => rows.push(Row {
                h,
                sign: 1.0,
                rhs: -sigma,
            }),
            Preference::SecondBetter => rows.push(Row {
                h,
                sign: -1.0,
                rhs: -sigma,
            }),
            Preference::Indifferent => {
                rows.push(Row {
                    h,
                    sign: 1.0,
                    rhs: sigma,
                });
                rows.push(Row {
                    h,
                    sign: -1.0,
                    rhs: sigma,
                });
            }
        }
        rows.push(Row {
            h,
            sign: 0.0,
            rhs: 0.0,
        });
    }
    let p = Problem {
        n,
        m,
        lambda,
        d,
        r,
        rows,
    };
    let rc = p.rows.len();
    let h_norm = 1.0 + sigma;
    let q_norm = 1.0 + r.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut beta = vec![0.0; n];
    let mut eps = vec![1.0 + sigma; m];
    let gx = p.g_mul(&beta, &eps);
    let mut s: Vec<f64> = p
        .rows
        .iter()
        .zip(&gx)
        .map(|(row, g)| (row.rhs - g).max(1.0))
        .collect();
    let mut z = vec![1.0; rc];

    let mut converged = false;
    let mut iterations = 0;
    // Close to the optimum the complementarity pairs separate by many orders of
    // magnitude and the reduced system loses the regularization to rounding, so
    // the iterate with the smallest normalized residual is kept.
    let mut best = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut best_iter = (beta.clone(), s.clone(), z.clone());
    for it in 0..MAX_ITERS {
        iterations = it;
        // Residuals: r_x = P x + q + G^T z, r_s = G x + s - h.
        let (gtz_b, gtz_e) = p.gt_mul(&z);
        let rx_b: Vec<f64> = (0..n).map(|i| p.lambda * beta[i] + gtz_b[i]).collect();
        let rx_e: Vec<f64> = (0..m).map(|h| r[h] + gtz_e[h]).collect();
        let gx = p.g_mul(&beta, &eps);
        let rs: Vec<f64> = (0..rc).map(|c| gx[c] + s[c] - p.rows[c].rhs).collect();
        let mu = dot(&s, &z) / rc as f64;

        let dscale = q_norm.max(inf_norm(&gtz_b)).max(p.lambda * inf_norm(&beta));
        let obj = p.objective(&beta, &eps);
        let cur = (
            inf_norm(&rs) / h_norm,
            inf_norm(&rx_b).max(inf_norm(&rx_e)) / dscale,
            mu * rc as f64 / (1.0 + obj.abs()),
        );
        let merit = cur.0.max(cur.1).max(cur.2);
        if merit < best.0.max(best.1).max(best.2) {
            best = cur;
            best_iter = (beta.clone(), s.clone(), z.clone());
        }
        if merit <= TOL {
            converged = true;
            break;
        }
        if best.0.max(best.1).max(best.2) <= STALL_TOL
            && merit > 1e3 * best.0.max(best.1).max(best.2)
        {
            break;
        }

        let w: Vec<f64> = (0..rc).map(|c| z[c] / s[c]).collect();
        let newton = match Newton::factor(&p, &w) {
            Some(f) => f,
            None => break,
        };

        let solve_dir = |rcomp: &[f64]| -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
            // (P + G^T W G) dx = -r_x - G^T W (r_s - r_c / z)
            let v: Vec<f64> = (0..rc).map(|c| w[c] * (rs[c] - rcomp[c] / z[c])).collect();
            let (vb, ve) = p.gt_mul(&v);
            let rb: Vec<f64> = (0..n).map(|i| -rx_b[i] - vb[i]).collect();
            let re: Vec<f64> = (0..m).map(|h| -rx_e[h] - ve[h]).collect();
            let (db, de) = newton.solve(&p, &rb, &re);
            let gdx = p.g_mul(&db, &de);
            let dz: Vec<f64> = (0..rc)
                .map(|c| w[c] * (gdx[c] + rs[c] - rcomp[c] / z[c]))
                .collect();
            let ds: Vec<f64> = (0..rc).map(|c| -(rcomp[c] + s[c] * dz[c]) / z[c]).collect();
            (db, de, ds, dz)
        };

        let aff_comp: Vec<f64> = (0..rc).map(|c| s[c] * z[c]).collect();
        let (_, _, ds_a, dz_a) = solve_dir(&aff_comp);
        let alpha_a = max_step(&s, &ds_a).min(max_step(&z, &dz_a)).min(1.0);
        let mu_a = (0..rc)
            .map(|c| (s[c] + alpha_a * ds_a[c]) * (z[c] + alpha_a * dz_a[c]))
            .sum::<f64>()
            / rc as f64;
        let ratio = mu_a / mu;
        let centering = ratio * ratio * ratio;

        let comp: Vec<f64> = (0..rc)
            .map(|c| s[c] * z[c] + ds_a[c] * dz_a[c] - centering * mu)
            .collect();
        let (db, de, ds, dz) = solve_dir(&comp);
        let alpha = (0.99 * max_step(&s, &ds).min(max_step(&z, &dz))).min(1.0);
        if !(alpha > 0.0)
            || db
                .iter()
                .chain(&de)
                .chain(&ds)
                .chain(&dz)
                .any(|v| !v.is_finite())
        {
            break;
        }
        axpy(alpha, &db, &mut beta);
        axpy(alpha, &de, &mut eps);
        axpy(alpha, &ds, &mut s);
        axpy(alpha, &dz, &mut z);
        iterations = it + 1;
    }

    let (mut beta, s, z) = best_iter;
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            iterations,
            detail: "interior point iterate diverged".into(),
        });
    }
    // A stalled iterate is accepted when its duality gap is certified or its
    // residuals are already small.
    if !converged && p.lambda > 0.0 {
        let upper = p.objective(&beta, &exact_slacks(&p, &beta));
        converged = upper - dual_bound(&p, &z) <= CERT_TOL * (1.0 + upper.abs());
    }
    if !converged && best.0 <= STALL_TOL && best.1 <= STALL_TOL && best.2 <= STALL_TOL {
        converged = true;
    }
    if !converged {
        return Err(Error::Numerical {
            iterations,
            detail: format!(
                "interior point stalled: primal {:e}, dual {:e}, gap {:e}",
                best.0, best.1, best.2
            ),
        });
    }
    let mut slacks = exact_slacks(&p, &beta);
    let mut objective = p.objective(&beta, &slacks);
    if p.lambda > 0.0 {
        if let Some(polished) = polish(&p, &s, &z) {
            let ps = exact_slacks(&p, &polished);
            let po = p.objective(&polished, &ps);
            if po <= objective + 1e-12 * (1.0 + objective.abs()) {
                beta = polished;
                slacks = ps;
                objective = po;
            }
        }
    }
    Ok(WeightFit {
        beta,
        slacks,
        objective,
        iterations,
        converged,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Inactive,
    /// Row holds with equality and zero slack.
    Hard(usize),
    /// Row holds with equality through a positive slack.
    Linear(usize),
}

/// Primal-dual active set refinement started from the interior point
/// complementarity pairs. Interior point iterates only pin `beta` to about
/// `sqrt(gap / lambda)`, which is loose when the slack terms dominate.
fn polish(p: &Problem<'_>, s: &[f64], z: &[f64]) -> Option<Vec<f64>> {
    let mut modes = vec![Mode::Inactive; p.m];
    let mut bound_active = vec![false; p.m];
    for (c, row) in p.rows.iter().enumerate() {
        if row.sign == 0.0 {
            bound_active[row.h] = z[c] > s[c];
        }
    }
    for (c, row) in p.rows.iter().enumerate() {
        if row.sign != 0.0 && z[c] > s[c] {
            modes[row.h] = if bound_active[row.h] {
                Mode::Hard(c)
            } else {
                Mode::Linear(c)
            };
        }
    }
    for _ in 0..4 * p.rows.len() + 4 {
        let (beta, nu) = solve_active(p, &modes)?;
        let db: Vec<f64> = (0..p.m).map(|h| dot(p.d_row(h), &beta)).collect();
        let tol = 1e-12 * (1.0 + inf_norm(&db));
        let viol = |c: usize| p.rows[c].sign * db[p.rows[c].h] - p.rows[c].rhs;
        let mut changed = false;
        for h in 0..p.m {
            let next = match modes[h] {
                Mode::Hard(_) if nu[h] < -1e-12 => Mode::Inactive,
                Mode::Hard(c) if nu[h] > p.r[h] * (1.0 + 1e-12) => Mode::Linear(c),
                Mode::Linear(c) if viol(c) < -tol => Mode::Hard(c),
                Mode::Inactive => {
                    let worst = p
                        .rows
                        .iter()
                        .enumerate()
                        .filter(|(c, row)| row.h == h && row.sign != 0.0 && viol(*c) > tol)
                        .map(|(c, _)| c)
                        .next();
                    worst.map_or(Mode::Inactive, Mode::Hard)
                }
                m => m,
            };
            if next != modes[h] {
                modes[h] = next;
                changed = true;
            }
        }
        if !changed {
            return Some(beta);
        }
    }
    None
}

/// Minimizes `lambda/2 |beta|^2` plus the linear slack terms subject to the
/// hard rows. Returns `beta` and the multiplier of each hard row.
fn solve_active(p: &Problem<'_>, modes: &[Mode]) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = p.n;
    let mut lin = vec![0.0; n];
    let mut eq: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for (h, mode) in modes.iter().enumerate() {
        match *mode {
            Mode::Inactive => {}
            Mode::Hard(c) => {
                let row = p.rows[c];
                eq.push((
                    h,
                    p.d_row(h).iter().map(|v| row.sign * v).collect(),
                    row.rhs,
                ));
            }
            Mode::Linear(c) => axpy(p.r[h] * p.rows[c].sign, p.d_row(h), &mut lin),
        }
    }
    // lambda beta + lin + A^T nu = 0 and A beta = b give (A A^T) nu = -lambda b - A lin.
    let k = eq.len();
    let mut beta: Vec<f64> = lin.iter().map(|v| -v / p.lambda).collect();
    let mut nu_h = vec![0.0; p.m];
    if k > 0 {
        let mut aat = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let v = dot(&eq[i].1, &eq[j].1);
                aat[i * k + j] = v;
                aat[j * k + i] = v;
            }
        }
        let trace: f64 = (0..k).map(|i| aat[i * k + i]).sum();
        let mut chol = aat.clone();
        if !cholesky(&mut chol, k) {
            chol.copy_from_slice(&aat);
            for i in 0..k {
                chol[i * k + i] += 1e-14 * trace.max(1e-300);
            }
            if !cholesky(&mut chol, k) {
                return None;
            }
        }
        let mut nu: Vec<f64> = eq
            .iter()
            .map(|(_, a, b)| -p.lambda * b - dot(a, &lin))
            .collect();
        cholesky_solve(&chol, k, &mut nu);
        let beta_of = |nu: &[f64]| {
            let mut beta = beta.clone();
            for ((_, a, _), v) in eq.iter().zip(nu) {
                axpy(-v / p.lambda, a, &mut beta);
            }
            beta
        };
        // Iterative refinement: the residual of A A^T nu = rhs is lambda (A beta - b).
        for _ in 0..2 {
            let bt = beta_of(&nu);
            let mut corr: Vec<f64> = eq
                .iter()
                .map(|(_, a, b)| p.lambda * (dot(a, &bt) - b))
                .collect();
            cholesky_solve(&chol, k, &mut corr);
            axpy(1.0, &corr, &mut nu);
        }
        beta = beta_of(&nu);
        for ((h, _, _), v) in eq.iter().zip(&nu) {
            nu_h[*h] = *v;
        }
    }
    beta.iter().all(|v| v.is_finite()).then_some((beta, nu_h))
}

/// Lagrange dual value at `z` after scaling it onto the dual feasible set of
/// the slack block; a lower bound on the optimum when `lambda > 0`.
fn dual_bound(p: &Problem<'_>, z: &[f64]) -> f64 {
    let mut strict = vec![0.0; p.m];
    for (row, zc) in p.rows.iter().zip(z) {
        if row.sign != 0.0 {
            strict[row.h] += zc;
        }
    }
    let shrink: Vec<f64> = (0..p.m)
        .map(|h| {
            if strict[h] > p.r[h] {
                p.r[h] / strict[h]
            } else {
                1.0
            }
        })
        .collect();
    let mut coef = vec![0.0; p.m];
    let mut hz = 0.0;
    for (row, zc) in p.rows.iter().zip(z) {
        if row.sign != 0.0 {
            let zs = zc * shrink[row.h];
            coef[row.h] += row.sign * zs;
            hz += row.rhs * zs;
        }
    }
    let mut v = vec![0.0; p.n];
    for h in 0..p.m {
        axpy(coef[h], p.d_row(h), &mut v);
    }
    -dot(&v, &v) / (2.0 * p.lambda) - hz
}

/// Smallest nonnegative slack making each comparison feasible for fixed beta.
fn exact_slacks(p: &Problem<'_>, beta: &[f64]) -> Vec<f64> {
    let mut eps = vec![0.0f64; p.m];
    for row in &p.rows {
        if row.sign != 0.0 {
            let viol = row.sign * dot(p.d_row(row.h), beta) - row.rhs;
            eps[row.h] = eps[row.h].max(viol);
        }
    }
    eps
}

fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .map(|(x, d)| -x / d)
        .fold(f64::INFINITY, f64::min)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, b| a.max(b.abs()))
}
