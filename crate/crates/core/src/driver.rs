//! The optimization loop as an ask/tell state machine: a Latin hypercube
//! design, sequential incumbent comparisons, then one surrogate-guided
//! proposal per answered query.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::acquisition::{AcquisitionContext, DeltaCycle, Variant, LEGACY_DELTA};
use crate::error::{check_dim, Error, Result};
use crate::inner::{minimize_acquisition, multistart_refine, PsoConfig};
use crate::linalg::dist_sq;
use crate::problem::{latin_hypercube, make_rescaler, AffineRescaler, ConstraintSet};
use crate::rescaling::augment;
use crate::rng::{derive_seed, Rng};
use crate::surrogate::{
    fit_weights, loocv_select, Comparison, FitSettings, LoocvHoldout, Preference,
    PreferenceDataset, RadialKind, RbfSurrogate, DEFAULT_LOOCV_GRID,
};

/// Proposals closer than this to an existing sample count as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-9;

const STREAM_DESIGN: u64 = 0;
const STREAM_AUGMENT: u64 = 1 << 32;
const STREAM_SWARM: u64 = 2 << 32;
const STREAM_RANDOM: u64 = 3 << 32;

/// Answers `pi(first, second)`: `-1` if `first` is preferred, `0` if
/// indifferent, `+1` if `second` is preferred.
pub trait PreferenceOracle {
    fn query(&mut self, first: &[f64], second: &[f64]) -> i8;
}

impl<F: FnMut(&[f64], &[f64]) -> i8> PreferenceOracle for F {
    fn query(&mut self, first: &[f64], second: &[f64]) -> i8 {
        self(first, second)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    /// Size of the initial design; `None` means `4 n`.
    pub n_init: Option<usize>,
    pub n_max: usize,
    pub kind: RadialKind,
    pub epsilon_init: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub delta_cycle: DeltaCycle,
    pub k_aug: usize,
    /// Post-design iterations (counted from 1) at which the shape parameter is recalibrated.
    pub recal_iters: Vec<usize>,
    pub loocv_grid: Vec<f64>,
    pub loocv_holdout: LoocvHoldout,
    pub variant: Variant,
    /// Exploration weight of the legacy acquisitions.
    pub legacy_delta: f64,
    /// Polish pure-exploration proposals with the multistart gradient refiner.
    pub refine_exploration: bool,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_init: None,
            n_max: 200,
            kind: RadialKind::InverseQuadratic,
            epsilon_init: 1.0,
            sigma: 1e-2,
            lambda: 1e-6,
            delta_cycle: DeltaCycle::default(),
            k_aug: 5,
            recal_iters: vec![1, 50, 100],
            loocv_grid: DEFAULT_LOOCV_GRID.to_vec(),
            loocv_holdout: LoocvHoldout::Preference,
            variant: Variant::GlispR,
            legacy_delta: LEGACY_DELTA,
            refine_exploration: true,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn n_init_for(&self, dim: usize) -> usize {
        self.n_init.unwrap_or(4 * dim)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let n_init = self.n_init_for(dim);
        if n_init < 2 {
            return Err(Error::InvalidInput(format!(
                "n_init must be at least 2, got {n_init}"
            )));
        }
        if self.n_max <= n_init {
            return Err(Error::InvalidInput(format!(
                "n_max ({}) must exceed n_init ({n_init})",
                self.n_max
            )));
        }
        if self.k_aug == 0 {
            return Err(Error::InvalidInput("k_aug must be positive".into()));
        }
        if self.recal_iters.contains(&0) {
            return Err(Error::InvalidInput(
                "recalibration iterations are counted from 1".into(),
            ));
        }
        if self.loocv_grid.is_empty()
            || self
                .loocv_grid
                .iter()
                .any(|e| !(*e > 0.0) || !e.is_finite())
        {
            return Err(Error::InvalidInput(
                "shape grid must be non-empty and positive".into(),
            ));
        }
        if !(self.legacy_delta >= 0.0) || !self.legacy_delta.is_finite() {
            return Err(Error::InvalidInput(
                "legacy delta must be nonnegative".into(),
            ));
        }
        DeltaCycle::new(self.delta_cycle.sequence().to_vec())?;
        self.fit_settings(self.epsilon_init).validate()
    }

    fn fit_settings(&self, epsilon: f64) -> FitSettings {
        FitSettings {
            kind: self.kind,
            epsilon,
            lambda: self.lambda,
            sigma: self.sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Phase {
    InitialQueries,
    Iterating,
    Done,
}

/// How a proposal was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProposalSource {
    /// Point of the initial design.
    Design,
    /// Minimizer of the configured acquisition.
    Acquisition,
    /// The acquisition minimizer duplicated a sample; pure exploration was used instead.
    ExplorationFallback,
    /// Both solves returned duplicates; a uniform draw in the box was used.
    RandomFallback,
    /// The weight fit failed; pure exploration was used.
    FitFailedFallback,
}

/// The comparison the session is waiting on. Vectors are in original units.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PendingQuery {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub first_index: usize,
    pub second_index: usize,
    /// Index of the sample that is not yet evaluated.
    pub candidate_index: usize,
    pub incumbent_index: usize,
    pub source: ProposalSource,
    /// Exploration weight used to produce the candidate; `None` for design points.
    pub delta: Option<f64>,
    /// Post-design iteration, 0 during the initial queries.
    pub iteration: usize,
    /// False when no feasible point was found for the general constraints.
    pub feasible: bool,
}

/// One answered query.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IterationRecord {
    pub iteration: usize,
    pub candidate_index: usize,
    /// Candidate in original units.
    pub candidate: Vec<f64>,
    pub incumbent_index: usize,
    /// Answer as given, i.e. `pi(first, second)` of the pending query.
    pub answer: i8,
    pub improved: bool,
    pub best_index: usize,
    pub delta: Option<f64>,
    pub epsilon: f64,
    pub source: ProposalSource,
}

/// Ask/tell optimization session. Fully determined by the problem, the
/// configuration and the sequence of answers.
#[derive(Debug, Clone)]
pub struct Session {
    cfg: SolverConfig,
    problem: ConstraintSet,
    scaled: ConstraintSet,
    rescaler: AffineRescaler,
    design: Vec<Vec<f64>>,
    data: PreferenceDataset,
    cycle: DeltaCycle,
    epsilon: f64,
    iteration: usize,
    history: Vec<IterationRecord>,
    pending: Option<PendingQuery>,
    candidate: Option<Vec<f64>>,
    /// Best index after each sample count; entry `i` covers `i + 1` samples.
    best_trace: Vec<usize>,
}

impl Session {
    /// Rescales the problem, draws the design and exposes the first query.
    pub fn new(problem: ConstraintSet, cfg: SolverConfig) -> Result<Self> {
        let dim = problem.dim();
        cfg.validate(dim)?;
        let rescaler = make_rescaler(&problem)?;
        let scaled = rescaler.rescale_constraints(&problem);
        let n_init = cfg.n_init_for(dim);
        let design = latin_hypercube(
            scaled.lower(),
            scaled.upper(),
            n_init,
            derive_seed(cfg.seed, STREAM_DESIGN),
        )?;
        let data = PreferenceDataset {
            samples: vec![design[0].clone()],
            comparisons: Vec::new(),
            best_index: 0,
        };
        let cycle = DeltaCycle::new(cfg.delta_cycle.sequence().to_vec())?;
        let epsilon = cfg.epsilon_init;
        let mut s = Session {
            cfg,
            problem,
            scaled,
            rescaler,
            design,
            data,
            cycle,
            epsilon,
            iteration: 0,
            history: Vec::new(),
            pending: None,
            candidate: None,
            best_trace: vec![0],
        };
        s.propose()?;
        Ok(s)
    }

    /// Rebuilds a session from its answers.
    pub fn replay(problem: ConstraintSet, cfg: SolverConfig, answers: &[i8]) -> Result<Self> {
        let mut s = Session::new(problem, cfg)?;
        for &b in answers {
            s.answer(b)?;
        }
        Ok(s)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn problem(&self) -> &ConstraintSet {
        &self.problem
    }

    pub fn rescaler(&self) -> &AffineRescaler {
        &self.rescaler
    }

    pub fn phase(&self) -> Phase {
        if self.data.len() >= self.cfg.n_max {
            Phase::Done
        } else if self.data.len() < self.design.len() {
            Phase::InitialQueries
        } else {
            Phase::Iterating
        }
    }

    /// The query awaiting an answer; `None` once done or while a proposal is due.
    pub fn pending(&self) -> Option<&PendingQuery> {
        self.pending.as_ref()
    }

    /// True after [`Session::tell`] until [`Session::advance`] has computed the next query.
    pub fn needs_proposal(&self) -> bool {
        self.pending.is_none() && self.phase() != Phase::Done
    }

    pub fn history(&self) -> &[IterationRecord] {
        &self.history
    }

    pub fn queries_answered(&self) -> usize {
        self.history.len()
    }

    /// Samples and comparisons in rescaled coordinates.
    pub fn dataset(&self) -> &PreferenceDataset {
        &self.data
    }

    pub fn cycle(&self) -> &DeltaCycle {
        &self.cycle
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Completed post-design iterations.
    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Evaluated samples in original units.
    pub fn samples(&self) -> Vec<Vec<f64>> {
        self.data
            .samples
            .iter()
            .map(|y| self.rescaler.inverse(y))
            .collect()
    }

    pub fn best_index(&self) -> usize {
        self.data.best_index
    }

    pub fn best(&self) -> Vec<f64> {
        self.rescaler.inverse(self.data.best())
    }

    /// Best sample index after `N = 1, 2, ...` samples.
    pub fn best_trace(&self) -> &[usize] {
        &self.best_trace
    }

    /// Surrogate fitted to the current data in rescaled coordinates.
    pub fn surrogate(&self) -> Result<RbfSurrogate> {
        let settings = self.cfg.fit_settings(self.epsilon);
        Ok(fit_weights(&self.data, &settings)?.surrogate(&self.data, &settings))
    }

    /// Records the answer to the pending query and computes the next one.
    pub fn answer(&mut self, b: i8) -> Result<()> {
        self.tell(b)?;
        self.advance()
    }

    /// Records the answer without computing the next query.
    pub fn tell(&mut self, b: i8) -> Result<()> {
        let outcome = Preference::try_from(b)?;
        let q = self
            .pending
            .take()
            .ok_or_else(|| Error::Protocol("no query is pending".into()))?;
        let y = self
            .candidate
            .take()
            .expect("pending query has a candidate");
        let candidate_index = self.data.len();
        self.data.samples.push(y);
        self.data.comparisons.push(Comparison {
            first: q.first_index,
            second: q.second_index,
            outcome,
        });
        let candidate_won = match outcome {
            Preference::FirstBetter => q.first_index == candidate_index,
            Preference::SecondBetter => q.second_index == candidate_index,
            Preference::Indifferent => false,
        };
        if candidate_won {
            self.data.best_index = candidate_index;
        }
        if q.iteration > 0 {
            self.iteration = q.iteration;
            if self.cfg.variant == Variant::GlispR {
                self.cycle.step(candidate_won);
            }
        }
        self.best_trace.push(self.data.best_index);
        self.history.push(IterationRecord {
            iteration: q.iteration,
            candidate_index,
            candidate: if q.first_index == candidate_index {
                q.first
            } else {
                q.second
            },
            incumbent_index: q.incumbent_index,
            answer: b,
            improved: candidate_won,
            best_index: self.data.best_index,
            delta: q.delta,
            epsilon: self.epsilon,
            source: q.source,
        });
        Ok(())
    }

    /// Computes the next query if one is due. No-op otherwise.
    pub fn advance(&mut self) -> Result<()> {
        if self.needs_proposal() {
            self.propose()?;
        }
        Ok(())
    }

    fn propose(&mut self) -> Result<()> {
        let n = self.data.len();
        if n >= self.cfg.n_max {
            return Ok(());
        }
        let incumbent = self.data.best_index;
        let (y, source, delta, iteration, feasible) = if n < self.design.len() {
            (
                self.design[n].clone(),
                ProposalSource::Design,
                None,
                0,
                true,
            )
        } else {
            let k = self.iteration + 1;
            let (y, source, delta, feasible) = self.search(k)?;
            (y, source, Some(delta), k, feasible)
        };
        // Initial queries compare the incumbent first; later ones the candidate first.
        let (first_index, second_index) = if iteration == 0 {
            (incumbent, n)
        } else {
            (n, incumbent)
        };
        let x_new = self.rescaler.inverse(&y);
        let x_best = self.rescaler.inverse(&self.data.samples[incumbent]);
        let (first, second) = if iteration == 0 {
            (x_best, x_new)
        } else {
            (x_new, x_best)
        };
        self.candidate = Some(y);
        self.pending = Some(PendingQuery {
            first,
            second,
            first_index,
            second_index,
            candidate_index: n,
            incumbent_index: incumbent,
            source,
            delta,
            iteration,
            feasible,
        });
        Ok(())
    }

    /// One acquisition solve in rescaled coordinates for iteration `k`.
    fn search(&mut self, k: usize) -> Result<(Vec<f64>, ProposalSource, f64, bool)> {
        let dim = self.scaled.dim();
        if self.cfg.recal_iters.contains(&k) {
            let settings = self.cfg.fit_settings(self.epsilon);
            if let Ok((eps, _)) = loocv_select(
                &self.data,
                &settings,
                &self.cfg.loocv_grid,
                self.cfg.loocv_holdout,
            ) {
                self.epsilon = eps;
            }
        }
        let delta = match self.cfg.variant {
            Variant::GlispR => self.cycle.delta(),
            _ => self.cfg.legacy_delta,
        };
        let settings = self.cfg.fit_settings(self.epsilon);
        let pso = PsoConfig::for_dim(dim, derive_seed(self.cfg.seed, STREAM_SWARM + k as u64));
        let fit = fit_weights(&self.data, &settings);
        let (ctx, mut source) = match fit {
            Ok(fit) => (
                self.acquisition(fit.surrogate(&self.data, &settings), delta, k)?,
                ProposalSource::Acquisition,
            ),
            Err(Error::Numerical { .. }) => {
                let flat = RbfSurrogate::new(
                    settings.kind,
                    settings.epsilon,
                    self.data.samples.clone(),
                    vec![0.0; self.data.len()],
                )?;
                (
                    self.acquisition(flat, delta, k)?.exploration_only(),
                    ProposalSource::FitFailedFallback,
                )
            }
            Err(e) => return Err(e),
        };
        let (mut y, mut feasible) = self.minimize(&ctx, &pso, k)?;
        if self.is_duplicate(&y) {
            let explore = ctx.exploration_only();
            let (y2, f2) = self.minimize(&explore, &pso, k)?;
            y = y2;
            feasible = f2;
            source = ProposalSource::ExplorationFallback;
            if self.is_duplicate(&y) {
                let mut rng = Rng::seed_from(derive_seed(self.cfg.seed, STREAM_RANDOM + k as u64));
                let (lo, hi) = (self.scaled.lower(), self.scaled.upper());
                loop {
                    y = (0..dim).map(|d| rng.uniform_in(lo[d], hi[d])).collect();
                    if !self.is_duplicate(&y) {
                        break;
                    }
                }
                feasible = self
                    .scaled
                    .is_feasible(&y, crate::inner::FEASIBILITY_TOL_EQ)?;
                source = ProposalSource::RandomFallback;
            }
        }
        Ok((y, source, delta, feasible))
    }

    fn acquisition(
        &self,
        surrogate: RbfSurrogate,
        delta: f64,
        k: usize,
    ) -> Result<AcquisitionContext> {
        match self.cfg.variant {
            Variant::GlispR => {
                let aug = augment(
                    &self.data.samples,
                    self.cfg.k_aug,
                    self.scaled.lower(),
                    self.scaled.upper(),
                    derive_seed(self.cfg.seed, STREAM_AUGMENT + k as u64),
                )?;
                AcquisitionContext::glisp_r(surrogate, &aug, delta)
            }
            Variant::GlispLegacy => AcquisitionContext::glisp_legacy(surrogate, delta),
            Variant::CGlispLegacy => {
                AcquisitionContext::cglisp(surrogate, delta, self.data.best_index, self.cfg.n_max)
            }
        }
    }

    /// Swarm solve, polished by the gradient refiner on pure-exploration steps.
    fn minimize(
        &self,
        ctx: &AcquisitionContext,
        pso: &PsoConfig,
        k: usize,
    ) -> Result<(Vec<f64>, bool)> {
        let r = minimize_acquisition(|x| ctx.eval(x), &self.scaled, pso)?;
        let mut y = r.x;
        if self.cfg.refine_exploration
            && ctx.is_pure_exploration()
            && self.scaled.is_box_only()
            && ctx.gradient(&y).is_some()
        {
            let aug = augment(
                &self.data.samples,
                self.cfg.k_aug,
                self.scaled.lower(),
                self.scaled.upper(),
                derive_seed(self.cfg.seed, STREAM_AUGMENT + k as u64),
            )?;
            let mut starts: Vec<Vec<f64>> = aug.points[aug.source_count..].to_vec();
            starts.push(y.clone());
            let grad = |x: &[f64]| ctx.gradient(x).unwrap_or_else(|| vec![0.0; x.len()]);
            let (y2, v2) = multistart_refine(
                |x| ctx.eval(x),
                grad,
                &starts,
                self.scaled.lower(),
                self.scaled.upper(),
            )?;
            if v2 < r.value && !self.is_duplicate(&y2) {
                y = y2;
            }
        }
        Ok((y, r.feasible))
    }

    fn is_duplicate(&self, y: &[f64]) -> bool {
        self.data
            .samples
            .iter()
            .any(|s| dist_sq(s, y) <= DUPLICATE_TOL * DUPLICATE_TOL)
    }
}

/// Outcome of [`solve`].
#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Best sample in original units.
    pub x_best: Vec<f64>,
    pub session: Session,
}

/// Runs a full session against `oracle`, issuing `n_max - 1` queries.
pub fn solve<O: PreferenceOracle + ?Sized>(
    problem: ConstraintSet,
    oracle: &mut O,
    cfg: SolverConfig,
) -> Result<SolveOutput> {
    let mut session = Session::new(problem, cfg)?;
    while let Some(q) = session.pending() {
        let b = oracle.query(&q.first, &q.second);
        session.answer(b)?;
    }
    Ok(SolveOutput {
        x_best: session.best(),
        session,
    })
}

/// Runs the incumbent comparisons over a fixed list of samples. Queries are
/// `pi(x_best, x_i)` for `i = 2, 3, ...`; the incumbent changes only on `+1`.
pub fn initial_queries<O: PreferenceOracle + ?Sized>(
    samples: &[Vec<f64>],
    oracle: &mut O,
) -> Result<PreferenceDataset> {
    if samples.len() < 2 {
        return Err(Error::InvalidInput(
            "at least two samples are required".into(),
        ));
    }
    let dim = samples[0].len();
    let mut best = 0;
    let mut comparisons = Vec::with_capacity(samples.len() - 1);
    for (i, s) in samples.iter().enumerate().skip(1) {
        check_dim(dim, s.len())?;
        let outcome = Preference::try_from(oracle.query(&samples[best], s))?;
        comparisons.push(Comparison {
            first: best,
            second: i,
            outcome,
        });
        if outcome == Preference::SecondBetter {
            best = i;
        }
    }
    let data = PreferenceDataset {
        samples: samples.to_vec(),
        comparisons,
        best_index: best,
    };
    data.validate()?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> ConstraintSet {
        ConstraintSet::new(vec![-1.0], vec![1.0]).unwrap()
    }

    fn dm(f: fn(&[f64]) -> f64) -> impl FnMut(&[f64], &[f64]) -> i8 {
        move |a: &[f64], b: &[f64]| Preference::from_scores(f(a), f(b)).as_i8()
    }

    fn small(n_init: usize, n_max: usize) -> SolverConfig {
        SolverConfig {
            n_init: Some(n_init),
            n_max,
            seed: 5,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn rejects_budget_not_above_design() {
        assert!(Session::new(line(), small(4, 4)).is_err());
        assert!(Session::new(line(), small(1, 4)).is_err());
        let cfg = SolverConfig {
            n_max: 4,
            ..SolverConfig::default()
        };
        assert!(Session::new(line(), cfg).is_err());
    }

    #[test]
    fn initial_queries_trace_the_incumbent() {
        let samples = vec![vec![3.0], vec![1.0], vec![2.0]];
        let mut asked = Vec::new();
        let mut oracle = |a: &[f64], b: &[f64]| {
            asked.push((a[0], b[0]));
            Preference::from_scores(a[0], b[0]).as_i8()
        };
        let data = initial_queries(&samples, &mut oracle).unwrap();
        assert_eq!(asked, vec![(3.0, 1.0), (1.0, 2.0)]);
        assert_eq!(data.best_index, 1);
        assert_eq!(data.comparisons.len(), 2);
        let tie = initial_queries(&samples[..2], &mut |_: &[f64], _: &[f64]| 0i8).unwrap();
        assert_eq!(tie.best_index, 0);
        assert!(matches!(
            initial_queries(&samples, &mut |_: &[f64], _: &[f64]| 2i8),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn bookkeeping_per_answer() {
        let mut s = Session::new(line(), small(3, 8)).unwrap();
        assert_eq!(s.phase(), Phase::InitialQueries);
        let mut oracle = dm(|x| x[0] * x[0]);
        while let Some(q) = s.pending().cloned() {
            let (n, m) = (s.dataset().len(), s.dataset().comparisons.len());
            s.answer(oracle.query(&q.first, &q.second)).unwrap();
            assert_eq!(
                (s.dataset().len(), s.dataset().comparisons.len()),
                (n + 1, m + 1)
            );
            assert_eq!(s.dataset().comparisons.len(), s.dataset().len() - 1);
        }
        assert_eq!(s.phase(), Phase::Done);
        assert_eq!(s.queries_answered(), 7);
        assert_eq!(s.best_trace().len(), 8);
        assert!(s.answer(0).is_err());
    }

    #[test]
    fn improvement_keeps_delta_and_failure_advances_it() {
        let mut s = Session::new(line(), small(2, 10)).unwrap();
        s.answer(0).unwrap();
        assert_eq!(s.phase(), Phase::Iterating);
        let q = s.pending().unwrap().clone();
        assert_eq!(
            (q.first_index, q.second_index),
            (q.candidate_index, q.incumbent_index)
        );
        assert_eq!(q.delta, Some(0.95));
        s.answer(-1).unwrap();
        assert_eq!(s.best_index(), q.candidate_index);
        assert_eq!(s.pending().unwrap().delta, Some(0.95));
        s.answer(1).unwrap();
        assert_eq!(s.best_index(), q.candidate_index);
        assert_eq!(s.pending().unwrap().delta, Some(0.7));
        s.answer(0).unwrap();
        assert_eq!(s.pending().unwrap().delta, Some(0.35));
        assert!(matches!(s.answer(3), Err(Error::Protocol(_))));
    }

    #[test]
    fn solves_a_one_dimensional_quadratic() {
        let f = |x: &[f64]| (x[0] - 0.3) * (x[0] - 0.3);
        let out = solve(line(), &mut dm(f), small(4, 30)).unwrap();
        assert!(f(&out.x_best) <= 1e-3, "{:?}", out.x_best);
        assert_eq!(out.session.queries_answered(), 29);
    }

    #[test]
    fn replay_reproduces_the_session() {
        let f = |x: &[f64]| libm::sin(5.0 * x[0]) + x[0];
        let out = solve(line(), &mut dm(f), small(3, 12)).unwrap();
        let answers: Vec<i8> = out.session.history().iter().map(|r| r.answer).collect();
        let again = Session::replay(line(), small(3, 12), &answers).unwrap();
        assert_eq!(again.dataset(), out.session.dataset());
        assert_eq!(again.history(), out.session.history());
    }
}
