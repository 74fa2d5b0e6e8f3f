//! Batch benchmark runs against synthetic decision-makers.

use std::time::Instant;

use anyhow::{Context, Result};
use pbo_core::metrics::{data_profile, median_n_acc, n_acc, solved_fraction};
use pbo_core::{derive_seed, solve, BenchmarkProblem, SolverConfig, Variant};
use rayon::prelude::*;
use serde::Serialize;

/// One algorithm setting in a campaign.
#[derive(Debug, Clone)]
pub struct Arm {
    /// Label used in reports, e.g. `glispr` or `glispr[0]`.
    pub label: String,
    pub config: SolverConfig,
}

impl Arm {
    pub fn new(label: impl Into<String>, config: SolverConfig) -> Self {
        Arm {
            label: label.into(),
            config,
        }
    }

    /// Default label for a variant and exploration-weight cycle.
    pub fn label_for(config: &SolverConfig) -> String {
        let default_cycle = SolverConfig::default().delta_cycle;
        match config.variant {
            Variant::GlispR if config.delta_cycle != default_cycle => {
                let seq: Vec<String> = config
                    .delta_cycle
                    .sequence()
                    .iter()
                    .map(|d| d.to_string())
                    .collect();
                format!("glispr[{}]", seq.join(","))
            }
            v => v.name().to_string(),
        }
    }
}

/// Best-score trace of one trial.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub problem: String,
    pub arm: String,
    pub trial: usize,
    pub seed: u64,
    /// `f(x_best(N))` for `N = 1..=n_max`.
    pub trace: Vec<f64>,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn n_acc(&self, f_star: f64, t: f64) -> Option<usize> {
        n_acc(&self.trace, f_star, t)
    }
}

/// Seed of trial `trial` for a campaign seed.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    derive_seed(base, trial as u64)
}

/// Runs one trial of `arm` on `problem`.
pub fn run_trial(
    problem: &BenchmarkProblem,
    arm: &Arm,
    trial: usize,
    base_seed: u64,
) -> Result<RunRecord> {
    let seed = trial_seed(base_seed, trial);
    let cfg = SolverConfig {
        seed,
        ..arm.config.clone()
    };
    let start = Instant::now();
    let mut dm = problem.dm();
    let out = solve(problem.constraints()?, &mut dm, cfg)
        .with_context(|| format!("{} / {} / trial {trial}", problem.name, arm.label))?;
    let scores: Vec<f64> = out
        .session
        .samples()
        .iter()
        .map(|x| problem.eval(x))
        .collect();
    let trace = out
        .session
        .best_trace()
        .iter()
        .map(|&i| scores[i])
        .collect();
    Ok(RunRecord {
        problem: problem.name.to_string(),
        arm: arm.label.clone(),
        trial,
        seed,
        trace,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs every (problem, arm, trial) combination in parallel. Records come back
/// in that nesting order.
pub fn run_campaign(
    problems: &[BenchmarkProblem],
    arms: &[Arm],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<RunRecord>> {
    let jobs: Vec<(usize, usize, usize)> = (0..problems.len())
        .flat_map(|p| (0..arms.len()).flat_map(move |a| (0..trials).map(move |t| (p, a, t))))
        .collect();
    jobs.par_iter()
        .map(|&(p, a, t)| run_trial(&problems[p], &arms[a], t, base_seed))
        .collect()
}

/// Aggregate indicators of one (problem, arm) pair.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub problem: String,
    pub arm: String,
    pub trials: usize,
    pub threshold: f64,
    pub f_star: f64,
    /// Samples to reach the threshold per trial; `null` if not reached.
    pub n_acc: Vec<Option<usize>>,
    /// Median over trials with unsolved ones counted as infinite; `null` if not reached.
    pub median_n_acc: Option<f64>,
    pub solved_fraction: f64,
    /// Solved fraction after `N = 1, 2, ...` samples.
    pub data_profile: Vec<f64>,
    pub median_trace: Vec<f64>,
    pub best_trace: Vec<f64>,
    pub worst_trace: Vec<f64>,
    pub mean_wall_seconds: f64,
}

pub fn summarize(problem: &BenchmarkProblem, arm: &str, records: &[RunRecord], t: f64) -> Summary {
    let mine: Vec<&RunRecord> = records
        .iter()
        .filter(|r| r.problem == problem.name && r.arm == arm)
        .collect();
    let n_acc: Vec<Option<usize>> = mine.iter().map(|r| r.n_acc(problem.f_star, t)).collect();
    let traces: Vec<Vec<f64>> = mine.iter().map(|r| r.trace.clone()).collect();
    let len = traces.iter().map(Vec::len).min().unwrap_or(0);
    let column = |n: usize| {
        let mut v: Vec<f64> = traces.iter().map(|tr| tr[n]).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (mut med, mut lo, mut hi) = (Vec::new(), Vec::new(), Vec::new());
    for n in 0..len {
        let c = column(n);
        let m = c.len();
        med.push(if m % 2 == 1 {
            c[m / 2]
        } else {
            0.5 * (c[m / 2 - 1] + c[m / 2])
        });
        lo.push(c[0]);
        hi.push(c[m - 1]);
    }
    let wall = mine.iter().map(|r| r.wall_seconds).sum::<f64>() / mine.len().max(1) as f64;
    Summary {
        problem: problem.name.to_string(),
        arm: arm.to_string(),
        trials: mine.len(),
        threshold: t,
        f_star: problem.f_star,
        median_n_acc: median_n_acc(&n_acc),
        solved_fraction: solved_fraction(&n_acc),
        n_acc,
        data_profile: data_profile(&traces, problem.f_star, t),
        median_trace: med,
        best_trace: lo,
        worst_trace: hi,
        mean_wall_seconds: wall,
    }
}

/// Table cell for a median, `n.r.` when not reached.
pub fn format_median(m: Option<f64>) -> String {
    match m {
        Some(v) if v.fract() == 0.0 => format!("{v:.0}"),
        Some(v) => format!("{v:.1}"),
        None => "n.r.".to_string(),
    }
}

/// Plain-text table: one row per problem, median and solved percentage per arm.
pub fn render_table(summaries: &[Summary], arms: &[String]) -> String {
    let mut problems: Vec<&str> = Vec::new();
    for s in summaries {
        if !problems.contains(&s.problem.as_str()) {
            problems.push(&s.problem);
        }
    }
    let mut out = format!("{:<14}", "problem");
    for a in arms {
        out.push_str(&format!(" | {:>22}", a));
    }
    out.push('\n');
    for p in problems {
        out.push_str(&format!("{p:<14}"));
        for a in arms {
            let cell = summaries
                .iter()
                .find(|s| s.problem == p && &s.arm == a)
                .map(|s| {
                    format!(
                        "{} ({:.0}%)",
                        format_median(s.median_n_acc),
                        100.0 * s.solved_fraction
                    )
                })
                .unwrap_or_default();
            out.push_str(&format!(" | {cell:>22}"));
        }
        out.push('\n');
    }
    out
}

/// Flat CSV row: one per (problem, arm, trial, N).
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    problem: &'a str,
    variant: &'a str,
    trial: usize,
    seed: u64,
    n: usize,
    best_f: f64,
    accuracy: f64,
}

pub fn write_csv<W: std::io::Write>(
    w: W,
    problems: &[BenchmarkProblem],
    records: &[RunRecord],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        let f_star = problems
            .iter()
            .find(|p| p.name == r.problem)
            .map_or(f64::NAN, |p| p.f_star);
        for (i, f) in r.trace.iter().enumerate() {
            wtr.serialize(CsvRow {
                problem: &r.problem,
                variant: &r.arm,
                trial: r.trial,
                seed: r.seed,
                n: i + 1,
                best_f: *f,
                accuracy: pbo_core::metrics::accuracy(&r.trace, f_star, i + 1),
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}
