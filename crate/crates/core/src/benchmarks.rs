//! Bound-constrained benchmark problems and the synthetic decision-maker that
//! answers queries by comparing their scores.

use alloc::vec::Vec;
use core::f64::consts::{E, PI};

use libm::{cos, exp, fabs, floor, sin, sqrt};

use crate::driver::PreferenceOracle;
use crate::error::Result;
use crate::problem::ConstraintSet;
use crate::surrogate::Preference;

#[derive(Debug, Clone, Copy)]
pub struct BenchmarkProblem {
    /// Identifier used on the command line.
    pub name: &'static str,
    /// Human-readable label for reports.
    pub label: &'static str,
    pub lower: &'static [f64],
    pub upper: &'static [f64],
    pub f: fn(&[f64]) -> f64,
    pub f_star: f64,
    pub x_star: &'static [f64],
}

impl BenchmarkProblem {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn constraints(&self) -> Result<ConstraintSet> {
        ConstraintSet::new(self.lower.to_vec(), self.upper.to_vec())
    }

    /// Synthetic decision-maker for this problem.
    pub fn dm(&self) -> SyntheticDm {
        SyntheticDm { problem: *self }
    }
}

/// Answers `sign(f(first) - f(second))` with exact comparison.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticDm {
    pub problem: BenchmarkProblem,
}

impl SyntheticDm {
    pub fn compare(&self, first: &[f64], second: &[f64]) -> i8 {
        Preference::from_scores(self.problem.eval(first), self.problem.eval(second)).as_i8()
    }
}

impl PreferenceOracle for SyntheticDm {
    fn query(&mut self, first: &[f64], second: &[f64]) -> i8 {
        self.compare(first, second)
    }
}

fn sq(v: f64) -> f64 {
    v * v
}

pub fn bemporad(x: &[f64]) -> f64 {
    let x = x[0];
    sq(1.0 + x * sin(2.0 * x) * cos(3.0 * x) / (1.0 + x * x)) + x * x / 12.0 + x / 10.0
}

pub fn gramacy_lee(x: &[f64]) -> f64 {
    let x = x[0];
    sin(10.0 * PI * x) / (2.0 * x) + sq(sq(x - 1.0))
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let s2: f64 = x.iter().map(|v| v * v).sum();
    let sc: f64 = x.iter().map(|v| cos(2.0 * PI * v)).sum();
    -20.0 * exp(-0.2 * sqrt(s2 / n)) - exp(sc / n) + 20.0 + E
}

pub fn bukin6(x: &[f64]) -> f64 {
    100.0 * sqrt(fabs(x[1] - 0.01 * x[0] * x[0])) + 0.01 * fabs(x[0] + 10.0)
}

pub fn levy13(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    sq(sin(3.0 * PI * a))
        + sq(a - 1.0) * (1.0 + sq(sin(3.0 * PI * b)))
        + sq(b - 1.0) * (1.0 + sq(sin(2.0 * PI * b)))
}

pub fn adjiman(x: &[f64]) -> f64 {
    cos(x[0]) * sin(x[1]) - x[0] / (x[1] * x[1] + 1.0)
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * sq(w[1] - w[0] * w[0]) + sq(w[0] - 1.0))
        .sum()
}

/// Piecewise constant: every point of `[-0.5, 0.5)^n` is a minimizer.
pub fn step2(x: &[f64]) -> f64 {
    x.iter().map(|v| sq(floor(v + 0.5))).sum()
}

pub fn salomon(x: &[f64]) -> f64 {
    let r = sqrt(x.iter().map(|v| v * v).sum());
    1.0 - cos(2.0 * PI * r) + 0.1 * r
}

// Optima from a dense-grid plus local-refinement oracle (tests/oracles/benchmarks.py).
static CATALOG: [BenchmarkProblem; 9] = [
    BenchmarkProblem {
        name: "bemporad",
        label: "Bemporad (1D)",
        lower: &[-3.0],
        upper: &[3.0],
        f: bemporad,
        f_star: 0.2795044960582649,
        x_star: &[-0.959768569126551],
    },
    BenchmarkProblem {
        name: "gramacy_lee",
        label: "Gramacy & Lee (1D)",
        lower: &[0.5],
        upper: &[2.5],
        f: gramacy_lee,
        f_star: -0.8690111349894999,
        x_star: &[0.5485634444419596],
    },
    BenchmarkProblem {
        name: "ackley",
        label: "Ackley (2D)",
        lower: &[-35.0, -35.0],
        upper: &[35.0, 35.0],
        f: ackley,
        f_star: 0.0,
        x_star: &[0.0, 0.0],
    },
    BenchmarkProblem {
        name: "bukin6",
        label: "Bukin N.6 (2D)",
        lower: &[-15.0, -3.0],
        upper: &[-5.0, 3.0],
        f: bukin6,
        f_star: 0.0,
        x_star: &[-10.0, 1.0],
    },
    BenchmarkProblem {
        name: "levy13",
        label: "Levy N.13 (2D)",
        lower: &[-10.0, -10.0],
        upper: &[10.0, 10.0],
        f: levy13,
        f_star: 0.0,
        x_star: &[1.0, 1.0],
    },
    BenchmarkProblem {
        name: "adjiman",
        label: "Adjiman (2D)",
        lower: &[-1.0, -1.0],
        upper: &[2.0, 1.0],
        f: adjiman,
        f_star: -2.0218067833597875,
        x_star: &[2.0, 0.10578347],
    },
    BenchmarkProblem {
        name: "rosenbrock",
        label: "Rosenbrock (5D)",
        lower: &[-30.0; 5],
        upper: &[30.0; 5],
        f: rosenbrock,
        f_star: 0.0,
        x_star: &[1.0; 5],
    },
    BenchmarkProblem {
        name: "step2",
        label: "Step 2 (5D)",
        lower: &[-100.0; 5],
        upper: &[100.0; 5],
        f: step2,
        f_star: 0.0,
        x_star: &[0.0; 5],
    },
    BenchmarkProblem {
        name: "salomon",
        label: "Salomon (5D)",
        lower: &[-100.0; 5],
        upper: &[100.0; 5],
        f: salomon,
        f_star: 0.0,
        x_star: &[0.0; 5],
    },
];

pub fn benchmark_catalog() -> &'static [BenchmarkProblem] {
    &CATALOG
}

pub fn benchmark_by_name(name: &str) -> Option<BenchmarkProblem> {
    CATALOG.iter().find(|p| p.name == name).copied()
}

pub fn benchmark_names() -> Vec<&'static str> {
    CATALOG.iter().map(|p| p.name).collect()
}
