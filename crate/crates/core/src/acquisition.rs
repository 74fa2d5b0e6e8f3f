//! Acquisition functions and greedy cycling of the exploration weight.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exploration::IdwContext;
use crate::rescaling::{AugmentedSet, MinMaxStats};
use crate::surrogate::RbfSurrogate;

/// Weight used by the legacy acquisition in benchmark comparisons.
pub const LEGACY_DELTA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Variant {
    /// Min-max rescaled convex combination with cycled weights.
    GlispR,
    /// `f / dF + delta z` with a fixed weight.
    GlispLegacy,
    /// Legacy form with the budget-aware exploration term.
    CGlispLegacy,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::GlispR => "glispr",
            Variant::GlispLegacy => "glisp",
            Variant::CGlispLegacy => "cglisp",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "glispr" => Some(Variant::GlispR),
            "glisp" => Some(Variant::GlispLegacy),
            "cglisp" => Some(Variant::CGlispLegacy),
            _ => None,
        }
    }
}

/// Sequence of exploration weights and the position in it.
/// Serialized as the bare sequence; the position restarts at 0.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "Vec<f64>", into = "Vec<f64>"))]
pub struct DeltaCycle {
    sequence: Vec<f64>,
    index: usize,
}

impl DeltaCycle {
    pub fn new(sequence: Vec<f64>) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::InvalidInput("delta cycle must not be empty".into()));
        }
        if let Some(d) = sequence.iter().find(|d| !(0.0..=1.0).contains(*d)) {
            return Err(Error::InvalidInput(format!("delta {d} outside [0, 1]")));
        }
        Ok(DeltaCycle { sequence, index: 0 })
    }

    pub fn sequence(&self) -> &[f64] {
        &self.sequence
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn delta(&self) -> f64 {
        self.sequence[self.index % self.sequence.len()]
    }

    /// Without a zero weight the cycle never takes a pure exploration step.
    pub fn contains_zero(&self) -> bool {
        self.sequence.contains(&0.0)
    }

    /// Keeps the weight after an improvement, otherwise moves to the next one.
    pub fn step(&mut self, improved: bool) {
        if !improved {
            self.index = (self.index + 1) % self.sequence.len();
        }
    }
}

impl TryFrom<Vec<f64>> for DeltaCycle {
    type Error = Error;

    fn try_from(sequence: Vec<f64>) -> Result<Self> {
        DeltaCycle::new(sequence)
    }
}

impl From<DeltaCycle> for Vec<f64> {
    fn from(c: DeltaCycle) -> Vec<f64> {
        c.sequence
    }
}

impl Default for DeltaCycle {
    fn default() -> Self {
        DeltaCycle {
            sequence: alloc::vec![0.95, 0.7, 0.35, 0.0],
            index: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Scaling {
    MinMax {
        surrogate: MinMaxStats,
        exploration: MinMaxStats,
    },
    Legacy {
        delta_f: f64,
    },
    CGlisp {
        delta_f: f64,
        best_index: usize,
        n_max: usize,
    },
    ExplorationOnly {
        cglisp: Option<(usize, usize)>,
    },
}

/// Acquisition function over the current surrogate and samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionContext {
    surrogate: RbfSurrogate,
    delta: f64,
    scaling: Scaling,
}

impl AcquisitionContext {
    /// `delta * rescaled f + (1 - delta) * rescaled z`, with ranges taken over `aug`.
    pub fn glisp_r(surrogate: RbfSurrogate, aug: &AugmentedSet, delta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::InvalidInput(format!("delta {delta} outside [0, 1]")));
        }
        let idw = IdwContext::new(&surrogate.centers);
        let f: Vec<f64> = aug.points.iter().map(|x| surrogate.eval(x)).collect();
        let z: Vec<f64> = aug.points.iter().map(|x| idw.distance(x)).collect();
        let scaling = Scaling::MinMax {
            surrogate: MinMaxStats::from_values(&f)?,
            exploration: MinMaxStats::from_values(&z)?,
        };
        Ok(AcquisitionContext {
            surrogate,
            delta,
            scaling,
        })
    }

    /// `f / dF + delta z`, with `dF` the surrogate range over the samples.
    pub fn glisp_legacy(surrogate: RbfSurrogate, delta: f64) -> Result<Self> {
        let delta_f = legacy_range(&surrogate, delta)?;
        Ok(AcquisitionContext {
            surrogate,
            delta,
            scaling: Scaling::Legacy { delta_f },
        })
    }

    /// Legacy form with the budget-aware exploration term.
    pub fn cglisp(
        surrogate: RbfSurrogate,
        delta: f64,
        best_index: usize,
        n_max: usize,
    ) -> Result<Self> {
        let delta_f = legacy_range(&surrogate, delta)?;
        let ctx = AcquisitionContext {
            surrogate,
            delta,
            scaling: Scaling::CGlisp {
                delta_f,
                best_index,
                n_max,
            },
        };
        // Validates the index and budget once.
        IdwContext::new(&ctx.surrogate.centers).distance_cglisp(
            &ctx.surrogate.centers[0],
            best_index,
            n_max,
        )?;
        Ok(ctx)
    }

    /// Same samples, exploration term only. Used when a proposal duplicates a sample.
    pub fn exploration_only(&self) -> Self {
        let cglisp = match self.scaling {
            Scaling::CGlisp {
                best_index, n_max, ..
            } => Some((best_index, n_max)),
            Scaling::ExplorationOnly { cglisp } => cglisp,
            _ => None,
        };
        AcquisitionContext {
            surrogate: self.surrogate.clone(),
            delta: 0.0,
            scaling: Scaling::ExplorationOnly { cglisp },
        }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// True when only the exploration term carries weight.
    pub fn is_pure_exploration(&self) -> bool {
        match self.scaling {
            Scaling::MinMax { .. } => self.delta == 0.0,
            Scaling::ExplorationOnly { .. } => true,
            _ => false,
        }
    }

    pub fn surrogate(&self) -> &RbfSurrogate {
        &self.surrogate
    }

    pub fn stats(&self) -> Option<(MinMaxStats, MinMaxStats)> {
        match self.scaling {
            Scaling::MinMax {
                surrogate,
                exploration,
            } => Some((surrogate, exploration)),
            _ => None,
        }
    }

    /// Surrogate range used by the legacy forms.
    pub fn legacy_range(&self) -> Option<f64> {
        match self.scaling {
            Scaling::Legacy { delta_f } | Scaling::CGlisp { delta_f, .. } => Some(delta_f),
            _ => None,
        }
    }

    fn idw(&self) -> IdwContext<'_> {
        IdwContext::new(&self.surrogate.centers)
    }

    /// Exploration term as used by this acquisition, before any weighting.
    pub fn exploration(&self, x: &[f64]) -> f64 {
        match self.scaling {
            Scaling::CGlisp {
                best_index, n_max, ..
            }
            | Scaling::ExplorationOnly {
                cglisp: Some((best_index, n_max)),
            } => self
                .idw()
                .distance_cglisp(x, best_index, n_max)
                .unwrap_or(0.0),
            _ => self.idw().distance(x),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.scaling {
            Scaling::MinMax {
                surrogate,
                exploration,
            } => {
                let mut a = 0.0;
                if self.delta != 0.0 {
                    a += self.delta * surrogate.rescale(self.surrogate.eval(x));
                }
                if self.delta != 1.0 {
                    a += (1.0 - self.delta) * exploration.rescale(self.idw().distance(x));
                }
                a
            }
            Scaling::Legacy { delta_f } | Scaling::CGlisp { delta_f, .. } => {
                self.surrogate.eval(x) / delta_f + self.delta * self.exploration(x)
            }
            Scaling::ExplorationOnly { .. } => self.exploration(x),
        }
    }

    /// Analytic gradient. `None` for the budget-aware exploration term and
    /// whenever a non-smooth surrogate carries weight.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (wf, wz) = match self.scaling {
            Scaling::MinMax {
                surrogate,
                exploration,
            } => (
                self.delta / surrogate.delta_h,
                (1.0 - self.delta) / exploration.delta_h,
            ),
            Scaling::Legacy { delta_f } => (1.0 / delta_f, self.delta),
            Scaling::ExplorationOnly { cglisp: None } => (0.0, 1.0),
            Scaling::CGlisp { .. } | Scaling::ExplorationOnly { cglisp: Some(_) } => return None,
        };
        let mut g = alloc::vec![0.0; x.len()];
        if wf != 0.0 {
            if !self.surrogate.kind.is_smooth() {
                return None;
            }
            for (gi, fi) in g.iter_mut().zip(self.surrogate.gradient(x)) {
                *gi += wf * fi;
            }
        }
        if wz != 0.0 {
            for (gi, zi) in g.iter_mut().zip(self.idw().distance_gradient(x)) {
                *gi += wz * zi;
            }
        }
        Some(g)
    }
}

fn legacy_range(surrogate: &RbfSurrogate, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!(
            "delta must be nonnegative, got {delta}"
        )));
    }
    if surrogate.centers.is_empty() {
        return Err(Error::InvalidInput("surrogate has no centers".into()));
    }
    let values: Vec<f64> = surrogate
        .centers
        .iter()
        .map(|x| surrogate.eval(x))
        .collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if hi - lo > 0.0 { hi - lo } else { 1.0 })
}
