use alloc::format;
use alloc::vec::Vec;

use crate::error::{check_dim, Error, Result};
use crate::linalg::dist_sq;

/// Outcome of comparing a first sample against a second one.
///
/// The integer encoding is `-1` when the first sample is strictly preferred,
/// `0` on indifference and `+1` when the second one is strictly preferred.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "i8", try_from = "i8"))]
pub enum Preference {
    FirstBetter,
    Indifferent,
    SecondBetter,
}

impl Preference {
    pub fn as_i8(self) -> i8 {
        match self {
            Preference::FirstBetter => -1,
            Preference::Indifferent => 0,
            Preference::SecondBetter => 1,
        }
    }

    /// Preference with the roles of the two samples swapped.
    pub fn reversed(self) -> Self {
        match self {
            Preference::FirstBetter => Preference::SecondBetter,
            Preference::Indifferent => Preference::Indifferent,
            Preference::SecondBetter => Preference::FirstBetter,
        }
    }

    /// Sign comparison of two scores where lower is better.
    pub fn from_scores(first: f64, second: f64) -> Self {
        if first < second {
            Preference::FirstBetter
        } else if first > second {
            Preference::SecondBetter
        } else {
            Preference::Indifferent
        }
    }
}

impl From<Preference> for i8 {
    fn from(p: Preference) -> i8 {
        p.as_i8()
    }
}

impl TryFrom<i8> for Preference {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Preference::FirstBetter),
            0 => Ok(Preference::Indifferent),
            1 => Ok(Preference::SecondBetter),
            other => Err(Error::Protocol(format!(
                "preference must be -1, 0 or 1, got {other}"
            ))),
        }
    }
}

/// One recorded comparison: `outcome = pi(samples[first], samples[second])`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Comparison {
    pub first: usize,
    pub second: usize,
    pub outcome: Preference,
}

/// Distinct samples, the preferences expressed on pairs of them, and the
/// index of the current best sample.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PreferenceDataset {
    pub samples: Vec<Vec<f64>>,
    pub comparisons: Vec<Comparison>,
    pub best_index: usize,
}

impl PreferenceDataset {
    pub fn new(
        samples: Vec<Vec<f64>>,
        comparisons: Vec<Comparison>,
        best_index: usize,
    ) -> Result<Self> {
        let data = PreferenceDataset {
            samples,
            comparisons,
            best_index,
        };
        data.validate()?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn best(&self) -> &[f64] {
        &self.samples[self.best_index]
    }

    /// Checks index validity, distinctness and the `M <= N(N-1)/2` bound.
    pub fn validate(&self) -> Result<()> {
        let n = self.samples.len();
        if n == 0 {
            return Err(Error::InvalidInput("dataset has no samples".into()));
        }
        let dim = self.dim();
        for s in &self.samples {
            check_dim(dim, s.len())?;
        }
        if self.best_index >= n {
            return Err(Error::InvalidInput(format!(
                "best index {} out of range",
                self.best_index
            )));
        }
        if self.comparisons.len() > n * (n - 1) / 2 {
            return Err(Error::InvalidInput(
                "more comparisons than distinct pairs".into(),
            ));
        }
        for (h, c) in self.comparisons.iter().enumerate() {
            if c.first >= n || c.second >= n || c.first == c.second {
                return Err(Error::InvalidInput(format!(
                    "invalid pair in comparison {h}"
                )));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dist_sq(&self.samples[i], &self.samples[j]) == 0.0 {
                    return Err(Error::InvalidInput(format!("samples {i} and {j} coincide")));
                }
            }
        }
        Ok(())
    }

    /// Slack weight of each comparison: 10 when it involves the best sample, else 1.
    pub fn slack_weights(&self) -> Vec<f64> {
        self.comparisons
            .iter()
            .map(|c| {
                if c.first == self.best_index || c.second == self.best_index {
                    10.0
                } else {
                    1.0
                }
            })
            .collect()
    }

    /// Index of a sample within Euclidean distance `tol` of `x`, if any.
    pub fn find_close(&self, x: &[f64], tol: f64) -> Option<usize> {
        self.samples.iter().position(|s| dist_sq(s, x) <= tol * tol)
    }
}
