use alloc::vec::Vec;

use super::fit::fit_with_kernel;
use super::{kernel_matrix, preference_from_gap, FitSettings, PreferenceDataset};
use crate::error::{Error, Result};

/// Logarithmically spaced shape parameters, plus 1.
pub const DEFAULT_LOOCV_GRID: [f64; 11] = [
    0.1, 0.1668, 0.2783, 0.4642, 0.7743, 1.0, 1.2915, 2.1544, 3.5938, 5.9948, 10.0,
];

/// What a leave-one-out fold removes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LoocvHoldout {
    /// One preference at a time; all samples stay as centers.
    #[default]
    Preference,
    /// One non-best sample at a time, with every preference it appears in.
    Sample,
}

/// Dispatches to the selection rule for `holdout`.
pub fn loocv_select(
    data: &PreferenceDataset,
    settings: &FitSettings,
    grid: &[f64],
    holdout: LoocvHoldout,
) -> Result<(f64, Vec<usize>)> {
    match holdout {
        LoocvHoldout::Preference => loocv_select_epsilon(data, settings, grid),
        LoocvHoldout::Sample => loocv_select_epsilon_by_sample(data, settings, grid),
    }
}

/// Picks the shape parameter from `grid` whose leave-one-out fits reproduce the
/// most held-out preferences. Ties go to the value nearest `settings.epsilon`,
/// then to the smaller one. With fewer than two comparisons the current value
/// is kept. Returns the chosen value and its score per grid entry.
pub fn loocv_select_epsilon(
    data: &PreferenceDataset,
    settings: &FitSettings,
    grid: &[f64],
) -> Result<(f64, Vec<usize>)> {
    data.validate()?;
    settings.validate()?;
    if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput(
            "shape grid must be non-empty and positive".into(),
        ));
    }
    let m = data.comparisons.len();
    if m < 2 {
        return Ok((settings.epsilon, Vec::new()));
    }
    let n = data.len();
    let weights = data.slack_weights();
    let mut scores = Vec::with_capacity(grid.len());
    for &eps in grid {
        let kernel = kernel_matrix(settings.kind, eps, &data.samples);
        let mut correct = 0;
        for held in 0..m {
            let comps: Vec<_> = data
                .comparisons
                .iter()
                .enumerate()
                .filter(|(h, _)| *h != held)
                .map(|(_, c)| *c)
                .collect();
            let r: Vec<f64> = weights
                .iter()
                .enumerate()
                .filter(|(h, _)| *h != held)
                .map(|(_, w)| *w)
                .collect();
            let fit = fit_with_kernel(&kernel, n, &comps, &r, settings.lambda, settings.sigma)?;
            let c = data.comparisons[held];
            let fi: f64 = kernel[c.first * n..(c.first + 1) * n]
                .iter()
                .zip(&fit.beta)
                .map(|(k, b)| k * b)
                .sum();
            let fj: f64 = kernel[c.second * n..(c.second + 1) * n]
                .iter()
                .zip(&fit.beta)
                .map(|(k, b)| k * b)
                .sum();
            if preference_from_gap(fi - fj, settings.sigma) == c.outcome {
                correct += 1;
            }
        }
        scores.push(correct);
    }
    Ok((pick(grid, &scores, settings.epsilon), scores))
}

/// Variant of [`loocv_select_epsilon`] that holds out samples instead of
/// preferences: each sample other than the best is removed together with every
/// preference it takes part in, and those preferences are then predicted by the
/// fit on the remaining samples. Same tie-break and return value.
pub fn loocv_select_epsilon_by_sample(
    data: &PreferenceDataset,
    settings: &FitSettings,
    grid: &[f64],
) -> Result<(f64, Vec<usize>)> {
    data.validate()?;
    settings.validate()?;
    if grid.is_empty() || grid.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::InvalidInput(
            "shape grid must be non-empty and positive".into(),
        ));
    }
    if data.comparisons.len() < 2 {
        return Ok((settings.epsilon, Vec::new()));
    }
    let n = data.len();
    let mut scores = Vec::with_capacity(grid.len());
    for &eps in grid {
        let kernel = kernel_matrix(settings.kind, eps, &data.samples);
        let mut correct = 0;
        for held in (0..n).filter(|i| *i != data.best_index) {
            // Position of sample j in the reduced set.
            let reduced = |j: usize| if j > held { j - 1 } else { j };
            let keep: Vec<usize> = (0..n).filter(|j| *j != held).collect();
            let sub: Vec<f64> = keep
                .iter()
                .flat_map(|&a| keep.iter().map(move |&b| (a, b)))
                .map(|(a, b)| kernel[a * n + b])
                .collect();
            let best = reduced(data.best_index);
            let mut comps = Vec::new();
            let mut r = Vec::new();
            for c in &data.comparisons {
                if c.first == held || c.second == held {
                    continue;
                }
                let (first, second) = (reduced(c.first), reduced(c.second));
                comps.push(super::Comparison {
                    first,
                    second,
                    outcome: c.outcome,
                });
                r.push(if first == best || second == best {
                    10.0
                } else {
                    1.0
                });
            }
            let fit = fit_with_kernel(&sub, n - 1, &comps, &r, settings.lambda, settings.sigma)?;
            let value = |i: usize| -> f64 {
                keep.iter()
                    .zip(&fit.beta)
                    .map(|(&j, b)| kernel[i * n + j] * b)
                    .sum()
            };
            for c in data
                .comparisons
                .iter()
                .filter(|c| c.first == held || c.second == held)
            {
                if preference_from_gap(value(c.first) - value(c.second), settings.sigma)
                    == c.outcome
                {
                    correct += 1;
                }
            }
        }
        scores.push(correct);
    }
    Ok((pick(grid, &scores, settings.epsilon), scores))
}

fn pick(grid: &[f64], scores: &[usize], current: f64) -> f64 {
    let mut best = 0;
    for i in 1..grid.len() {
        let (di, db) = ((grid[i] - current).abs(), (grid[best] - current).abs());
        let better = scores[i] > scores[best]
            || (scores[i] == scores[best] && (di < db || (di == db && grid[i] < grid[best])));
        if better {
            best = i;
        }
    }
    grid[best]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{Comparison, Preference};
    use alloc::vec;

    #[test]
    fn tie_break_prefers_current_then_smaller() {
        let grid = [0.5, 1.0, 2.0];
        assert_eq!(pick(&grid, &[3, 3, 3], 1.0), 1.0);
        assert_eq!(pick(&grid, &[3, 2, 3], 1.0), 0.5);
        assert_eq!(pick(&grid, &[1, 2, 3], 1.0), 2.0);
        assert_eq!(pick(&[0.5, 1.5], &[2, 2], 1.0), 0.5);
    }

    #[test]
    fn keeps_current_with_few_comparisons() {
        let data = PreferenceDataset::new(
            vec![vec![0.0], vec![1.0]],
            vec![Comparison {
                first: 0,
                second: 1,
                outcome: Preference::FirstBetter,
            }],
            0,
        )
        .unwrap();
        let settings = FitSettings {
            epsilon: 0.7,
            ..FitSettings::default()
        };
        let (eps, scores) = loocv_select_epsilon(&data, &settings, &DEFAULT_LOOCV_GRID).unwrap();
        assert_eq!(eps, 0.7);
        assert!(scores.is_empty());
    }

    #[test]
    fn scores_are_bounded_by_comparisons() {
        let samples: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let f = |x: f64| (x - 0.3) * (x - 0.3);
        let comparisons = (1..6)
            .map(|i| Comparison {
                first: 0,
                second: i,
                outcome: Preference::from_scores(f(0.0), f(i as f64 / 5.0)),
            })
            .collect();
        let data = PreferenceDataset::new(samples, comparisons, 0).unwrap();
        let (eps, scores) =
            loocv_select_epsilon(&data, &FitSettings::default(), &DEFAULT_LOOCV_GRID).unwrap();
        assert!(DEFAULT_LOOCV_GRID.contains(&eps));
        assert_eq!(scores.len(), DEFAULT_LOOCV_GRID.len());
        assert!(scores.iter().all(|s| *s <= 5));
    }

    #[test]
    fn sample_holdout_scores_each_pair_of_a_removed_sample() {
        let samples: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 / 5.0]).collect();
        let f = |x: f64| (x - 0.3) * (x - 0.3);
        let comparisons = (1..6)
            .map(|i| Comparison {
                first: 0,
                second: i,
                outcome: Preference::from_scores(f(0.0), f(i as f64 / 5.0)),
            })
            .collect();
        let data = PreferenceDataset::new(samples, comparisons, 1).unwrap();
        let (eps, scores) =
            loocv_select_epsilon_by_sample(&data, &FitSettings::default(), &DEFAULT_LOOCV_GRID)
                .unwrap();
        assert!(DEFAULT_LOOCV_GRID.contains(&eps));
        // Sample 0 takes part in all five pairs and is held out once; samples 2..=5 once each.
        assert!(scores.iter().all(|s| *s <= 9));
        let (only, _) =
            loocv_select(&data, &FitSettings::default(), &[0.5], LoocvHoldout::Sample).unwrap();
        assert_eq!(only, 0.5);
    }
}
