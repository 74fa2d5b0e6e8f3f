//! SVG line charts: convergence (median, best, worst) and data profiles.

use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;

use crate::campaign::Summary;

const PALETTE: [RGBColor; 6] = [RED, BLUE, GREEN, MAGENTA, CYAN, BLACK];

fn err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plot: {e}")
}

/// Median, best and worst `f(x_best(N))` per arm, with `f*` dashed and `N_init` marked.
pub fn convergence_svg(
    path: &Path,
    title: &str,
    summaries: &[&Summary],
    n_init: Option<usize>,
) -> Result<()> {
    let f_star = summaries.first().map_or(0.0, |s| s.f_star);
    let len = summaries
        .iter()
        .map(|s| s.median_trace.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let (mut lo, mut hi) = (f_star, f_star);
    for s in summaries {
        for v in s.best_trace.iter().chain(&s.worst_trace) {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if hi <= lo {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(1f64..len as f64, (lo - pad)..(hi + pad))
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("N")
        .y_desc("f(x_best)")
        .draw()
        .map_err(err)?;
    for (i, s) in summaries.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let pts = |v: &[f64]| {
            v.iter()
                .enumerate()
                .map(|(n, y)| ((n + 1) as f64, *y))
                .collect::<Vec<_>>()
        };
        chart
            .draw_series(LineSeries::new(pts(&s.median_trace), c.stroke_width(2)))
            .map_err(err)?
            .label(s.arm.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
        chart
            .draw_series(LineSeries::new(pts(&s.best_trace), c.mix(0.4)))
            .map_err(err)?;
        chart
            .draw_series(LineSeries::new(pts(&s.worst_trace), c.mix(0.4)))
            .map_err(err)?;
    }
    chart
        .draw_series(DashedLineSeries::new(
            vec![(1.0, f_star), (len as f64, f_star)],
            6,
            4,
            BLACK.into(),
        ))
        .map_err(err)?;
    if let Some(n) = n_init {
        chart
            .draw_series(LineSeries::new(
                vec![(n as f64, lo - pad), (n as f64, hi + pad)],
                BLACK,
            ))
            .map_err(err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}

/// Solved fraction against `N` per arm.
pub fn profile_svg(path: &Path, title: &str, summaries: &[&Summary]) -> Result<()> {
    let len = summaries
        .iter()
        .map(|s| s.data_profile.len())
        .max()
        .unwrap_or(1)
        .max(2);
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(1f64..len as f64, 0f64..1.05f64)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("N")
        .y_desc("solved fraction")
        .draw()
        .map_err(err)?;
    for (i, s) in summaries.iter().enumerate() {
        let c = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s
            .data_profile
            .iter()
            .enumerate()
            .map(|(n, y)| ((n + 1) as f64, *y))
            .collect();
        chart
            .draw_series(LineSeries::new(pts, c.stroke_width(2)))
            .map_err(err)?
            .label(s.arm.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}
