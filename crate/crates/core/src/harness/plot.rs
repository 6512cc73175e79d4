use std::path::{Path, PathBuf};

use log::warn;
use plotters::prelude::*;

use super::AggregateCurve;
use crate::error::{Error, Result};

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

fn task_name(t: usize) -> String {
    if t == 0 {
        "objective".to_string()
    } else {
        format!("c{t}")
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Writes `oc_<title>.svg` with every curve's median and interquartile band,
/// plus `evals_<title>_<label>.svg` with cumulative evaluations per task.
/// Returns the written paths; an empty curve list writes nothing.
pub fn emit_plots(curves: &[AggregateCurve], out_dir: &Path, title: &str) -> Result<Vec<PathBuf>> {
    if curves.is_empty() {
        warn!("no curves to plot for {title}");
        return Ok(Vec::new());
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();

    let path = out_dir.join(format!("oc_{}.svg", sanitize(title)));
    {
        let x_lo = curves.iter().flat_map(|c| c.budget.first()).copied().fold(f64::INFINITY, f64::min);
        let x_hi = curves.iter().flat_map(|c| c.budget.last()).copied().fold(f64::NEG_INFINITY, f64::max);
        let y_hi = curves.iter().flat_map(|c| c.p75.iter()).copied().fold(0.0_f64, f64::max);
        let y_lo = curves.iter().flat_map(|c| c.p25.iter()).copied().fold(0.0_f64, f64::min);
        let x_hi = if x_hi > x_lo { x_hi } else { x_lo + 1.0 };
        let y_hi = if y_hi > y_lo { y_hi * 1.05 } else { y_lo + 1.0 };

        let root = SVGBackend::new(&path, (800, 500)).into_drawing_area();
        root.fill(&WHITE).map_err(plot_err)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(10)
            .x_label_area_size(40)
            .y_label_area_size(60)
            .build_cartesian_2d(x_lo..x_hi, y_lo..y_hi)
            .map_err(plot_err)?;
        chart.configure_mesh().x_desc("budget spent").y_desc("opportunity cost").draw().map_err(plot_err)?;
        for (i, c) in curves.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let band: Vec<(f64, f64)> = c
                .budget
                .iter()
                .zip(&c.p75)
                .map(|(b, v)| (*b, *v))
                .chain(c.budget.iter().zip(&c.p25).rev().map(|(b, v)| (*b, *v)))
                .collect();
            chart.draw_series(std::iter::once(Polygon::new(band, color.mix(0.2)))).map_err(plot_err)?;
            chart
                .draw_series(LineSeries::new(
                    c.budget.iter().zip(&c.median).map(|(b, v)| (*b, *v)),
                    color.stroke_width(2),
                ))
                .map_err(plot_err)?
                .label(c.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
        root.present().map_err(plot_err)?;
    }
    written.push(path);

    for c in curves {
        let path = out_dir.join(format!("evals_{}_{}.svg", sanitize(title), sanitize(&c.label)));
        {
            let x_lo = *c.budget.first().unwrap_or(&0.0);
            let x_hi = c.budget.last().copied().filter(|v| *v > x_lo).unwrap_or(x_lo + 1.0);
            let y_hi = c.cumulative.iter().flatten().copied().fold(1.0_f64, f64::max) * 1.05;
            let root = SVGBackend::new(&path, (800, 500)).into_drawing_area();
            root.fill(&WHITE).map_err(plot_err)?;
            let mut chart = ChartBuilder::on(&root)
                .caption(format!("{title}: {}", c.label), ("sans-serif", 22))
                .margin(10)
                .x_label_area_size(40)
                .y_label_area_size(60)
                .build_cartesian_2d(x_lo..x_hi, 0.0..y_hi)
                .map_err(plot_err)?;
            chart.configure_mesh().x_desc("budget spent").y_desc("cumulative evaluations").draw().map_err(plot_err)?;
            for (t, series) in c.cumulative.iter().enumerate() {
                let color = Palette99::pick(t).to_rgba();
                chart
                    .draw_series(LineSeries::new(
                        c.budget.iter().zip(series).map(|(b, v)| (*b, *v)),
                        color.stroke_width(2),
                    ))
                    .map_err(plot_err)?
                    .label(task_name(t))
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(plot_err)?;
            root.present().map_err(plot_err)?;
        }
        written.push(path);
    }
    Ok(written)
}
