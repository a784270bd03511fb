//! SVG figures drawn from sweep tables.

use std::path::{Path, PathBuf};

use plotters::coord::Shift;
use plotters::prelude::*;

use super::table::{Row, SweepTable};
use crate::error::{Error, Result};

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
    /// Mitigated data is drawn with markers and a thinner line.
    marked: bool,
    color: RGBColor,
}

fn plot_error<E: std::fmt::Debug>(e: E) -> Error {
    Error::Plot(format!("{e:?}"))
}

fn padded(values: impl Iterator<Item = f64>) -> std::ops::Range<f64> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return 0.0..1.0;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1e-3) };
    (lo - pad)..(hi + pad)
}

fn panel(area: &DrawingArea<SVGBackend<'_>, Shift>, title: &str, x_desc: &str, y_desc: &str, series: &[Series]) -> Result<()> {
    let xs = padded(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let ys = padded(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut chart = ChartBuilder::on(area)
        .caption(title, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d(xs, ys)
        .map_err(plot_error)?;
    chart
        .configure_mesh()
        .x_desc(x_desc)
        .y_desc(y_desc)
        .y_label_formatter(&|v| format!("{v:.3e}"))
        .draw()
        .map_err(plot_error)?;
    for s in series {
        let color = s.color;
        let width = if s.marked { 1 } else { 2 };
        chart
            .draw_series(LineSeries::new(s.points.iter().copied(), color.stroke_width(width)))
            .map_err(plot_error)?
            .label(s.name.clone())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(width)));
        if s.marked {
            chart
                .draw_series(s.points.iter().map(|&p| Circle::new(p, 3, color.filled())))
                .map_err(plot_error)?;
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_error)?;
    Ok(())
}

fn color_of(algorithms: &[String], name: &str) -> RGBColor {
    let index = algorithms.iter().position(|a| a == name).unwrap_or(0);
    let [r, g, b] = [
        [0, 0, 0],
        [31, 119, 180],
        [255, 127, 14],
        [44, 160, 44],
        [214, 39, 40],
        [148, 103, 189],
    ][index % 6];
    RGBColor(r, g, b)
}

fn collect<F: Fn(&Row) -> Option<(f64, f64)>>(table: &SweepTable, skip_ed: bool, mitigated: &[bool], f: F) -> Vec<Series> {
    let algorithms = table.algorithms();
    let mut out = Vec::new();
    for name in &algorithms {
        if skip_ed && name == "ED" {
            continue;
        }
        for &m in mitigated {
            let points: Vec<(f64, f64)> = table.series(name, m).filter_map(&f).collect();
            if points.is_empty() {
                continue;
            }
            out.push(Series {
                name: if m { format!("{name} (mitigated)") } else { name.clone() },
                points,
                marked: m,
                color: color_of(&algorithms, name),
            });
        }
    }
    out
}

fn nonempty(table: &SweepTable) -> Result<()> {
    if table.rows.iter().all(|r| !r.error.is_empty()) {
        return Err(Error::Plot("table has no successful rows".into()));
    }
    Ok(())
}

fn draw(path: &Path, size: (u32, u32), body: impl FnOnce(&DrawingArea<SVGBackend<'_>, Shift>) -> Result<()>) -> Result<()> {
    let root = SVGBackend::new(path, size).into_drawing_area();
    root.fill(&WHITE).map_err(plot_error)?;
    body(&root)?;
    root.present().map_err(plot_error)
}

/// Relative energy error and order parameters over the interaction.
pub fn u_sweep_figures(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    nonempty(table)?;
    std::fs::create_dir_all(dir)?;
    let errors = dir.join("energy_error.svg");
    let series = collect(table, true, &[false], |r| Some((r.u, r.rel_err?)));
    draw(&errors, (800, 560), |root| {
        panel(root, "Relative energy error", "U / |t|", "|E - E_ED| / |E_ED|", &series)
    })?;

    let orders = dir.join("order_parameters.svg");
    let pairing = collect(table, false, &[false], |r| Some((r.u, r.delta_s?.abs())));
    let magnet = collect(table, false, &[false], |r| Some((r.u, r.m_af?.abs())));
    draw(&orders, (1400, 560), |root| {
        let halves = root.split_evenly((1, 2));
        panel(&halves[0], "Pairing", "U / |t|", "|Delta_s|", &pairing)?;
        panel(&halves[1], "Staggered magnetization", "U / |t|", "|M_AF|", &magnet)
    })?;
    Ok(vec![errors, orders])
}

/// Raw and mitigated results over the dephasing rate.
pub fn noise_sweep_figures(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    nonempty(table)?;
    std::fs::create_dir_all(dir)?;
    let both = [false, true];
    let energy = dir.join("noise_energy.svg");
    let series = collect(table, true, &both, |r| Some((r.gate_time_over_t2, (r.energy? - r.ed_energy).abs())));
    draw(&energy, (800, 560), |root| {
        panel(root, "Energy deviation under dephasing", "gate time / T2", "|E - E_ED|", &series)
    })?;

    let orders = dir.join("noise_order_parameters.svg");
    let pairing = collect(table, false, &both, |r| Some((r.gate_time_over_t2, r.delta_s?.abs())));
    let magnet = collect(table, false, &both, |r| Some((r.gate_time_over_t2, r.m_af?.abs())));
    draw(&orders, (1400, 560), |root| {
        let halves = root.split_evenly((1, 2));
        panel(&halves[0], "Pairing under dephasing", "gate time / T2", "|Delta_s|", &pairing)?;
        panel(&halves[1], "Magnetization under dephasing", "gate time / T2", "|M_AF|", &magnet)
    })?;
    Ok(vec![energy, orders])
}

/// Figures for whichever sweep produced `table`: a table with a nonzero
/// dephasing rate is a noise sweep.
pub fn figures(table: &SweepTable, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.rows.iter().any(|r| r.gate_time_over_t2 != 0.0) {
        noise_sweep_figures(table, dir)
    } else {
        u_sweep_figures(table, dir)
    }
}
