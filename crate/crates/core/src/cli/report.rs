//! CSV and SVG output.

use std::io;
use std::path::Path;

use plotters::prelude::*;

use crate::grid::{FieldState, GridSpec};
use crate::harness::{ConvergenceReport, SweepPoint};

/// Six significant digits, scientific notation.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn full(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>, f: fn(f64) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn plot_err<E: std::fmt::Display>(e: E) -> io::Error {
    io::Error::other(e.to_string())
}

pub fn write_final_state_csv(path: &Path, grid: &GridSpec, state: &FieldState) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["j", "x", "value"]).map_err(csv_err)?;
    for (j, v) in state.values().iter().enumerate() {
        w.write_record([j.to_string(), full(grid.cell_center(j)), full(*v)])
            .map_err(csv_err)?;
    }
    w.flush()
}

pub const CONVERGENCE_HEADER: [&str; 10] = [
    "J",
    "dx",
    "l2_error",
    "observed_order",
    "theoretical_order",
    "status",
    "steps",
    "dx_full",
    "l2_error_full",
    "observed_order_full",
];

pub fn write_convergence_csv(path: &Path, report: &ConvergenceReport) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(CONVERGENCE_HEADER).map_err(csv_err)?;
    for row in &report.rows {
        w.write_record([
            row.cells.to_string(),
            sig6(row.dx),
            opt(row.l2_error, sig6),
            opt(row.observed_order, sig6),
            sig6(report.theoretical_order),
            row.status.to_string(),
            row.steps.to_string(),
            full(row.dx),
            opt(row.l2_error, full),
            opt(row.observed_order, full),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

pub fn write_sweep_summary_csv(path: &Path, points: &[SweepPoint]) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["m", "observed_order", "theoretical_order", "observed_order_full"])
        .map_err(csv_err)?;
    for pt in points {
        w.write_record([
            full(pt.m),
            opt(pt.observed, sig6),
            sig6(pt.theoretical),
            opt(pt.observed, full),
        ])
        .map_err(csv_err)?;
    }
    w.flush()
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = (hi - lo).abs().max(1e-12);
    (lo - 0.05 * span, hi + 0.05 * span)
}

pub fn write_profile_svg(path: &Path, grid: &GridSpec, state: &FieldState) -> io::Result<()> {
    let points: Vec<(f64, f64)> = state
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| (grid.cell_center(j), v))
        .collect();
    let lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = padded(lo, hi);
    let root = SVGBackend::new(path, (900, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..grid.domain_length(), lo..hi)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("x")
        .y_desc("cell average")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(points, &BLUE))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

pub fn write_convergence_svg(path: &Path, report: &ConvergenceReport) -> io::Result<()> {
    let points: Vec<(f64, f64)> = report
        .rows
        .iter()
        .filter_map(|r| Some((r.dx, r.l2_error?)))
        .filter(|p| p.1 > 0.0)
        .collect();
    let root = SVGBackend::new(path, (700, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    let bounds = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo / 1.5, hi * 1.5)
        } else {
            (1e-3, 1.0)
        }
    };
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let mut chart = ChartBuilder::on(&root)
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(70)
        .build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("dx")
        .y_desc("l2 error")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(points.clone(), &BLUE))
        .map_err(plot_err)?;
    chart
        .draw_series(points.iter().map(|&p| Circle::new(p, 3, BLUE.filled())))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

pub fn write_sweep_svg(path: &Path, points: &[SweepPoint]) -> io::Result<()> {
    let theory: Vec<(f64, f64)> = points.iter().map(|p| (p.m, p.theoretical)).collect();
    let observed: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| Some((p.m, p.observed?)))
        .collect();
    let m_hi = points.iter().map(|p| p.m).fold(0.0, f64::max);
    let o_hi = theory
        .iter()
        .chain(&observed)
        .map(|p| p.1)
        .fold(0.0, f64::max);
    let root = SVGBackend::new(path, (700, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0.0..m_hi * 1.1 + 0.1, 0.0..o_hi * 1.2 + 0.05)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("Sobolev regularity m")
        .y_desc("order")
        .draw()
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new(theory, &BLACK))
        .map_err(plot_err)?;
    chart
        .draw_series(observed.iter().map(|&p| Circle::new(p, 4, RED.filled())))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}
