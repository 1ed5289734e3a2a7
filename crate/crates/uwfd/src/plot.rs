//! SVG figures from result and trajectory CSVs.

use plotters::prelude::*;

use crate::output::TrajectoryRow;
use crate::sweep::ResultRow;

const SIZE: (u32, u32) = (800, 560);
const MAX_POINTS: usize = 4000;

fn mode_color(mode: &str) -> RGBColor {
    match mode {
        "proposed" => BLUE,
        "conventional" => BLACK,
        "ideal" => RED,
        _ => MAGENTA,
    }
}

type PlotResult<T> = std::result::Result<T, String>;

/// Name, colour and (re, im) accessor of one trajectory series.
type Series = (&'static str, RGBColor, fn(&TrajectoryRow) -> (f64, f64));
/// Label, y range and projection of one trajectory panel.
type Panel = (&'static str, f64, f64, fn(f64, f64) -> f64);

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn modes_in(rows: &[ResultRow]) -> Vec<String> {
    let mut modes: Vec<String> = Vec::new();
    for r in rows {
        if !modes.contains(&r.mode) {
            modes.push(r.mode.clone());
        }
    }
    modes
}

fn log_bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| *v > 0.0 && v.is_finite())
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (1e-6, 1.0);
    }
    (10f64.powf(lo.log10().floor()), 10f64.powf(hi.log10().ceil().max(lo.log10().floor() + 1.0)))
}

fn x_bounds(xs: &[f64]) -> (f64, f64) {
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-9 {
        (lo - 1.0, hi + 1.0)
    } else {
        (lo, hi)
    }
}

/// Semilog plot of one metric against the sweep value, one line per mode.
/// Points at or below zero cannot be drawn on the log axis and are skipped.
fn semilog(
    rows: &[ResultRow],
    title: &str,
    x_label: &str,
    y_label: &str,
    x_of: impl Fn(&ResultRow) -> f64,
    y_of: impl Fn(&ResultRow) -> f64,
) -> PlotResult<String> {
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let xs: Vec<f64> = rows.iter().map(&x_of).collect();
        let (x0, x1) = x_bounds(&xs);
        let (y0, y1) = log_bounds(rows.iter().map(&y_of));
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(16)
            .x_label_area_size(44)
            .y_label_area_size(64)
            .build_cartesian_2d(x0..x1, (y0..y1).log_scale())
            .map_err(err)?;
        chart
            .configure_mesh()
            .x_desc(x_label)
            .y_desc(y_label)
            .y_label_formatter(&|v| format!("{v:.0e}"))
            .draw()
            .map_err(err)?;
        for mode in modes_in(rows) {
            let color = mode_color(&mode);
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.mode == mode)
                .map(|r| (x_of(r), y_of(r)))
                .filter(|(_, y)| *y > 0.0 && y.is_finite())
                .collect();
            chart
                .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
                .map_err(err)?
                .label(mode.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
            chart.draw_series(pts.into_iter().map(|p| Circle::new(p, 4, color.filled()))).map_err(err)?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .map_err(err)?;
        root.present().map_err(err)?;
    }
    Ok(svg)
}

/// BER against remote SNR.
pub fn ber_vs_snr(rows: &[ResultRow], title: &str) -> PlotResult<String> {
    semilog(rows, title, "remote SNR P_r/sigma_0^2 (dB)", "BER", |r| r.sweep_value.unwrap_or(f64::NAN), |r| r.ber)
}

/// Residual after SI cancellation against the SI-to-remote power ratio.
pub fn residual_vs_si_ratio(rows: &[ResultRow], remote_power_db: f64, title: &str) -> PlotResult<String> {
    semilog(
        rows,
        title,
        "P_s/P_r (dB)",
        "normalized residual MSE",
        |r| r.sweep_value.unwrap_or(f64::NAN) - remote_power_db,
        |r| r.rho_r_hat,
    )
}

/// Amplitude and phase panels of the true, estimated and damped tap.
pub fn tap_trajectory(rows: &[TrajectoryRow], symbol_rate_hz: f64, title: &str) -> PlotResult<String> {
    let stride = rows.len().div_ceil(MAX_POINTS).max(1);
    let kept: Vec<&TrajectoryRow> = rows.iter().step_by(stride).collect();
    let t = |r: &TrajectoryRow| r.n as f64 / symbol_rate_hz;
    let series: [Series; 3] = [
        ("true", RED, |r| (r.true_re, r.true_im)),
        ("estimated", BLACK, |r| (r.estimated_re, r.estimated_im)),
        ("damped", BLUE, |r| (r.damped_re, r.damped_im)),
    ];
    let ts: Vec<f64> = kept.iter().map(|r| t(r)).collect();
    let (t0, t1) = x_bounds(&ts);

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, (SIZE.0, SIZE.1 + 200)).into_drawing_area();
        root.fill(&WHITE).map_err(err)?;
        let root = root.titled(title, ("sans-serif", 22)).map_err(err)?;
        let panels = root.split_evenly((2, 1));
        let amp_max = kept
            .iter()
            .flat_map(|r| series.iter().map(move |(_, _, f)| f(r)))
            .map(|(a, b)| a.hypot(b))
            .fold(0.0f64, f64::max)
            .max(1e-12);
        let parts: [Panel; 2] = [
            ("amplitude", 0.0, amp_max * 1.1, |a, b| a.hypot(b)),
            ("phase (rad)", -std::f64::consts::PI, std::f64::consts::PI, |a, b| b.atan2(a)),
        ];
        for (area, (label, lo, hi, g)) in panels.iter().zip(parts) {
            let mut chart = ChartBuilder::on(area)
                .margin(12)
                .x_label_area_size(40)
                .y_label_area_size(60)
                .build_cartesian_2d(t0..t1, lo..hi)
                .map_err(err)?;
            chart.configure_mesh().x_desc("time (s)").y_desc(label).draw().map_err(err)?;
            for (name, color, f) in series {
                let pts: Vec<(f64, f64)> = kept
                    .iter()
                    .map(|r| {
                        let (a, b) = f(r);
                        (t(r), g(a, b))
                    })
                    .collect();
                let style = color.stroke_width(if name == "estimated" { 1 } else { 2 });
                let legend = move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2));
                if label == "amplitude" {
                    chart.draw_series(LineSeries::new(pts, style)).map_err(err)?.label(name).legend(legend);
                } else {
                    // phase wraps, so dots rather than a line across the cut
                    chart
                        .draw_series(pts.into_iter().map(|p| Circle::new(p, 1, color.filled())))
                        .map_err(err)?
                        .label(name)
                        .legend(legend);
                }
            }
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.8))
                .border_style(BLACK)
                .draw()
                .map_err(err)?;
        }
        root.present().map_err(err)?;
    }
    Ok(svg)
}
