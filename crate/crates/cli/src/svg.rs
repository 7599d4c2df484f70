//! Minimal SVG charts: the tau histogram and per-company overlays.

use std::fmt::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Result};
use chrono::{DateTime, Datelike, NaiveDate};
use trendcap_core::correlate::CorrelationResult;
use trendcap_core::portfolio::Histogram;

use crate::output::SeriesRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const INTEREST_COLOR: &str = "#1f77b4";
const VALUATION_COLOR: &str = "#ff7f0e";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(title: &str, reproducible: bool) -> String {
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    if !reproducible {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs() as i64);
        if let Some(t) = DateTime::from_timestamp(secs, 0) {
            let _ = writeln!(s, "<!-- generated {} -->", t.format("%Y-%m-%dT%H:%M:%SZ"));
        }
    }
    let _ = writeln!(s, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn plot_w() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_h() -> f64 {
    HEIGHT - TOP - BOTTOM
}

fn axes(s: &mut String, x_label: &str, y_label: &str) {
    let (x0, y0) = (LEFT, TOP + plot_h());
    let _ = writeln!(
        s,
        "<path d=\"M{LEFT} {TOP} V{y0} H{}\" fill=\"none\" stroke=\"black\"/>",
        x0 + plot_w()
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        LEFT + plot_w() / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>",
        TOP + plot_h() / 2.0,
        TOP + plot_h() / 2.0,
        escape(y_label)
    );
}

fn x_tick(s: &mut String, x: f64, label: &str) {
    let y0 = TOP + plot_h();
    let _ = writeln!(s, "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>", y0 + 5.0);
    let _ = writeln!(
        s,
        "<text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
        y0 + 18.0,
        escape(label)
    );
}

fn y_tick(s: &mut String, y: f64, label: &str) {
    let _ = writeln!(s, "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{LEFT}\" y2=\"{y:.2}\" stroke=\"black\"/>", LEFT - 5.0);
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
        LEFT - 8.0,
        y + 4.0,
        escape(label)
    );
}

/// Step between y ticks giving at most about six ticks.
fn count_step(max: usize) -> usize {
    let raw = (max as f64 / 6.0).max(1.0);
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|&s| s >= raw).unwrap_or(10.0 * mag);
    step as usize
}

/// Bar chart of tau counts on `[-1, 1]`.
pub fn histogram(h: &Histogram, reproducible: bool) -> Result<String> {
    let total = h.total();
    if total == 0 {
        bail!("histogram of an empty corpus");
    }
    let max = h.counts.iter().copied().max().unwrap_or(1).max(1);
    let step = count_step(max);
    let top = max.div_ceil(step) * step;
    let sx = |t: f64| LEFT + (t + 1.0) / 2.0 * plot_w();
    let sy = |c: f64| TOP + plot_h() * (1.0 - c / top as f64);

    let mut s = header(&format!("Distribution of Kendall's tau (n = {total})"), reproducible);
    for (lo, &count) in h.lower_edges.iter().zip(&h.counts) {
        if count == 0 {
            continue;
        }
        let hi = (lo + h.bin_width).min(1.0);
        let (x, w) = (sx(*lo), sx(hi) - sx(*lo));
        let y = sy(count as f64);
        let _ = writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{INTEREST_COLOR}\" stroke=\"white\"/>",
            w,
            TOP + plot_h() - y
        );
    }
    axes(&mut s, "tau", "companies");
    for t in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        x_tick(&mut s, sx(t), &format!("{t}"));
    }
    let mut c = 0;
    while c <= top {
        y_tick(&mut s, sy(c as f64), &c.to_string());
        c += step;
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn polyline(s: &mut String, points: &[(f64, f64)], color: &str, dashed: bool) {
    let mut d = String::new();
    for (x, y) in points {
        let _ = write!(d, "{x:.2},{y:.2} ");
    }
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    let _ = writeln!(
        s,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash}/>",
        d.trim_end()
    );
}

fn legend(s: &mut String, row: usize, color: &str, dashed: bool, label: &str) {
    let x = LEFT + 12.0;
    let y = TOP + 14.0 + row as f64 * 16.0;
    let dash = if dashed { " stroke-dasharray=\"6 4\"" } else { "" };
    let _ = writeln!(
        s,
        "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
        x + 24.0
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\">{}</text>", x + 30.0, y + 4.0, escape(label));
}

/// Normalized interest and valuation on a shared calendar-week axis; the
/// valuation moved by the lag is drawn dashed when the lag is nonzero.
pub fn overlay(rows: &[SeriesRow], result: &CorrelationResult, reproducible: bool) -> Result<String> {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        bail!("{}: no series to plot", result.company_id);
    };
    let lag = result.lag_weeks;
    let days = |w: NaiveDate| (w - first.week).num_days() as f64 / 7.0;
    let (mut lo, mut hi) = (0.0f64, days(last.week));
    if lag != 0 {
        lo = lo.min(lag as f64);
        hi = hi.max(hi + lag as f64);
    }
    let span = (hi - lo).max(1.0);
    let sx = |weeks: f64| LEFT + (weeks - lo) / span * plot_w();
    let sy = |v: f64| TOP + plot_h() * (1.0 - v.clamp(0.0, 1.0));

    let title = format!("{}: search interest vs. valuation", result.company_id);
    let mut s = header(&title, reproducible);
    let interest: Vec<(f64, f64)> = rows.iter().map(|r| (sx(days(r.week)), sy(r.interest_norm))).collect();
    let valuation: Vec<(f64, f64)> = rows.iter().map(|r| (sx(days(r.week)), sy(r.valuation_norm))).collect();
    polyline(&mut s, &interest, INTEREST_COLOR, false);
    polyline(&mut s, &valuation, VALUATION_COLOR, false);
    legend(&mut s, 0, INTEREST_COLOR, false, "search interest");
    legend(&mut s, 1, VALUATION_COLOR, false, "valuation");
    if lag != 0 {
        let shifted: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| (sx(days(r.week) + lag as f64), sy(r.valuation_norm)))
            .collect();
        polyline(&mut s, &shifted, VALUATION_COLOR, true);
        legend(&mut s, 2, VALUATION_COLOR, true, "valuation, shifted");
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">lag = {lag} weeks</text>",
        WIDTH - RIGHT - 8.0,
        TOP + 18.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">tau = {:.3} ({})</text>",
        WIDTH - RIGHT - 8.0,
        TOP + 34.0,
        result.tau_best,
        result.group
    );
    axes(&mut s, "week", "normalized value");
    let start = first.week + chrono::Duration::weeks(lo as i64);
    let end = first.week + chrono::Duration::weeks(hi.ceil() as i64);
    let years = (end.year() - start.year()).max(1);
    let every = (years as f64 / 8.0).ceil().max(1.0) as i32;
    for year in (start.year() + 1..=end.year()).filter(|y| (y - start.year() - 1) % every == 0) {
        let Some(jan1) = NaiveDate::from_ymd_opt(year, 1, 1) else {
            continue;
        };
        x_tick(&mut s, sx(days(jan1)), &year.to_string());
    }
    for v in [0.0, 0.25, 0.5, 0.75, 1.0] {
        y_tick(&mut s, sy(v), &format!("{v}"));
    }
    s.push_str("</svg>\n");
    Ok(s)
}
