//! Task bucket charts as standalone SVG, plus CSV and aligned-text tables.
//!
//! A bucket chart has one horizontal stacked bar per row (strategy, or
//! strategy variant); segment opacity decreases left to right so the
//! fastest bucket is darkest and Unsolved is lightest. Rows marked hatched
//! get a cross-hatch overlay, distinguishing variants that share a color.
//! The output is static SVG with no scripting, so it renders anywhere and
//! diffs cleanly.

use crate::analysis::{BucketScheme, TaskSummary};

/// Named palette; strategy-to-color mapping is configuration, not
/// convention.
pub const PALETTE: &[(&str, &str)] = &[
    ("blue", "#4477AA"),
    ("purple", "#8866BB"),
    ("pink", "#EE6699"),
    ("black", "#202020"),
    ("orange", "#EE7733"),
    ("red", "#CC3311"),
    ("green", "#228833"),
    ("gray", "#888888"),
];

pub fn palette_color(name: &str) -> Option<&'static str> {
    PALETTE.iter().find(|(n, _)| *n == name).map(|(_, c)| *c)
}

/// One bar of the chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BucketRow {
    pub label: String,
    /// Per-bucket counts, fastest bucket first, Unsolved last; must match
    /// the scheme's bucket count.
    pub counts: Vec<usize>,
    /// Palette color name.
    pub color: String,
    pub hatch: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no rows to chart")]
    EmptyRows,
    #[error("row `{row}` has {got} buckets, scheme has {expected}")]
    MismatchedScheme {
        row: String,
        expected: usize,
        got: usize,
    },
    #[error("unknown palette color `{0}`")]
    UnknownColor(String),
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const LEFT: f64 = 180.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 58.0;
const BAR_H: f64 = 26.0;
const GAP: f64 = 14.0;
const PLOT_W: f64 = 560.0;

/// Render a task bucket chart. Every nonzero segment becomes exactly one
/// color rect (plus one pattern overlay rect when the row is hatched) with
/// its count rendered inside.
pub fn bucket_chart_svg(
    rows: &[BucketRow],
    scheme: &BucketScheme,
    title: &str,
) -> Result<String, ReportError> {
    if rows.is_empty() {
        return Err(ReportError::EmptyRows);
    }
    let labels = scheme.labels();
    for row in rows {
        if row.counts.len() != labels.len() {
            return Err(ReportError::MismatchedScheme {
                row: row.label.clone(),
                expected: labels.len(),
                got: row.counts.len(),
            });
        }
        if palette_color(&row.color).is_none() {
            return Err(ReportError::UnknownColor(row.color.clone()));
        }
    }

    let max_total = rows
        .iter()
        .map(|r| r.counts.iter().sum::<usize>())
        .max()
        .unwrap_or(1)
        .max(1);
    let width = LEFT + PLOT_W + RIGHT;
    let height = TOP + rows.len() as f64 * (BAR_H + GAP) + 28.0;
    let n_buckets = labels.len();
    let opacity =
        |i: usize| -> f64 { 1.0 - i as f64 * (0.82 / (n_buckets.saturating_sub(1).max(1)) as f64) };

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str("<defs><pattern id=\"crosshatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#ffffff\" stroke-width=\"2.2\"/></pattern></defs>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-size=\"15\" font-weight=\"bold\">{}</text>\n",
        LEFT,
        xml_escape(title)
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"42\" font-size=\"11\" fill=\"#444444\">buckets, darker is faster: {}</text>\n",
        LEFT,
        xml_escape(&labels.join("  "))
    ));

    for (ri, row) in rows.iter().enumerate() {
        let y = TOP + ri as f64 * (BAR_H + GAP);
        let color = palette_color(&row.color).expect("validated above");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
            LEFT - 10.0,
            y + BAR_H / 2.0 + 4.0,
            xml_escape(&row.label)
        ));
        let mut x = LEFT;
        for (bi, &count) in row.counts.iter().enumerate() {
            if count == 0 {
                continue;
            }
            let w = count as f64 / max_total as f64 * PLOT_W;
            svg.push_str(&format!(
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{BAR_H}\" fill=\"{color}\" fill-opacity=\"{:.3}\" stroke=\"#ffffff\" stroke-width=\"0.8\"/>\n",
                opacity(bi)
            ));
            if row.hatch {
                svg.push_str(&format!(
                    "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{BAR_H}\" fill=\"url(#crosshatch)\"/>\n"
                ));
            }
            let text_fill = if opacity(bi) > 0.55 { "#ffffff" } else { "#333333" };
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" fill=\"{text_fill}\" text-anchor=\"middle\">{count}</text>\n",
                x + w / 2.0,
                y + BAR_H / 2.0 + 4.0,
            ));
            x += w;
        }
    }

    let axis_y = TOP + rows.len() as f64 * (BAR_H + GAP) + 6.0;
    svg.push_str(&format!(
        "<text x=\"{LEFT}\" y=\"{axis_y}\" font-size=\"10\" fill=\"#666666\">0</text>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{axis_y}\" font-size=\"10\" fill=\"#666666\" text-anchor=\"end\">{max_total} tasks</text>\n",
        LEFT + PLOT_W
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

// ---------------------------------------------------------------------------
// tables

/// Three-significant-digit formatting for the human-readable table.
fn sig3(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let order = x.abs().log10().floor() as i32;
    let decimals = (2 - order).max(0) as usize;
    format!("{x:.decimals$}")
}

fn opt_full(x: Option<f64>) -> String {
    x.map(|v| format!("{v}")).unwrap_or_default()
}

fn opt_sig3(x: Option<f64>) -> String {
    x.map(sig3).unwrap_or_else(|| "-".to_string())
}

pub const TABLE_HEADER: [&str; 9] = [
    "task",
    "strategy",
    "status",
    "found_trials",
    "total_trials",
    "mean_time_s",
    "mean_tests",
    "mean_discards",
    "bucket",
];

/// CSV with full-precision numbers plus an aligned plain-text table with
/// three significant digits. Rows are sorted by (workload, task, strategy);
/// the task id embeds the workload, so its lexicographic order suffices.
pub fn export_table(summaries: &[TaskSummary]) -> (String, String) {
    let mut rows: Vec<&TaskSummary> = summaries.iter().collect();
    rows.sort_by(|a, b| (&a.task, &a.strategy).cmp(&(&b.task, &b.strategy)));

    let mut csv = TABLE_HEADER.join(",");
    csv.push('\n');
    let mut text_rows: Vec<Vec<String>> =
        vec![TABLE_HEADER.iter().map(|s| s.to_string()).collect()];
    for s in rows {
        let status = format!("{:?}", s.status);
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            s.task,
            s.strategy,
            status,
            s.found_trials,
            s.total_trials,
            opt_full(s.mean_time_s),
            opt_full(s.mean_tests),
            opt_full(s.mean_discards),
            s.bucket
        ));
        text_rows.push(vec![
            s.task.clone(),
            s.strategy.clone(),
            status,
            s.found_trials.to_string(),
            s.total_trials.to_string(),
            opt_sig3(s.mean_time_s),
            opt_sig3(s.mean_tests),
            opt_sig3(s.mean_discards),
            s.bucket.clone(),
        ]);
    }

    let widths: Vec<usize> = (0..TABLE_HEADER.len())
        .map(|c| {
            text_rows
                .iter()
                .map(|r| r[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut text = String::new();
    for row in &text_rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        text.push_str(line.join("  ").trim_end());
        text.push('\n');
    }
    (csv, text)
}
