//! Result emission: sweep tables as CSV or JSON, and a self-contained SVG
//! line chart (minimum SNR against network size, one series per scheme and
//! payload). All three writers are pure functions of the rows, so identical
//! inputs produce byte-identical output.

use std::fmt::Write as _;
use std::fs::File;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimize::SweepRow;
use crate::params::Scheme;

/// Output encodings for result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
    Svg,
}

impl ReportFormat {
    pub const ALL: [ReportFormat; 3] = [ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg];

    pub fn name(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
            ReportFormat::Svg => "svg",
        }
    }
}

impl std::fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ReportFormat::ALL
            .into_iter()
            .find(|format| format.name() == s)
            .ok_or_else(|| {
                Error::domain(format!("unknown format {s:?} (expected csv, json or svg)"))
            })
    }
}

/// Writes a sweep table in the requested format.
///
/// CSV rows carry the exact header `scheme,n,m_bits,min_snr_db,aux,status`
/// with an empty `min_snr_db` field on bracket failures; JSON is a pretty
/// array of objects with the same keys; SVG is a standalone chart.
pub fn write_results<W: io::Write>(
    rows: &[SweepRow],
    format: ReportFormat,
    mut writer: W,
) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::domain("refusing to write an empty result table"));
    }
    match format {
        ReportFormat::Csv => {
            let mut csv = csv::Writer::from_writer(writer);
            for row in rows {
                csv.serialize(row)?;
            }
            csv.flush().map_err(Error::from)?;
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut writer, rows)?;
            writer.write_all(b"\n")?;
        }
        ReportFormat::Svg => {
            writer.write_all(render_svg(rows).as_bytes())?;
        }
    }
    Ok(())
}

/// [`write_results`] into a freshly created file, tagging any I/O failure
/// with the path.
pub fn write_results_file(rows: &[SweepRow], format: ReportFormat, path: &Path) -> Result<()> {
    let tag = |source: io::Error| Error::Write { path: path.to_path_buf(), source };
    let file = File::create(path).map_err(tag)?;
    write_results(rows, format, io::BufWriter::new(file)).map_err(|err| match err {
        Error::Io(source) => tag(source),
        other => other,
    })
}

// ---------------------------------------------------------------------------
// SVG rendering
// ---------------------------------------------------------------------------

const SVG_W: f64 = 800.0;
const SVG_H: f64 = 500.0;
// Plot rectangle inside the canvas; the right margin hosts the legend.
const PLOT: (f64, f64, f64, f64) = (70.0, 20.0, 620.0, 445.0); // x0, y0, x1, y1

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// One chart series: every row sharing a `(scheme, m_bits)` pair, in input
/// order. Bracket-failure rows hold no value and leave a gap.
struct Series {
    scheme: Scheme,
    m_bits: u64,
    points: Vec<(usize, Option<f64>)>,
}

fn collect_series(rows: &[SweepRow]) -> Vec<Series> {
    let mut series: Vec<Series> = Vec::new();
    for row in rows {
        let point = (row.n, row.min_snr_db);
        match series
            .iter_mut()
            .find(|s| s.scheme == row.scheme && s.m_bits == row.m_bits)
        {
            Some(s) => s.points.push(point),
            None => series.push(Series {
                scheme: row.scheme,
                m_bits: row.m_bits,
                points: vec![point],
            }),
        }
    }
    series
}

fn render_svg(rows: &[SweepRow]) -> String {
    let series = collect_series(rows);

    // Data ranges. The x axis spans every row; the y axis only the rows
    // that produced a value (falling back to a unit band if none did).
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in rows {
        x_min = x_min.min(row.n as f64);
        x_max = x_max.max(row.n as f64);
        if let Some(snr) = row.min_snr_db {
            y_min = y_min.min(snr);
            y_max = y_max.max(snr);
        }
    }
    if y_min > y_max {
        (y_min, y_max) = (0.0, 1.0);
    }
    if x_max == x_min {
        x_min -= 1.0;
        x_max += 1.0;
    }
    if y_max == y_min {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let (px0, py0, px1, py1) = PLOT;
    let x_of = |n: f64| px0 + (n - x_min) / (x_max - x_min) * (px1 - px0);
    let y_of = |v: f64| py1 - (v - y_min) / (y_max - y_min) * (py1 - py0);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {SVG_W:.0} {SVG_H:.0}\" \
         font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(svg, "<rect width=\"{SVG_W:.0}\" height=\"{SVG_H:.0}\" fill=\"white\"/>");

    // Axes with six ticks each.
    let _ = writeln!(
        svg,
        "<g stroke=\"black\" fill=\"none\">\
         <line x1=\"{px0:.2}\" y1=\"{py1:.2}\" x2=\"{px1:.2}\" y2=\"{py1:.2}\"/>\
         <line x1=\"{px0:.2}\" y1=\"{py0:.2}\" x2=\"{px0:.2}\" y2=\"{py1:.2}\"/></g>"
    );
    for i in 0..=5 {
        let t = i as f64 / 5.0;
        let xv = x_min + t * (x_max - x_min);
        let yv = y_min + t * (y_max - y_min);
        let (xt, yt) = (x_of(xv), y_of(yv));
        let _ = writeln!(
            svg,
            "<line x1=\"{xt:.2}\" y1=\"{py1:.2}\" x2=\"{xt:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{xt:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{xv:.0}</text>",
            py1 + 5.0,
            py1 + 20.0,
        );
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{yt:.2}\" x2=\"{px0:.2}\" y2=\"{yt:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{yv:.1}</text>",
            px0 - 5.0,
            px0 - 9.0,
            yt + 4.0,
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">clients n</text>",
        0.5 * (px0 + px1),
        py1 + 40.0,
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {:.2})\">min SNR (dB)</text>",
        0.5 * (py0 + py1),
        0.5 * (py0 + py1),
    );

    // Series polylines, point markers and legend, in first-appearance order.
    for (idx, s) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let solved: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter_map(|&(n, snr)| snr.map(|v| (x_of(n as f64), y_of(v))))
            .collect();
        if solved.len() >= 2 {
            let path: Vec<String> =
                solved.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                svg,
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" \
                 points=\"{}\"/>",
                path.join(" ")
            );
        }
        for (x, y) in &solved {
            let _ = writeln!(svg, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>");
        }
        let ly = py0 + 14.0 + 18.0 * idx as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"1.5\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\">{} m={}</text>",
            px1 + 10.0,
            px1 + 34.0,
            px1 + 40.0,
            ly + 4.0,
            s.scheme,
            s.m_bits,
        );
    }
    svg.push_str("</svg>\n");
    svg
}
