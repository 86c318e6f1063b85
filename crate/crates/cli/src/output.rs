use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use dctc_core::cloning::{Mode, SweepSummary};

pub const RESULT_HEADER: [&str; 9] = [
    "seed",
    "d",
    "N",
    "povm",
    "mode",
    "fidelity",
    "trace_distance",
    "max_freq_error",
    "wall_time",
];

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub seed: u64,
    pub d: usize,
    pub n: u64,
    pub povm: &'static str,
    pub mode: Mode,
    pub fidelity: f64,
    pub trace_distance: f64,
    pub max_freq_error: f64,
    /// Seconds; written as an empty field when absent.
    pub wall_time: Option<f64>,
}

fn writer(path: &Path) -> io::Result<csv::Writer<std::fs::File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(RESULT_HEADER)?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.d.to_string(),
            r.n.to_string(),
            r.povm.to_string(),
            r.mode.to_string(),
            r.fidelity.to_string(),
            r.trace_distance.to_string(),
            r.max_freq_error.to_string(),
            r.wall_time.map(|t| t.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()
}

pub fn write_residuals(path: &Path, residuals: &[f64]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record(["iteration", "residual"])?;
    for (k, r) in residuals.iter().enumerate() {
        w.write_record([(k + 1).to_string(), r.to_string()])?;
    }
    w.flush()
}

/// `results.csv` → `results.summary.csv`.
pub fn summary_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

pub fn write_summary(path: &Path, summary: &[SweepSummary]) -> io::Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "N",
        "trials",
        "infidelity_q10",
        "median_infidelity",
        "infidelity_q90",
        "median_trace_distance",
        "median_max_freq_error",
    ])?;
    for s in summary {
        w.write_record([
            s.n.to_string(),
            s.trials.to_string(),
            s.infidelity_q10.to_string(),
            s.median_infidelity.to_string(),
            s.infidelity_q90.to_string(),
            s.median_trace_distance.to_string(),
            s.median_max_freq_error.to_string(),
        ])?;
    }
    w.flush()
}

/// Log–log line plot of median infidelity (with the 10–90% band) against `N`.
pub fn render_svg(summary: &[SweepSummary]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let floor = 1e-12;
    let pts: Vec<(f64, f64, f64, f64)> = summary
        .iter()
        .map(|s| {
            (
                (s.n as f64).log10(),
                s.median_infidelity.max(floor).log10(),
                s.infidelity_q10.max(floor).log10(),
                s.infidelity_q90.max(floor).log10(),
            )
        })
        .collect();
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y, lo, hi) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(lo.min(y));
        y1 = y1.max(hi.max(y));
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<path d="M{M},{M} V{} H{}" fill="none" stroke="black"/>"#,
        H - M,
        W - M
    );
    for e in (x0 as i64)..=(x1 as i64) {
        let x = sx(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" text-anchor="middle">1e{e}</text>"#,
            H - M,
            H - M + 5.0,
            H - M + 20.0
        );
    }
    for e in (y0 as i64)..=(y1 as i64) {
        let y = sy(e as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y:.1}" x2="{M}" y2="{y:.1}" stroke="black"/><text x="{}" y="{:.1}" text-anchor="end">1e{e}</text>"#,
            M - 5.0,
            M - 8.0,
            y + 4.0
        );
    }
    if !pts.is_empty() {
        let upper: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.3))).collect();
        let lower: Vec<String> = pts.iter().rev().map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.2))).collect();
        let _ = writeln!(
            s,
            r##"<polygon points="{} {}" fill="#4878d0" fill-opacity="0.2" stroke="none"/>"##,
            upper.join(" "),
            lower.join(" ")
        );
        let line: Vec<String> = pts.iter().map(|p| format!("{:.1},{:.1}", sx(p.0), sy(p.1))).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#4878d0" stroke-width="2"/>"##,
            line.join(" ")
        );
        for p in &pts {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#4878d0"/>"##,
                sx(p.0),
                sy(p.1)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">N (CTC systems)</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">median infidelity 1 − F</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}
