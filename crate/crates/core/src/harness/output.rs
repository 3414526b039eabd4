//! CSV, SVG and manifest writers. Every file is written to a temporary
//! sibling and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::error::{FdecError, Result};
use crate::harness::{ResultRow, SparsityRow};

pub const RESULT_HEADER: &str = "experiment,field,p,alpha,n,rms_error,eoc,wall_ms";

pub const SPARSITY_HEADER: &str =
    "n,beta,p,n_p,n_0,nnz_b,expected_nnz_b,m_rows,m_cols,nnz_m,expected_nnz_m,density_m,match";

/// Writes `contents` to `path` via a temporary file and rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| FdecError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    let mut f = fs::File::create(&tmp).map_err(|e| FdecError::io(&tmp, e))?;
    f.write_all(contents).map_err(|e| FdecError::io(&tmp, e))?;
    f.sync_all().map_err(|e| FdecError::io(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| FdecError::io(path, e))
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Result table in the shared CSV schema. `wall_ms` is left empty unless
/// `timings` is set, so that identical configs give identical bytes.
pub fn results_csv(rows: &[ResultRow], timings: bool) -> String {
    let mut s = String::with_capacity(64 * (rows.len() + 1));
    s.push_str(RESULT_HEADER);
    s.push('\n');
    for r in rows {
        let wall = if timings { format!("{:.3}", r.wall_ms) } else { String::new() };
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.experiment,
            r.field,
            r.p,
            fmt_f64(r.alpha),
            r.n,
            fmt_f64(r.rms_error),
            fmt_opt(r.eoc),
            wall
        );
    }
    s
}

pub fn sparsity_csv(rows: &[SparsityRow]) -> String {
    let mut s = String::from(SPARSITY_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.beta),
            r.p,
            r.n_p,
            r.n0,
            r.nnz_b,
            r.expected_nnz_b,
            r.m_rows,
            r.m_cols,
            r.nnz_m,
            r.expected_nnz_m,
            fmt_f64(r.density_m),
            r.matches
        );
    }
    s
}

/// Log-log (x, y) pairs for the α-sweep.
pub fn loglog_csv(rows: &[ResultRow]) -> String {
    let mut s = String::from("p,alpha,log_one_minus_alpha,log_error\n");
    for r in rows.iter().filter(|r| r.rms_error > 0.0) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            r.p,
            fmt_f64(r.alpha),
            fmt_f64((1.0 - r.alpha).ln()),
            fmt_f64(r.rms_error.ln())
        );
    }
    s
}

/// One labelled polyline of positive data.
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn log_range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| *v > 0.0 && v.is_finite())
        .map(f64::log10)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let (lo, hi) = (lo.floor(), hi.ceil());
    Some(if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) })
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Log-log line plot with one series per entry.
pub fn svg_loglog(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let (w, h) = (640.0, 440.0);
    let (left, right, top, bottom) = (80.0, 150.0, 40.0, 60.0);
    let pw = w - left - right;
    let ph = h - top - bottom;
    let xr = log_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))).unwrap_or((0.0, 1.0));
    let yr = log_range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))).unwrap_or((0.0, 1.0));
    let sx = |x: f64| left + (x.log10() - xr.0) / (xr.1 - xr.0) * pw;
    let sy = |y: f64| top + ph - (y.log10() - yr.0) / (yr.1 - yr.0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, left + pw / 2.0, escape(title));
    let _ = writeln!(s, r##"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
    for d in (xr.0 as i32)..=(xr.1 as i32) {
        let x = left + (d as f64 - xr.0) / (xr.1 - xr.0) * pw;
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/>"##, top + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">1e{d}</text>"#, top + ph + 18.0);
    }
    for d in (yr.0 as i32)..=(yr.1 as i32) {
        let y = top + ph - (d as f64 - yr.0) / (yr.1 - yr.0) * ph;
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 6.0, y + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, h - 18.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(ylabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" "));
            for p in &pts {
                let (x, y) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
            }
        }
        let ly = top + 14.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, e: f64, eoc: Option<f64>) -> ResultRow {
        ResultRow {
            experiment: "convergence".into(),
            field: "paper-f".into(),
            p: 0,
            alpha: 0.25,
            n,
            rms_error: e,
            eoc,
            wall_ms: 12.5,
        }
    }

    #[test]
    fn csv_layout() {
        let s = results_csv(&[row(2, 0.5, None), row(4, 0.125, Some(2.0))], false);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], RESULT_HEADER);
        assert_eq!(lines[1], "convergence,paper-f,0,2.5000000000000000e-1,2,5.0000000000000000e-1,,");
        assert_eq!(lines[2], "convergence,paper-f,0,2.5000000000000000e-1,4,1.2500000000000000e-1,2.0000000000000000e0,");
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert!(results_csv(&[row(2, 0.5, None)], true).lines().nth(1).unwrap().ends_with(",12.500"));
    }

    #[test]
    fn full_precision_round_trip() {
        let x = 0.1f64 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let s = svg_loglog(
            "t<1>",
            "n",
            "error",
            &[Series { label: "alpha=0.25".into(), points: vec![(2.0, 0.5), (4.0, 0.1), (8.0, 0.0)] }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t&lt;1&gt;"));
        assert_eq!(s.matches("<circle").count(), 2);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.csv");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
