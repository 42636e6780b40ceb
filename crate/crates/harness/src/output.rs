//! CSV, SVG and checkpoint files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use metapred_core::channel::ChannelFrame;
use metapred_core::{Complex64, ComplexVector};

use crate::error::{HarnessError, Result};
use crate::experiment::{MetricRecord, OnlineTrace};

pub const RECORD_HEADER: [&str; 5] = ["scheme", "sweep", "seed", "mse", "runtime_ms"];

/// 17 significant digits: round-trips every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e)),
        _ => Ok(()),
    }
}

pub fn records_to_csv_string(records: &[MetricRecord]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    write_records(&mut w, records)?;
    let bytes = w.into_inner().map_err(|e| HarnessError::parse("csv buffer", e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_records<W: Write>(w: &mut csv::Writer<W>, records: &[MetricRecord]) -> Result<()> {
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record([
            r.scheme.clone(),
            r.sweep.to_string(),
            r.seed.to_string(),
            fmt_f64(r.mse),
            fmt_f64(r.runtime_ms),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::parse("csv flush", e.to_string()))?;
    Ok(())
}

pub fn write_records_csv(records: &[MetricRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    ensure_parent(path)?;
    let mut w = writer(path)?;
    write_records(&mut w, records)
}

pub fn read_records_csv(path: &Path) -> Result<Vec<MetricRecord>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_records_csv(&text)
}

pub fn parse_records_csv(text: &str) -> Result<Vec<MetricRecord>> {
    let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = rd.headers()?.clone();
    if header.iter().ne(RECORD_HEADER) {
        return Err(HarnessError::parse("record header", format!("{header:?}")));
    }
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let num =
            |i: usize| row[i].parse::<f64>().map_err(|e| HarnessError::parse("record", format!("{}: {e}", &row[i])));
        let int =
            |i: usize| row[i].parse::<u64>().map_err(|e| HarnessError::parse("record", format!("{}: {e}", &row[i])));
        out.push(MetricRecord {
            scheme: row[0].to_string(),
            sweep: int(1)?,
            seed: int(2)?,
            mse: num(3)?,
            runtime_ms: num(4)?,
        });
    }
    Ok(out)
}

/// A named polyline for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Mean MSE per (scheme, sweep), averaged over replicates, in first-seen
/// scheme order.
pub fn mean_series(records: &[MetricRecord]) -> Vec<Series> {
    let mut names: Vec<&str> = Vec::new();
    let mut acc: BTreeMap<(usize, u64), (f64, usize)> = BTreeMap::new();
    for r in records {
        let k = match names.iter().position(|n| *n == r.scheme) {
            Some(k) => k,
            None => {
                names.push(&r.scheme);
                names.len() - 1
            }
        };
        let e = acc.entry((k, r.sweep)).or_insert((0.0, 0));
        e.0 += r.mse;
        e.1 += 1;
    }
    names
        .iter()
        .enumerate()
        .map(|(k, name)| Series {
            name: name.to_string(),
            points: acc.range((k, 0)..=(k, u64::MAX)).map(|(&(_, x), &(s, n))| (x as f64, s / n as f64)).collect(),
        })
        .collect()
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line plot with a log-scaled y axis. The x axis is logarithmic when the
/// data spans more than a decade of positive values.
pub fn render_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let (w, h) = (720.0, 480.0);
    let (left, right, top, bottom) = (80.0, 170.0, 40.0, 60.0);
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.1 > 0.0 && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.1, 1.0);
    }
    let log_x = x0 > 0.0 && x1 / x0 > 10.0;
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let (ax0, mut ax1) = (tx(x0), tx(x1));
    if ax1 <= ax0 {
        ax1 = ax0 + 1.0;
    }
    let (ly0, mut ly1) = (y0.log10().floor(), y1.log10().ceil());
    if ly1 <= ly0 {
        ly1 = ly0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let px = |x: f64| left + (tx(x) - ax0) / (ax1 - ax0) * pw;
    let py = |y: f64| top + (ly1 - y.log10()) / (ly1 - ly0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    // y decades
    let mut d = ly0;
    while d <= ly1 + 1e-9 {
        let y = top + (ly1 - d) / (ly1 - ly0) * ph;
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw);
        let _ =
            writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, left - 6.0, y + 4.0, d as i64);
        d += 1.0;
    }
    // x ticks
    let ticks: Vec<f64> = if log_x {
        let mut t = Vec::new();
        let mut e = x0.log10().floor();
        while e <= x1.log10().ceil() + 1e-9 {
            let v = 10f64.powf(e);
            if v >= x0 * (1.0 - 1e-9) && v <= x1 * (1.0 + 1e-9) {
                t.push(v);
            }
            e += 1.0;
        }
        t
    } else {
        (0..=5).map(|i| x0 + (x1 - x0) * i as f64 / 5.0).collect()
    };
    for v in ticks {
        let x = px(v);
        let _ = writeln!(s, r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{:.2}" stroke="#eee"/>"##, top + ph);
        let _ =
            writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, top + ph + 16.0, fmt_tick(v));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        h - 18.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
        top + ph / 2.0,
        escape(y_label)
    );
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path: Vec<String> = ser
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ =
            writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#, path.join(" "));
        let ly = top + 16.0 + 18.0 * k as f64;
        let lx = left + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 24.0
        );
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&ser.name));
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e7 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| HarnessError::io(path, e))
}

/// Writes `<stem>.csv` and `<stem>.svg` under `dir`; returns both paths.
pub fn emit_outputs(records: &[MetricRecord], dir: &Path, stem: &str, x_label: &str) -> Result<(PathBuf, PathBuf)> {
    if records.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    let csv_path = dir.join(format!("{stem}.csv"));
    let svg_path = dir.join(format!("{stem}.svg"));
    write_records_csv(records, &csv_path)?;
    write_text(&svg_path, &render_svg(&mean_series(records), stem, x_label, "MSE"))?;
    Ok((csv_path, svg_path))
}

/// Online traces as `frame,scheme,M,mse,smoothed_mse`; `M` is empty for
/// baselines.
pub fn write_trace_csv(traces: &[OnlineTrace], path: &Path) -> Result<()> {
    if traces.is_empty() {
        return Err(HarnessError::NoRecords);
    }
    ensure_parent(path)?;
    let mut w = writer(path)?;
    w.write_record(["frame", "scheme", "M", "mse", "smoothed_mse"])?;
    for t in traces {
        let m = t.memory.map(|m| m.to_string()).unwrap_or_default();
        for (f, (mse, sm)) in t.mse.iter().zip(&t.smoothed).enumerate() {
            w.write_record([(f + 1).to_string(), t.scheme.clone(), m.clone(), fmt_f64(*mse), fmt_f64(*sm)])?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn trace_series(traces: &[OnlineTrace]) -> Vec<Series> {
    traces
        .iter()
        .map(|t| Series {
            name: t.scheme.clone(),
            points: t.smoothed.iter().enumerate().map(|(f, &y)| ((f + 1) as f64, y)).collect(),
        })
        .collect()
}

const CHECKPOINT_VERSION: u32 = 1;

/// Meta-learned hyperparameters on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub lambda: f64,
    pub bias: ComplexVector,
}

/// One header line and one value line:
/// `version,window,lambda,re_0,im_0,…`.
pub fn write_checkpoint(ck: &Checkpoint, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = writer(path)?;
    let mut header = vec!["version".to_string(), "window".to_string(), "lambda".to_string()];
    let mut row = vec![CHECKPOINT_VERSION.to_string(), ck.bias.len().to_string(), fmt_f64(ck.lambda)];
    for (i, z) in ck.bias.iter().enumerate() {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
        row.push(fmt_f64(z.re));
        row.push(fmt_f64(z.im));
    }
    w.write_record(&header)?;
    w.write_record(&row)?;
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let mut rd = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let row = rd.records().next().ok_or_else(|| HarnessError::parse("checkpoint", "no value row"))??;
    let bad = |d: String| HarnessError::parse("checkpoint", d);
    let version: u32 = row.get(0).unwrap_or("").parse().map_err(|e| bad(format!("version: {e}")))?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let window: usize = row.get(1).unwrap_or("").parse().map_err(|e| bad(format!("window: {e}")))?;
    if row.len() != 3 + 2 * window {
        return Err(bad(format!("{} fields for window {window}", row.len())));
    }
    let num = |i: usize| row[i].parse::<f64>().map_err(|e| bad(format!("field {i}: {e}")));
    let lambda = num(2)?;
    let bias = (0..window).map(|i| Ok(Complex64::new(num(3 + 2 * i)?, num(4 + 2 * i)?))).collect::<Result<Vec<_>>>()?;
    Ok(Checkpoint { lambda, bias: bias.into() })
}

/// Frames as `frame_id,slot,re,im` with 1-based slots.
pub fn write_frames_csv(frames: &[ChannelFrame], path: &Path) -> Result<()> {
    ensure_parent(path)?;
    let mut w = writer(path)?;
    w.write_record(["frame_id", "slot", "re", "im"])?;
    for f in frames {
        for (l, z) in f.gains.iter().enumerate() {
            w.write_record([f.frame_id.to_string(), (l + 1).to_string(), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}
