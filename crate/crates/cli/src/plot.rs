//! Minimal SVG line charts rendered from the CSV reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use picard_ns::sweep::{read_border_csv, read_profiles_csv, read_records_csv, SweepRecord};
use picard_ns::Error;

use crate::Failure;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_Y: f64 = 50.0;
const U1_COLOR: &str = "#c0392b";
const U2_COLOR: &str = "#2c6fbb";
const PALETTE: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#a6761d"];

pub struct Series {
    pub label: String,
    pub color: String,
    pub dashed: bool,
    pub markers_only: bool,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    fn line(label: impl Into<String>, color: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            color: color.into(),
            dashed: false,
            markers_only: false,
            points,
        }
    }
}

pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil().max(lo + 1.0);
        } else if hi - lo < 1e-300 {
            lo -= 0.5;
            hi += 0.5;
        }
        Some(Self { lo, hi, log })
    }

    /// Position in [0, 1] along the axis.
    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0) as i32;
            (self.lo as i32..=self.hi as i32)
                .step_by(step as usize)
                .map(|e| (10f64.powi(e), format!("1e{e}")))
                .collect()
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

fn usable(p: &(f64, f64), log_x: bool, log_y: bool) -> bool {
    p.0.is_finite() && p.1.is_finite() && (!log_x || p.0 > 0.0) && (!log_y || p.1 > 0.0)
}

impl Chart {
    pub fn render(&self) -> String {
        let pts = || {
            self.series
                .iter()
                .flat_map(|s| s.points.iter())
                .filter(|p| usable(p, self.log_x, self.log_y))
        };
        let mut svg = String::new();
        let _ = write!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        svg.push('\n');
        let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let (Some(xa), Some(ya)) = (
            Axis::fit(pts().map(|p| p.0), self.log_x),
            Axis::fit(pts().map(|p| p.1), self.log_y),
        ) else {
            let _ = writeln!(svg, r#"<text x="{}" y="{}">no data</text></svg>"#, WIDTH / 2.0, HEIGHT / 2.0);
            return svg;
        };
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_Y, MARGIN_Y);
        let sx = |v: f64| x0 + xa.frac(v) * (x1 - x0);
        let sy = |v: f64| y0 + ya.frac(v) * (y1 - y0);

        let _ = writeln!(
            svg,
            r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for (v, label) in xa.ticks() {
            let x = sx(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x:.2}" y1="{y1}" x2="{x:.2}" y2="{y0}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"##,
                y0 + 16.0
            );
        }
        for (v, label) in ya.ticks() {
            let y = sy(v);
            let _ = writeln!(
                svg,
                r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{label}</text>"##,
                x0 - 6.0,
                y + 4.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let mut pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .copied()
                .filter(|p| usable(p, self.log_x, self.log_y))
                .collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            if !s.markers_only && pts.len() > 1 {
                let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                    path.join(" "),
                    s.color
                );
            }
            if s.markers_only || pts.len() == 1 {
                for &(x, y) in &pts {
                    let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, sx(x), sy(y), s.color);
                }
            }
            let ly = y1 + 14.0 + 16.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="12" height="3" fill="{}"/><text x="{}" y="{ly}">{}</text>"#,
                x1 + 10.0,
                ly - 4.0,
                s.color,
                x1 + 28.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn list_matching(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, Failure> {
    let entries = std::fs::read_dir(dir).map_err(|e| Failure::from(Error::io(dir, e)))?;
    let mut out: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(prefix) && n.ends_with(".csv"))
        })
        .collect();
    out.sort();
    Ok(out)
}

fn write_chart(out: &Path, name: &str, chart: &Chart) -> Result<PathBuf, Failure> {
    let path = out.join(name);
    std::fs::write(&path, chart.render()).map_err(|e| Failure::from(Error::io(&path, e)))?;
    Ok(path)
}

fn border_chart(dir: &Path, records: &[SweepRecord]) -> Result<Option<Chart>, Failure> {
    let files = list_matching(dir, "border_")?;
    if files.is_empty() {
        return Ok(None);
    }
    let mut curves = files
        .iter()
        .map(|f| read_border_csv(f))
        .collect::<picard_ns::Result<Vec<_>>>()?;
    curves.sort_by(|a, b| a.nu.total_cmp(&b.nu));
    let mut series: Vec<Series> = curves
        .iter()
        .enumerate()
        .map(|(i, c)| {
            Series::line(
                format!("nu = {}", c.nu),
                PALETTE[i % PALETTE.len()],
                c.points.iter().map(|p| (p.amplitude, p.mu_border)).collect(),
            )
        })
        .collect();
    let mut dots: Vec<(f64, f64)> = records.iter().map(|r| (r.amplitude, r.mu)).collect();
    dots.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    dots.dedup();
    if !dots.is_empty() {
        series.push(Series {
            markers_only: true,
            ..Series::line("sweep points", "black", dots)
        });
    }
    Ok(Some(Chart {
        title: "Convergence border F / (mu^4 nu) = 1".into(),
        x_label: "F".into(),
        y_label: "mu".into(),
        log_x: true,
        log_y: false,
        series,
    }))
}

fn amplitude_charts(records: &[SweepRecord]) -> Vec<(String, Chart)> {
    let mut by_mode: BTreeMap<u32, Vec<&SweepRecord>> = BTreeMap::new();
    for r in records {
        by_mode.entry(r.n).or_default().push(r);
    }
    let mut charts = Vec::new();
    for (n, recs) in by_mode {
        let nu0 = recs.iter().map(|r| r.nu).fold(f64::INFINITY, f64::min);
        let at = |pick: fn(&SweepRecord) -> Option<f64>| -> Vec<(f64, f64)> {
            recs.iter()
                .filter(|r| r.nu == nu0)
                .filter_map(|r| pick(r).map(|v| (r.amplitude, v)))
                .collect()
        };
        charts.push((
            format!("amplitudes_n{n}.svg"),
            Chart {
                title: format!("n = {n}, nu = {nu0}: max |u1| and max |u2*|"),
                x_label: "F".into(),
                y_label: "max velocity".into(),
                log_x: true,
                log_y: true,
                series: vec![
                    Series::line("|u1|", U1_COLOR, at(|r| r.max_u1)),
                    Series::line("|u2*|", U2_COLOR, at(|r| r.max_u2star)),
                ],
            },
        ));

        let mut by_f: BTreeMap<u64, Vec<&SweepRecord>> = BTreeMap::new();
        for r in &recs {
            by_f.entry(r.amplitude.to_bits()).or_default().push(r);
        }
        let mut series = Vec::new();
        for (f, group) in by_f {
            let f = f64::from_bits(f);
            let pts = |pick: fn(&SweepRecord) -> Option<f64>| -> Vec<(f64, f64)> {
                group.iter().filter_map(|r| pick(r).map(|v| (r.nu, v))).collect()
            };
            series.push(Series::line(format!("|u1| F={f:.4}"), U1_COLOR, pts(|r| r.max_u1)));
            series.push(Series {
                dashed: true,
                ..Series::line(format!("|u2*| F={f:.4}"), U2_COLOR, pts(|r| r.max_u2star))
            });
        }
        charts.push((
            format!("viscosity_n{n}.svg"),
            Chart {
                title: format!("n = {n}: max velocity against viscosity"),
                x_label: "nu".into(),
                y_label: "max velocity".into(),
                log_x: false,
                log_y: true,
                series,
            },
        ));
    }
    charts
}

fn profile_chart(path: &Path) -> Result<(String, Chart), Failure> {
    let table = read_profiles_csv(path)?;
    let mut by_r: BTreeMap<u64, Vec<(f64, f64, f64)>> = BTreeMap::new();
    for s in &table.samples {
        by_r.entry(s.r.to_bits()).or_default().push((s.phi, s.amp1, s.amp2));
    }
    let mut series = Vec::new();
    for (i, (r, pts)) in by_r.into_iter().enumerate() {
        let r = f64::from_bits(r);
        let color = PALETTE[i % PALETTE.len()];
        series.push(Series::line(format!("|u1| r={r}"), color, pts.iter().map(|p| (p.0, p.1)).collect()));
        series.push(Series {
            dashed: true,
            ..Series::line(format!("|u2*| r={r}"), color, pts.iter().map(|p| (p.0, p.2)).collect())
        });
    }
    Ok((
        format!("profiles_n{}.svg", table.n),
        Chart {
            title: format!("n = {}, F = {}, mu = {:.4}, nu = {}: final-time profiles", table.n, table.amplitude, table.mu, table.nu),
            x_label: "phi".into(),
            y_label: "amplitude".into(),
            log_x: false,
            log_y: true,
            series,
        },
    ))
}

/// Render every chart the files in `input` support; returns the SVG paths.
pub fn render_dir(input: &Path, out: &Path) -> Result<Vec<PathBuf>, Failure> {
    if !input.is_dir() {
        return Err(Failure::Io(format!("{}: not a directory", input.display())));
    }
    std::fs::create_dir_all(out).map_err(|e| Failure::from(Error::io(out, e)))?;
    let records_path = input.join("records.csv");
    let records = if records_path.exists() {
        read_records_csv(&records_path)?
    } else {
        Vec::new()
    };
    let mut written = Vec::new();
    if let Some(chart) = border_chart(input, &records)? {
        written.push(write_chart(out, "borders.svg", &chart)?);
    }
    for (name, chart) in amplitude_charts(&records) {
        written.push(write_chart(out, &name, &chart)?);
    }
    for path in list_matching(input, "profiles_n")? {
        let (name, chart) = profile_chart(&path)?;
        written.push(write_chart(out, &name, &chart)?);
    }
    if written.is_empty() {
        return Err(Failure::Io(format!("{}: no report files found", input.display())));
    }
    Ok(written)
}
