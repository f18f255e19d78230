//! Hand-written SVG plots (no plotting dependency).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{CartesianMesh, TestCase};
use crate::harness::{ConvergenceTable, ShiftSeries};
use crate::quadrature::{fmt_f64, QuadratureData};

/// Errors below this are drawn at this value on log axes.
pub const ERROR_FLOOR: f64 = 1e-16;
pub const INTERFACE_SAMPLES: usize = 256;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Quadrature points as crosses over the mesh grid and the dashed red
/// interface. The viewBox is the domain's x-y extent with y flipped
/// (`y_svg = lo_y + hi_y - y`); 3D data is projected onto x-y.
pub fn plot_points_svg(tc: &TestCase<f64>, mesh: &CartesianMesh<f64>, quadrature: &QuadratureData<f64>, path: &Path) -> Result<()> {
    let d = &tc.domain;
    let (x0, y0, x1, y1) = (d.lo[0], d.lo[1], d.hi[0], d.hi[1]);
    let (w, h) = (x1 - x0, y1 - y0);
    let flip = |y: f64| y0 + y1 - y;
    let unit = w.max(h);
    let px_w = 600.0;
    let px_h = 600.0 * h / w;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" xmlns:xlink="http://www.w3.org/1999/xlink" viewBox="{} {} {} {}" width="{px_w}" height="{px_h:.1}">"#,
        fmt_f64(x0),
        fmt_f64(y0),
        fmt_f64(w),
        fmt_f64(h)
    );
    let _ = writeln!(s, "<title>{} quadrature points</title>", escape(&tc.id));
    let c = 0.006 * unit;
    let _ = writeln!(
        s,
        r#"<defs><path id="cross" d="M {m} {m} L {c} {c} M {m} {c} L {c} {m}" stroke="black" stroke-width="{sw}"/></defs>"#,
        m = fmt_f64(-c),
        c = fmt_f64(c),
        sw = fmt_f64(0.0015 * unit)
    );
    let _ = writeln!(s, r##"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"##, fmt_f64(x0), fmt_f64(y0), fmt_f64(w), fmt_f64(h));

    let _ = writeln!(s, r##"<g class="grid" stroke="#999999" stroke-width="{}" fill="none">"##, fmt_f64(0.002 * unit));
    let nx = mesh.divisions[0];
    let ny = mesh.divisions[1];
    let mx = |i: usize| if i == nx { mesh.bounds.hi[0] } else { mesh.bounds.lo[0] + mesh.cell_width(0) * i as f64 };
    let my = |j: usize| if j == ny { mesh.bounds.hi[1] } else { mesh.bounds.lo[1] + mesh.cell_width(1) * j as f64 };
    for i in 0..=nx {
        let x = fmt_f64(mx(i));
        let _ = writeln!(s, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}"/>"#, fmt_f64(flip(my(0))), fmt_f64(flip(my(ny))));
    }
    for j in 0..=ny {
        let y = fmt_f64(flip(my(j)));
        let _ = writeln!(s, r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}"/>"#, fmt_f64(mx(0)), fmt_f64(mx(nx)));
    }
    let _ = writeln!(s, "</g>");

    let pts: Vec<String> = tc
        .level_set
        .outline_xy(INTERFACE_SAMPLES)
        .iter()
        .map(|p| format!("{},{}", fmt_f64(p[0]), fmt_f64(flip(p[1]))))
        .collect();
    let _ = writeln!(
        s,
        r#"<polygon class="interface" points="{}" fill="none" stroke="red" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
        pts.join(" "),
        fmt_f64(0.004 * unit),
        fmt_f64(0.02 * unit),
        fmt_f64(0.012 * unit)
    );

    let _ = writeln!(s, r#"<g class="points">"#);
    for p in quadrature.points() {
        let _ = writeln!(
            s,
            r##"<use class="cross" href="#cross" xlink:href="#cross" x="{}" y="{}"/>"##,
            fmt_f64(p[0]),
            fmt_f64(flip(p[1]))
        );
    }
    let _ = writeln!(s, "</g>\n</svg>");
    write_file(path, &s)
}

/// Plot area in pixels.
struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x: (f64, f64),
    y: (f64, f64),
    log_x: bool,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let v = if self.log_x { x.log10() } else { x };
        self.left + (v - self.x.0) / (self.x.1 - self.x.0) * self.width
    }

    fn py(&self, err: f64) -> f64 {
        let v = err.max(ERROR_FLOOR).log10();
        self.top + (self.y.1 - v) / (self.y.1 - self.y.0) * self.height
    }
}

fn decades(lo: f64, hi: f64) -> (f64, f64) {
    let a = lo.max(ERROR_FLOOR).log10().floor();
    let b = hi.max(ERROR_FLOOR).log10().ceil();
    if b > a {
        (a, b)
    } else {
        (a - 1.0, b + 1.0)
    }
}

fn header(s: &mut String, title: &str, w: f64, h: f64) {
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text class="title" x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, escape(title));
}

fn axes(s: &mut String, f: &Frame, x_label: &str, y_label: &str, x_ticks: &[(f64, String)]) {
    let _ = writeln!(
        s,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        f.left, f.top, f.width, f.height
    );
    let _ = writeln!(s, r##"<g class="yticks" stroke="#dddddd">"##);
    let mut k = f.y.0;
    while k <= f.y.1 + 1e-9 {
        let y = f.py(10f64.powf(k));
        let _ = writeln!(s, r#"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}"/>"#, f.left, f.left + f.width);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" text-anchor="end" stroke="none" fill="black">1e{}</text>"#,
            f.left - 4.0,
            y + 4.0,
            k as i64
        );
        k += 1.0;
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<g class="xticks">"#);
    for (v, label) in x_ticks {
        let x = f.px(*v);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="black"/>"#, f.top + f.height, f.top + f.height + 4.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, f.top + f.height + 16.0, escape(label));
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(
        s,
        r#"<text class="xlabel" x="{}" y="{}" text-anchor="middle">{}</text>"#,
        f.left + f.width / 2.0,
        f.top + f.height + 34.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text class="ylabel" x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        f.top + f.height / 2.0,
        f.top + f.height / 2.0,
        escape(y_label)
    );
}

fn legend(s: &mut String, f: &Frame, names: &[String]) {
    let _ = writeln!(s, r#"<g class="legend">"#);
    for (i, n) in names.iter().enumerate() {
        let y = f.top + 14.0 + 16.0 * i as f64;
        let x = f.left + f.width + 12.0;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 18.0);
        let _ = writeln!(s, r#"<text class="legend-entry" x="{}" y="{}">{}</text>"#, x + 24.0, y + 4.0, escape(n));
    }
    let _ = writeln!(s, "</g>");
}

/// Log-log `h` vs relative error, one series per table, markers annotated
/// with the number of quadrature points.
pub fn plot_convergence_svg(tables: &[ConvergenceTable], title: &str, path: &Path) -> Result<()> {
    let rows = tables.iter().flat_map(|t| t.rows.iter());
    let hs: Vec<f64> = rows.clone().map(|r| r.h).filter(|h| *h > 0.0).collect();
    let es: Vec<f64> = rows.filter_map(|r| r.rel_error).collect();
    let (hmin, hmax) = hs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &h| (a.min(h), b.max(h)));
    let (hmin, hmax) = if hs.is_empty() { (0.1, 1.0) } else { (hmin, hmax) };
    let (emin, emax) = es.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    let y = if es.is_empty() { (-16.0, 0.0) } else { decades(emin, emax) };
    let pad = 0.05 * (hmax.log10() - hmin.log10()).max(0.1);
    let (w, h) = (760.0, 480.0);
    let f = Frame {
        left: 70.0,
        top: 36.0,
        width: 520.0,
        height: 390.0,
        x: (hmin.log10() - pad, hmax.log10() + pad),
        y,
        log_x: true,
    };
    let mut s = String::new();
    header(&mut s, title, w, h);
    let mut ticks: Vec<f64> = hs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    let ticks: Vec<(f64, String)> = ticks.into_iter().map(|h| (h, format!("{h:.4}"))).collect();
    axes(&mut s, &f, "h", "relative error", &ticks);
    for (i, t) in tables.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<(f64, f64, usize)> = t
            .rows
            .iter()
            .filter_map(|r| r.rel_error.map(|e| (f.px(r.h), f.py(e), r.n_points)))
            .collect();
        let _ = writeln!(s, r#"<g class="series" data-integrator="{}">"#, escape(&t.integrator));
        let line: Vec<String> = pts.iter().map(|(x, y, _)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(s, r#"<polyline class="line" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#, line.join(" "));
        for (x, y, n) in &pts {
            let _ = writeln!(s, r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="3.5" fill="{color}"/>"#);
            let _ = writeln!(s, r#"<text class="npts" x="{:.2}" y="{:.2}" font-size="10">{n}</text>"#, x + 5.0, y - 5.0);
        }
        let _ = writeln!(s, "</g>");
    }
    legend(&mut s, &f, &tables.iter().map(|t| t.integrator.clone()).collect::<Vec<_>>());
    let _ = writeln!(s, "</svg>");
    write_file(path, &s)
}

/// Step index (linear) vs relative error (log), one series per integrator.
/// Steps without an error (failed or no reference) are drawn at the floor.
pub fn plot_shift_svg(series: &[ShiftSeries], title: &str, path: &Path) -> Result<()> {
    let steps = series.iter().map(|s| s.measurements.len()).max().unwrap_or(1).max(2);
    let es: Vec<f64> = series.iter().flat_map(|s| s.measurements.iter().filter_map(|m| m.rel_error)).collect();
    let (emin, emax) = es.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &e| (a.min(e), b.max(e)));
    let y = if es.is_empty() { (-16.0, 0.0) } else { decades(emin, emax) };
    let (w, h) = (760.0, 480.0);
    let f = Frame {
        left: 70.0,
        top: 36.0,
        width: 520.0,
        height: 390.0,
        x: (0.0, (steps - 1) as f64),
        y,
        log_x: false,
    };
    let mut s = String::new();
    header(&mut s, title, w, h);
    let last = steps - 1;
    let ticks: Vec<(f64, String)> = (0..=4).map(|k| ((k * last / 4) as f64, (k * last / 4).to_string())).collect();
    axes(&mut s, &f, "step", "relative error", &ticks);
    for (i, sr) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = sr
            .measurements
            .iter()
            .enumerate()
            .map(|(k, m)| format!("{:.2},{:.2}", f.px(k as f64), f.py(m.rel_error.unwrap_or(ERROR_FLOOR))))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline class="line" data-integrator="{}" points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            escape(&sr.integrator),
            pts.join(" ")
        );
    }
    legend(&mut s, &f, &series.iter().map(|s| s.integrator.clone()).collect::<Vec<_>>());
    let _ = writeln!(s, "</svg>");
    write_file(path, &s)
}
