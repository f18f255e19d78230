use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{ComparisonReport, Measurement};
use crate::integrators::Status;

use super::svg::escape;

/// Everything the HTML summary shows.
#[derive(Debug, Clone)]
pub struct HtmlInputs<'a> {
    pub title: &'a str,
    pub measurements: &'a [Measurement],
    pub comparison: Option<&'a ComparisonReport>,
    /// Plot links, relative to the HTML file.
    pub plots: &'a [String],
    pub command: &'a str,
    pub generated_at: &'a str,
    pub revision: &'a str,
}

const STYLE: &str = "body{font-family:sans-serif;margin:1.5em}\
table{border-collapse:collapse}\
td,th{border:1px solid #ccc;padding:2px 6px;text-align:right}\
td.id{text-align:left}\
tr.unsupported td{color:#999;background:#f4f4f4}\
tr.failed td{background:#fde8e8}\
.badge{display:inline-block;padding:0 6px;border-radius:3px;color:white;font-size:90%}\
.badge.pass{background:#2e7d32}\
.badge.fail{background:#c62828}\
.meta{color:#666}";

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Writes a self-contained summary page. The generation timestamp appears on
/// exactly one line (the `meta` paragraph).
pub fn html_summary(inputs: &HtmlInputs<'_>, path: &Path) -> Result<()> {
    let ms = inputs.measurements;
    let count = |f: &dyn Fn(&Status) -> bool| ms.iter().filter(|m| f(&m.status)).count();
    let ok = count(&|s| *s == Status::Ok);
    let unsupported = count(&|s| *s == Status::Unsupported);
    let failed = count(&|s| matches!(s, Status::Failed(_)));

    let mut s = String::new();
    let _ = writeln!(s, "<!DOCTYPE html>");
    let _ = writeln!(s, r#"<html xmlns="http://www.w3.org/1999/xhtml" lang="en">"#);
    let _ = writeln!(s, "<head>");
    let _ = writeln!(s, r#"<meta charset="utf-8"/>"#);
    let _ = writeln!(s, "<title>{}</title>", escape(inputs.title));
    let _ = writeln!(s, "<style>{STYLE}</style>");
    let _ = writeln!(s, "</head>");
    let _ = writeln!(s, "<body>");
    let _ = writeln!(s, "<h1>{}</h1>", escape(inputs.title));
    let _ = writeln!(
        s,
        r#"<p class="meta">generated {} at revision {}</p>"#,
        escape(inputs.generated_at),
        escape(inputs.revision)
    );
    let _ = writeln!(s, "<p class=\"command\"><code>{}</code></p>", escape(inputs.command));
    let _ = writeln!(
        s,
        r#"<p class="counts">measurements: {} (ok <span id="n-ok">{ok}</span>, unsupported <span id="n-unsupported">{unsupported}</span>, failed <span id="n-failed">{failed}</span>)</p>"#,
        ms.len()
    );
    if let Some(r) = inputs.comparison {
        let verdict = if r.passed() { "pass" } else { "fail" };
        let _ = writeln!(
            s,
            r#"<p class="verdict">baseline: {} checked, {} failed, {} not in baseline; overall <span class="verdict-{verdict}">{verdict}</span></p>"#,
            r.entries.len(),
            r.failures(),
            r.extras.len()
        );
    }

    if !inputs.plots.is_empty() {
        let _ = writeln!(s, "<h2>Plots</h2>\n<ul class=\"plots\">");
        for p in inputs.plots {
            let _ = writeln!(s, r#"<li><a href="{0}">{0}</a></li>"#, escape(p));
        }
        let _ = writeln!(s, "</ul>");
    }

    let _ = writeln!(s, "<h2>Measurements</h2>");
    let _ = writeln!(s, r#"<table class="suite">"#);
    let _ = writeln!(
        s,
        "<thead><tr><th>testcase</th><th>integrator</th><th>operation</th><th>divisions</th><th>value</th><th>reference</th><th>rel_error</th><th>n_points</th><th>runtime_s</th><th>status</th><th>check</th></tr></thead>"
    );
    let _ = writeln!(s, "<tbody>");
    for m in ms {
        let class = m.status.label();
        let verdict = inputs.comparison.and_then(|r| r.verdict_for(&m.key()));
        let badge = match (&m.status, verdict) {
            (Status::Failed(_), _) => r#"<span class="badge fail">fail</span>"#,
            (_, Some(v)) if !v.passed => r#"<span class="badge fail">fail</span>"#,
            (_, Some(_)) => r#"<span class="badge pass">pass</span>"#,
            (_, None) => "",
        };
        let status = match &m.status {
            Status::Failed(msg) if !msg.is_empty() => format!(r#"failed <span class="message">{}</span>"#, escape(msg)),
            st => st.label().to_string(),
        };
        let _ = writeln!(
            s,
            r#"<tr class="{class}"><td class="id">{}</td><td class="id">{}</td><td class="id">{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{:.3e}</td><td class="id">{status}</td><td>{badge}</td></tr>"#,
            escape(&m.testcase),
            escape(&m.integrator),
            m.operation,
            m.divisions,
            num(m.value),
            num(m.reference),
            num(m.rel_error),
            m.n_points,
            m.runtime_s
        );
    }
    let _ = writeln!(s, "</tbody>\n</table>");
    let _ = writeln!(s, "</body>\n</html>");

    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, s).map_err(|e| Error::io(path, e))
}
