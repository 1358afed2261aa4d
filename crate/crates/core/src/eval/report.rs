use serde::{Deserialize, Serialize};

use super::metrics::{MetricsTable, Rate};
use super::EvalError;
use crate::corruption::CorruptionKind;

pub const REPORT_VERSION: u32 = 1;

/// Rows are one table each, plus a `delta` row per table with a baseline.
/// Rates are percentages with two decimals; missing columns are empty.
pub const CSV_HEADER: &str = "agent,label,row,clean,pop-ups,resolution,marks,subtitle,multi-apps,accidental-touch,app-minimization,network-error,verification,average,average-with-clean,cells,errored";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" | "json-text" => Ok(Self::Json),
            "markdown" | "md" => Ok(Self::Markdown),
            _ => Err(format!("unknown report format `{s}` (csv, json, markdown)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub tables: Vec<MetricsTable>,
}

impl Report {
    pub fn new(tables: Vec<MetricsTable>) -> Self {
        Self {
            version: REPORT_VERSION,
            tables,
        }
    }
}

fn pct(r: Option<Rate>) -> String {
    r.map(|r| format!("{:.2}", r.rate * 100.0)).unwrap_or_default()
}

fn signed(d: Option<f64>) -> String {
    d.map(|d| format!("{:+.2}", d * 100.0)).unwrap_or_default()
}

fn rate_cells(t: &MetricsTable) -> Vec<String> {
    let mut v = vec![pct(t.clean)];
    v.extend(CorruptionKind::ALL.iter().map(|&k| pct(t.kind(k))));
    v.push(pct(t.corrupted));
    v.push(pct(t.overall));
    v
}

fn delta_cells(t: &MetricsTable) -> Option<Vec<String>> {
    let d = t.deltas.as_ref()?;
    let mut v = vec![signed(d.clean)];
    v.extend(
        CorruptionKind::ALL
            .iter()
            .map(|&k| signed(d.kinds.iter().find(|(kk, _)| *kk == k).map(|(_, x)| *x))),
    );
    v.push(signed(d.corrupted));
    v.push(signed(d.overall));
    Some(v)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn csv(report: &Report) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for t in &report.tables {
        let cells = t.overall.map_or(0, |r| r.cells);
        let mut rows = vec![("rate", rate_cells(t))];
        if let Some(d) = delta_cells(t) {
            rows.push(("delta", d));
        }
        for (kind, values) in rows {
            let mut line = vec![csv_field(&t.agent), csv_field(&t.label), kind.to_string()];
            line.extend(values);
            line.push(cells.to_string());
            line.push(t.errored.to_string());
            out.push_str(&line.join(","));
            out.push('\n');
        }
    }
    out
}

fn markdown(report: &Report) -> String {
    let mut head = vec!["Agent".to_string(), "Clean".to_string()];
    head.extend(CorruptionKind::ALL.iter().map(|k| k.title().to_string()));
    head.push("Average".into());
    head.push("Average (with clean)".into());
    let mut out = format!("| {} |\n", head.join(" | "));
    out.push_str(&format!("|---|{}\n", "---:|".repeat(head.len() - 1)));
    for t in &report.tables {
        let name = if t.label.is_empty() { &t.agent } else { &t.label };
        let esc = name.replace('|', "\\|");
        out.push_str(&format!("| {} | {} |\n", esc, rate_cells(t).join(" | ")));
        if let Some(d) = delta_cells(t) {
            out.push_str(&format!("| Δ vs {} | {} |\n", t.deltas.as_ref().map_or("", |d| &d.baseline).replace('|', "\\|"), d.join(" | ")));
        }
    }
    let errored: usize = report.tables.iter().map(|t| t.errored).sum();
    if errored > 0 {
        out.push_str(&format!("\n{errored} errored cells were excluded from the rates.\n"));
    }
    out
}

pub fn emit_report(report: &Report, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => csv(report),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(report),
    }
}

pub fn load_report(text: &str) -> Result<Report, EvalError> {
    let r: Report = serde_json::from_str(text).map_err(|e| EvalError::Report(e.to_string()))?;
    if r.version != REPORT_VERSION {
        return Err(EvalError::Report(format!("unsupported report version {}", r.version)));
    }
    Ok(r)
}
