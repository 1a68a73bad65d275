// SPDX-License-Identifier: Apache-2.0

//! Artifact writers: trace CSV, aligned and key-value summaries, gnuplot
//! scripts, and tuner history.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::family::FamilyReport;
use super::runner::{RunError, RunOutcome};
use super::trace::{fmt_g, SimTrace};
use crate::tuner::GenerationRecord;

/// One line of a summary table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variant: String,
    pub controller: String,
    pub mae: f64,
    pub iae: f64,
    pub sup_sq: f64,
    pub window: [f64; 2],
    /// `ok`, or the error that stopped the run.
    pub status: String,
    pub feasible: Option<bool>,
}

impl SummaryRow {
    pub fn new(variant: &str, controller: &str, outcome: &Result<RunOutcome, RunError>) -> Self {
        match outcome {
            Ok(o) => Self {
                variant: variant.into(),
                controller: controller.into(),
                mae: o.metrics.mae,
                iae: o.metrics.iae,
                sup_sq: o.metrics.sup_sq,
                window: [o.metrics.window.0, o.metrics.window.1],
                status: "ok".into(),
                feasible: Some(o.stability.feasible),
            },
            Err(e) => Self {
                variant: variant.into(),
                controller: controller.into(),
                mae: f64::NAN,
                iae: f64::NAN,
                sup_sq: f64::NAN,
                window: [f64::NAN, f64::NAN],
                status: e.to_string(),
                feasible: e.stability.as_ref().map(|s| s.feasible),
            },
        }
    }
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    name: &'a str,
    run: &'a [SummaryRow],
}

pub fn summary_rows(report: &FamilyReport) -> Vec<SummaryRow> {
    report
        .rows
        .iter()
        .map(|r| SummaryRow::new(&r.variant, r.controller.label(), &r.outcome))
        .collect()
}

/// Aligned plain-text table.
pub fn format_summary(rows: &[SummaryRow]) -> String {
    let header = ["variant", "controller", "MAE (m)", "IAE (m)", "sup|S_q|", "status"];
    let cells: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.variant.clone(),
                r.controller.clone(),
                sci(r.mae),
                sci(r.iae),
                sci(r.sup_sq),
                r.status.clone(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |items: &[&str]| {
        let mut s = String::new();
        for (i, (item, w)) in items.iter().zip(widths).enumerate() {
            let pad = w.saturating_sub(item.chars().count());
            if i == items.len() - 1 {
                s.push_str(item);
            } else if (2..5).contains(&i) {
                s.push_str(&" ".repeat(pad));
                s.push_str(item);
                s.push_str("  ");
            } else {
                s.push_str(item);
                s.push_str(&" ".repeat(pad + 2));
            }
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&header);
    for row in &cells {
        let refs: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&refs);
    }
    out
}

fn sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3e}")
    } else {
        "-".into()
    }
}

pub fn format_summary_toml(name: &str, rows: &[SummaryRow]) -> String {
    toml::to_string(&SummaryFile { name, run: rows }).expect("summary serializes")
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_trace(path: &Path, trace: &SimTrace) -> io::Result<()> {
    let mut w = create(path)?;
    trace.write_csv(&mut w)?;
    w.flush()
}

fn write_text(path: &Path, text: &str) -> io::Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.flush()
}

/// Gnuplot script drawing reference and position, tracking error, and
/// pressure for each trace. Columns follow the trace header.
pub fn gnuplot_script(title: &str, png: &str, traces: &[(String, String)]) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set terminal pngcairo size 1000,900\n");
    s.push_str(&format!("set output '{png}'\n"));
    s.push_str(&format!("set multiplot layout 3,1 title '{}'\n", escape(title)));
    s.push_str("set xlabel 't (s)'\n");
    let plot = |expr: &str, with_ref: bool| {
        let mut parts = Vec::new();
        if let Some((_, file)) = traces.first().filter(|_| with_ref) {
            parts.push(format!("'{file}' using 1:2 with lines dt 2 title 'x_d'"));
        }
        for (label, file) in traces {
            parts.push(format!("'{file}' using 1:{expr} with lines title '{}'", escape(label)));
        }
        format!("plot {}\n", parts.join(", \\\n     "))
    };
    s.push_str("set ylabel 'x (m)'\n");
    s.push_str(&plot("3", true));
    s.push_str("set ylabel 'x_d - x (m)'\n");
    s.push_str(&plot("($2-$3)", false));
    s.push_str("set ylabel 'u (Pa)'\n");
    s.push_str(&plot("5", false));
    s.push_str("unset multiplot\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('\'', "''")
}

/// File-name-safe form of a variant label.
pub fn slug(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            'a'..='z' | '0'..='9' | '.' => out.push(c),
            'A'..='Z' => out.push(c.to_ascii_lowercase()),
            _ if !out.ends_with('_') => out.push('_'),
            _ => {}
        }
    }
    out.trim_matches('_').to_string()
}

/// Artifacts of a single run: `<name>.csv`, `<name>_summary.txt`,
/// `<name>_summary.toml` and `<name>.gp`. A failed run still writes its
/// partial trace.
pub fn write_run(
    dir: &Path,
    name: &str,
    controller: &str,
    outcome: &Result<RunOutcome, RunError>,
) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let trace = match outcome {
        Ok(o) => Some(&o.trace),
        Err(e) => e.partial.as_ref(),
    };
    let csv = format!("{name}.csv");
    if let Some(trace) = trace {
        let path = dir.join(&csv);
        write_trace(&path, trace)?;
        written.push(path);
    }
    let rows = [SummaryRow::new(name, controller, outcome)];
    written.extend(write_summaries(dir, name, &rows)?);
    if trace.is_some() {
        let path = dir.join(format!("{name}.gp"));
        write_text(
            &path,
            &gnuplot_script(name, &format!("{name}.png"), &[(controller.to_string(), csv)]),
        )?;
        written.push(path);
    }
    Ok(written)
}

fn write_summaries(dir: &Path, name: &str, rows: &[SummaryRow]) -> io::Result<Vec<PathBuf>> {
    let txt = dir.join(format!("{name}_summary.txt"));
    write_text(&txt, &format_summary(rows))?;
    let kv = dir.join(format!("{name}_summary.toml"));
    write_text(&kv, &format_summary_toml(name, rows))?;
    Ok(vec![txt, kv])
}

/// Per-member traces `<family>_<variant>.csv` plus the family summaries and
/// one gnuplot script overlaying every member.
pub fn write_family(dir: &Path, report: &FamilyReport) -> io::Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut plotted = Vec::new();
    for row in &report.rows {
        let trace = match &row.outcome {
            Ok(o) => Some(&o.trace),
            Err(e) => e.partial.as_ref(),
        };
        if let Some(trace) = trace {
            let file = format!("{}_{}.csv", report.name, slug(&row.variant));
            let path = dir.join(&file);
            write_trace(&path, trace)?;
            written.push(path);
            plotted.push((row.variant.clone(), file));
        }
    }
    written.extend(write_summaries(dir, &report.name, &summary_rows(report))?);
    let gp = dir.join(format!("{}.gp", report.name));
    write_text(
        &gp,
        &gnuplot_script(&report.name, &format!("{}.png", report.name), &plotted),
    )?;
    written.push(gp);
    Ok(written)
}

pub const HISTORY_HEADER: &str = "generation,best_h,mean_h,feasible_count";

pub fn write_history<W: Write>(mut w: W, history: &[GenerationRecord]) -> io::Result<()> {
    writeln!(w, "{HISTORY_HEADER}")?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{}",
            r.generation,
            fmt_g(r.best_h),
            fmt_g(r.mean_h),
            r.feasible_count
        )?;
    }
    Ok(())
}

pub fn write_history_file(path: &Path, history: &[GenerationRecord]) -> io::Result<()> {
    let mut w = create(path)?;
    write_history(&mut w, history)?;
    w.flush()
}

pub fn write_text_file(path: &Path, text: &str) -> io::Result<()> {
    write_text(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(variant: &str, iae: f64) -> SummaryRow {
        SummaryRow {
            variant: variant.into(),
            controller: "IDO-PSMC".into(),
            mae: 2.0 * iae,
            iae,
            sup_sq: 0.5,
            window: [2.0, 20.0],
            status: "ok".into(),
            feasible: Some(true),
        }
    }

    #[test]
    fn summary_columns_align() {
        let text = format_summary(&[row("m_p=0.5", 2.6e-3), row("m_p=15", 1.6e-4)]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let col = |l: &str| l.find("status").or_else(|| l.find("ok")).unwrap();
        assert_eq!(col(lines[0]), col(lines[1]));
        assert_eq!(col(lines[1]), col(lines[2]));
        assert!(lines[1].contains("2.600e-3"));
    }

    #[test]
    fn summary_toml_parses_back() {
        let text = format_summary_toml("mp-sweep", &[row("a", 1e-4)]);
        let v: toml::Table = toml::from_str(&text).unwrap();
        let run = v["run"].as_array().unwrap();
        assert_eq!(run[0]["iae"].as_float(), Some(1e-4));
        assert_eq!(v["name"].as_str(), Some("mp-sweep"));
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("m_p=0.5"), "m_p_0.5");
        assert_eq!(slug("IDO-PSMC"), "ido_psmc");
        assert_eq!(slug("load=2.5kg"), "load_2.5kg");
    }

    #[test]
    fn history_csv() {
        let h = [GenerationRecord {
            generation: 0,
            best_h: 0.25,
            mean_h: 1.5,
            feasible_count: 3,
        }];
        let mut buf = Vec::new();
        write_history(&mut buf, &h).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "generation,best_h,mean_h,feasible_count\n0,0.25,1.5,3\n"
        );
    }

    #[test]
    fn gnuplot_references_every_trace() {
        let s = gnuplot_script(
            "t",
            "t.png",
            &[("a".into(), "a.csv".into()), ("b".into(), "b.csv".into())],
        );
        assert_eq!(s.matches("'a.csv'").count(), 4);
        assert_eq!(s.matches("'b.csv'").count(), 3);
    }
}
