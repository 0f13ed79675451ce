use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use persistency::persistency::{analyze, PersistencyReport, Sections};
use persistency::reference::{self, TableRow};
use persistency::states::StateSpec;

use crate::{emit, Format, TableArgs};

const FAMILIES: &[&str] = &["w", "dicke", "ti", "linear", "ring", "grid", "ghz"];
/// Families with a parameter-free spec, used when the table has no row.
const PLAIN: &[&str] = &["w", "linear", "ring", "ghz"];
const DEFAULT_N: (usize, usize) = (3, 7);

#[derive(Debug, Clone, Serialize)]
struct Row {
    state: String,
    n: usize,
    pe_lo: Option<usize>,
    pe_hi: Option<usize>,
    pnl: usize,
    w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paper: Option<Paper>,
}

#[derive(Debug, Clone, Serialize)]
struct Paper {
    paper_pe: usize,
    paper_pnl: usize,
    paper_w: f64,
    delta_pe_lo: Option<i64>,
    delta_pe_hi: Option<i64>,
    delta_pnl: i64,
    delta_w: Option<f64>,
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let t = text.trim();
    let (a, b) = match t.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (t, t),
    };
    let a = a.trim().parse().with_context(|| format!("range start in {text:?}"))?;
    let b = b.trim().parse().with_context(|| format!("range end in {text:?}"))?;
    Ok((a, b))
}

fn family_of(spec: &str) -> &str {
    spec.split(':').next().unwrap_or(spec)
}

/// States selected by the family and size filters, in table order.
fn select(families: Option<&[String]>, n: Option<&str>) -> Result<Vec<(StateSpec, Option<&'static TableRow>)>> {
    if families.is_none() && n.is_none() {
        return reference::TABLE.iter().map(|r| Ok((r.spec.parse()?, Some(r)))).collect();
    }
    let fams: Vec<String> = match families {
        Some(f) => f.iter().map(|s| s.trim().to_ascii_lowercase()).collect(),
        None => FAMILIES.iter().map(|s| s.to_string()).collect(),
    };
    for f in &fams {
        if !FAMILIES.contains(&f.as_str()) {
            bail!("unknown family {f:?}; expected one of {}", FAMILIES.join(", "));
        }
    }
    let (lo, hi) = n.map(parse_range).transpose()?.unwrap_or(DEFAULT_N);
    let mut out = Vec::new();
    for size in lo..=hi {
        for f in &fams {
            let rows: Vec<_> = reference::TABLE.iter().filter(|r| r.n == size && family_of(r.spec) == f).collect();
            if !rows.is_empty() {
                for r in rows {
                    out.push((r.spec.parse()?, Some(r)));
                }
            } else if PLAIN.contains(&f.as_str()) && size >= 3 {
                out.push((format!("{f}:{size}").parse()?, None));
            }
        }
    }
    Ok(out)
}

fn row(report: &PersistencyReport, label: String, reference: Option<&TableRow>, compare: bool) -> Row {
    let pe_lo = report.pe.as_ref().map(|p| p.lo);
    let pe_hi = report.pe.as_ref().map(|p| p.hi);
    let w = report.strength.as_ref().and_then(|s| s.w);
    let paper = reference.filter(|_| compare).map(|r| Paper {
        paper_pe: r.pe,
        paper_pnl: r.pnl,
        paper_w: r.w,
        delta_pe_lo: pe_lo.map(|v| v as i64 - r.pe as i64),
        delta_pe_hi: pe_hi.map(|v| v as i64 - r.pe as i64),
        delta_pnl: report.pnl.lb as i64 - r.pnl as i64,
        delta_w: w.map(|v| v - r.w),
    });
    Row { state: label, n: report.n, pe_lo, pe_hi, pnl: report.pnl.lb, w, paper }
}

fn to_csv(rows: &[Row], compare: bool) -> Result<String> {
    let mut out = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["state", "n", "pe_lo", "pe_hi", "pnl", "w"];
    if compare {
        header.extend(["paper_pe", "paper_pnl", "paper_w", "delta_pe_lo", "delta_pe_hi", "delta_pnl", "delta_w"]);
    }
    out.write_record(&header)?;
    let s = |v: Option<String>| v.unwrap_or_default();
    for r in rows {
        let mut rec = vec![
            r.state.clone(),
            r.n.to_string(),
            s(r.pe_lo.map(|v| v.to_string())),
            s(r.pe_hi.map(|v| v.to_string())),
            r.pnl.to_string(),
            s(r.w.map(|v| format!("{v:.3}"))),
        ];
        if compare {
            match &r.paper {
                Some(p) => rec.extend([
                    p.paper_pe.to_string(),
                    p.paper_pnl.to_string(),
                    format!("{:.3}", p.paper_w),
                    s(p.delta_pe_lo.map(|v| v.to_string())),
                    s(p.delta_pe_hi.map(|v| v.to_string())),
                    p.delta_pnl.to_string(),
                    s(p.delta_w.map(|v| format!("{v:+.3}"))),
                ]),
                None => rec.extend(std::iter::repeat_n(String::new(), 7)),
            }
        }
        out.write_record(&rec)?;
    }
    Ok(String::from_utf8(out.into_inner()?)?)
}

pub fn cmd_table(t: TableArgs) -> Result<ExitCode> {
    t.budget.init_threads()?;
    let budget = t.budget.budget()?;
    let selected = select(t.families.as_deref(), t.n.as_deref())?;
    let sections = Sections { entanglement: true, hidden: false, strength: true, k_remove: None };
    let reports: Vec<PersistencyReport> = selected
        .par_iter()
        .map(|(spec, _)| analyze(spec, &budget, t.seed, &sections).with_context(|| format!("analyzing {spec}")))
        .collect::<Result<_>>()?;
    let rows: Vec<Row> = selected
        .iter()
        .zip(&reports)
        .map(|((spec, r), rep)| {
            let label = r.map_or_else(|| spec.to_string(), |r| r.label.to_string());
            row(rep, label, *r, t.compare)
        })
        .collect();
    let text = match t.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        _ => to_csv(&rows, t.compare)?,
    };
    emit(t.out.as_deref(), &text)?;
    Ok(if reports.iter().any(|r| r.pe_open()) { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(f: Option<&[String]>, n: Option<&str>) -> Vec<String> {
        select(f, n).unwrap().iter().map(|(s, _)| s.to_string()).collect()
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..5").unwrap(), (3, 5));
        assert_eq!(parse_range("3..=5").unwrap(), (3, 5));
        assert_eq!(parse_range("6").unwrap(), (6, 6));
        assert!(parse_range("a..5").is_err());
    }

    #[test]
    fn selection() {
        let w = vec!["w".to_string()];
        assert_eq!(labels(Some(&w), Some("3..5")), ["w:3", "w:4", "w:5"]);
        assert!(labels(Some(&w), Some("5..4")).is_empty());
        let l = vec!["linear".to_string()];
        assert_eq!(labels(Some(&l), Some("4..7")), ["linear:4", "linear:5", "linear:6", "linear:7"]);
        assert_eq!(labels(None, None).len(), reference::TABLE.len());
        let g = vec!["ghz".to_string()];
        assert_eq!(labels(Some(&g), Some("3")), ["ghz:3"]);
        assert!(select(Some(&["foo".to_string()]), None).is_err());
    }

    #[test]
    fn header_only_csv() {
        assert_eq!(to_csv(&[], false).unwrap(), "state,n,pe_lo,pe_hi,pnl,w\n");
    }
}
