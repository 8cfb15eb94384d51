use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::check::{Outcome, Verdict};
use super::rubric::ItemSide;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SyntaxFlags {
    /// A human reviewer spotted a syntax problem.
    pub hde: bool,
    /// No plan was found for the high-level task.
    pub fd: bool,
    /// The high-level output did not parse or check.
    pub val: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunScore {
    pub cn: f64,
    pub auc: f64,
    pub syntax_flags: SyntaxFlags,
}

fn pass_fraction(verdicts: &[Verdict], side: ItemSide) -> f64 {
    let (mut pass, mut total) = (0usize, 0usize);
    for v in verdicts.iter().filter(|v| v.side == side) {
        total += 1;
        // NeedsHuman counts as a failure until someone resolves it.
        if v.outcome == Outcome::Pass {
            pass += 1;
        }
    }
    if total == 0 {
        0.0
    } else {
        pass as f64 / total as f64
    }
}

pub fn score(verdicts: &[Verdict], parse_ok: bool, plan_found: bool, human_syntax_flag: bool) -> RunScore {
    RunScore {
        cn: pass_fraction(verdicts, ItemSide::Change),
        auc: pass_fraction(verdicts, ItemSide::Retain),
        syntax_flags: SyntaxFlags {
            hde: human_syntax_flag,
            fd: !plan_found,
            val: !parse_ok,
        },
    }
}

/// Averages and spreads over repeated runs of one benchmark, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub runs: usize,
    pub cn_avg: f64,
    pub cn_sd: f64,
    pub auc_avg: f64,
    pub auc_sd: f64,
    pub hde_count: usize,
    pub fd_count: usize,
    pub val_count: usize,
}

/// Mean and population standard deviation.
fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.iter().all(|&x| x == xs[0]) {
        return (xs[0], 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// `None` for an empty slice.
pub fn aggregate(runs: &[RunScore]) -> Option<Aggregate> {
    if runs.is_empty() {
        return None;
    }
    let cn: Vec<f64> = runs.iter().map(|r| r.cn * 100.0).collect();
    let auc: Vec<f64> = runs.iter().map(|r| r.auc * 100.0).collect();
    let (cn_avg, cn_sd) = mean_sd(&cn);
    let (auc_avg, auc_sd) = mean_sd(&auc);
    let count = |f: fn(&SyntaxFlags) -> bool| runs.iter().filter(|r| f(&r.syntax_flags)).count();
    Some(Aggregate {
        runs: runs.len(),
        cn_avg,
        cn_sd,
        auc_avg,
        auc_sd,
        hde_count: count(|f| f.hde),
        fd_count: count(|f| f.fd),
        val_count: count(|f| f.val),
    })
}

pub const COLUMNS: [&str; 8] = ["benchmark", "CN", "CN-SD", "AUC", "AUC-SD", "HDE", "FD", "VAL"];

fn cells(a: &Aggregate) -> [String; 7] {
    [
        format!("{:.2}", a.cn_avg),
        format!("{:.2}", a.cn_sd),
        format!("{:.2}", a.auc_avg),
        format!("{:.2}", a.auc_sd),
        a.hde_count.to_string(),
        a.fd_count.to_string(),
        a.val_count.to_string(),
    ]
}

/// Fixed-width table: benchmark left-aligned, numbers right-aligned.
pub fn render_table(rows: &[(String, Aggregate)]) -> String {
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|(b, a)| std::iter::once(b.clone()).chain(cells(a)).collect())
        .collect();
    let widths: Vec<usize> = (0..COLUMNS.len())
        .map(|c| body.iter().map(|r| r[c].len()).chain([COLUMNS[c].len()]).max().unwrap())
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, row: &[&str]| {
        let mut s = format!("{:<w$}", row[0], w = widths[0]);
        for (c, cell) in row.iter().enumerate().skip(1) {
            let _ = write!(s, "  {:>w$}", cell, w = widths[c]);
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut out, &COLUMNS);
    for r in &body {
        let r: Vec<&str> = r.iter().map(String::as_str).collect();
        line(&mut out, &r);
    }
    out
}

pub fn render_csv(rows: &[(String, Aggregate)]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(COLUMNS).expect("in-memory write");
    for (b, a) in rows {
        let c = cells(a);
        w.write_record(std::iter::once(b.as_str()).chain(c.iter().map(String::as_str)))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 input")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub table: String,
    pub csv: String,
}

pub fn render_report(rows: &[(String, Aggregate)]) -> Report {
    Report { table: render_table(rows), csv: render_csv(rows) }
}
