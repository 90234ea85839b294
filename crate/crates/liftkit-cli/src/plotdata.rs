//! Deterministic CSV emission: `#`-prefixed schema line, column header,
//! rows with 17 significant digits, optional `#` footer.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use liftkit::constructions::ScalingRow;
use liftkit::lifting::{EpsilonStudy, RateReport, SweepRow};

pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct Table {
    kind: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
    footer: Vec<String>,
}

impl Table {
    pub fn new(kind: &'static str, columns: &'static [&'static str]) -> Self {
        Self { kind, columns, rows: Vec::new(), footer: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn footer(&mut self, line: String) {
        self.footer.push(line);
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# liftkit {} v{SCHEMA_VERSION}", self.kind);
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        for f in &self.footer {
            let _ = writeln!(s, "# {f}");
        }
        s
    }

    pub fn write(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, self.render())
    }
}

pub fn gamma_sweep(rows: &[SweepRow]) -> Table {
    let mut t = Table::new("gamma_sweep", &["gamma", "nu_lower", "nu_emp", "c_emp", "spectral_gap"]);
    for r in rows {
        t.row(vec![num(r.gamma), num(r.nu_lower), num(r.nu_emp), num(r.c_emp), num(r.spectral_gap)]);
    }
    t
}

pub fn eps_error(study: &EpsilonStudy) -> Table {
    let mut t = Table::new("eps_error", &["eps", "error"]);
    for &(e, err) in &study.rows {
        t.row(vec![num(e), num(err)]);
    }
    t.footer(match study.slope {
        Some(s) => format!("slope={}", num(s)),
        None => "slope=none".into(),
    });
    t
}

pub fn scaling(rows: &[ScalingRow]) -> Table {
    let mut t = Table::new("scaling", &["n", "lambda_q", "nu_emp", "ratio", "gamma_best", "gamma_max"]);
    for r in rows {
        t.row(vec![r.n.to_string(), num(r.lambda_q), num(r.nu_emp), num(r.ratio), num(r.gamma_best), num(r.gamma_max)]);
    }
    t
}

/// Writes the γ sweep of a rate report as `gamma_sweep.csv` under `dir`.
pub fn emit_plotdata(report: &RateReport, dir: &Path) -> io::Result<()> {
    gamma_sweep(&report.rows).write(&dir.join("gamma_sweep.csv"))
}
