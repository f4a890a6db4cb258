use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::BenchRow;
use crate::error::{Error, Result};
use crate::solver::{SolverKind, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    /// One line per instance with `Iter Time Res` groups per solver.
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" | "aligned-table" => Ok(ReportFormat::Table),
            other => Err(Error::InvalidArgument(format!("unknown report format '{other}'"))),
        }
    }
}

pub const CSV_HEADER: [&str; 9] = ["m", "n", "solver", "iter", "time_s", "res", "seed", "status", "objective"];

fn status(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIter => "max_iter",
        Termination::SubproblemFailure => "subproblem_failure",
    }
}

fn parse_status(s: &str) -> Result<Termination> {
    match s {
        "converged" => Ok(Termination::Converged),
        "max_iter" => Ok(Termination::MaxIter),
        "subproblem_failure" => Ok(Termination::SubproblemFailure),
        other => Err(Error::Parse(format!("unknown status '{other}'"))),
    }
}

/// Six significant digits.
fn sig6(v: f64) -> String {
    format!("{v:.5e}")
}

pub fn emit_report(rows: &[BenchRow], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => emit_csv(rows),
        ReportFormat::Table => Ok(emit_table(rows)),
    }
}

fn emit_csv(rows: &[BenchRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            r.solver.name().to_string(),
            r.iterations.to_string(),
            sig6(r.wall_time),
            sig6(r.res),
            r.seed.to_string(),
            status(r.termination).to_string(),
            sig6(r.objective),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Reads rows written by the CSV report.
pub fn parse_csv(text: &str) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let header = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse(format!("unexpected CSV header: {:?}", header)));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number '{s}'")));
    let int = |s: &str| s.parse::<u64>().map_err(|_| Error::Parse(format!("bad integer '{s}'")));
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            Ok(BenchRow {
                m: int(&rec[0])? as usize,
                n: int(&rec[1])? as usize,
                solver: rec[2].parse()?,
                iterations: int(&rec[3])? as usize,
                wall_time: num(&rec[4])?,
                res: num(&rec[5])?,
                seed: int(&rec[6])?,
                termination: parse_status(&rec[7])?,
                objective: num(&rec[8])?,
            })
        })
        .collect()
}

fn emit_table(rows: &[BenchRow]) -> String {
    let mut solvers: Vec<SolverKind> = Vec::new();
    for r in rows {
        if !solvers.contains(&r.solver) {
            solvers.push(r.solver);
        }
    }
    // Instances in order of first appearance.
    let mut order: Vec<(usize, usize, u64)> = Vec::new();
    let mut cells: BTreeMap<(usize, usize, u64, usize), &BenchRow> = BTreeMap::new();
    for r in rows {
        let key = (r.m, r.n, r.seed);
        if !order.contains(&key) {
            order.push(key);
        }
        let s = solvers.iter().position(|&k| k == r.solver).unwrap();
        cells.insert((r.m, r.n, r.seed, s), r);
    }

    const GROUP: usize = 30;
    let mut out = String::new();
    let _ = write!(out, "{:>6} {:>6} {:>5} ", "m", "n", "seed");
    for s in &solvers {
        let _ = write!(out, "| {:^w$} ", s.name(), w = GROUP - 3);
    }
    out.push('\n');
    let _ = write!(out, "{:>6} {:>6} {:>5} ", "", "", "");
    for _ in &solvers {
        let _ = write!(out, "| {:>6} {:>8} {:>10} ", "Iter", "Time", "Res");
    }
    out.push('\n');
    for (m, n, seed) in order {
        let _ = write!(out, "{m:>6} {n:>6} {seed:>5} ");
        for s in 0..solvers.len() {
            match cells.get(&(m, n, seed, s)) {
                Some(r) => {
                    let flag = if r.converged() { ' ' } else { '*' };
                    let _ = write!(out, "| {:>6} {:>8.2} {:>9.2e}{flag} ", r.iterations, r.wall_time, r.res);
                }
                None => {
                    let _ = write!(out, "| {:>6} {:>8} {:>10} ", "-", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    if rows.iter().any(|r| !r.converged()) {
        out.push_str("* run did not converge\n");
    }
    out
}
