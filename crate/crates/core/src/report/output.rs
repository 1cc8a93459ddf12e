use std::fs;
use std::path::Path;

use serde::Serialize;

use super::SocReport;
use crate::error::{Error, Result};
use crate::fnspace::{write_binary, write_csv};
use crate::pde::StateTriple;
use crate::solver::{ProblemConfig, SolveResult};

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// JSON report plus CSV tables (`critical_samples.csv`, `growth.csv`, `quotients.csv`, `counterexample.csv`).
pub fn write_report(report: &SocReport, json: Option<&Path>, csv_dir: Option<&Path>) -> Result<()> {
    if let Some(path) = json {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            ensure_dir(dir)?;
        }
        fs::write(path, report.to_json()? + "\n").map_err(|e| Error::io(path, e))?;
    }
    if let Some(dir) = csv_dir {
        ensure_dir(dir)?;
        write_rows(&dir.join("critical_samples.csv"), &report.critical_samples)?;
        write_rows(&dir.join("growth.csv"), &report.growth_samples)?;
        write_rows(&dir.join("quotients.csv"), &report.quotient_curves)?;
        if let Some(ce) = &report.counterexample {
            write_rows(&dir.join("counterexample.csv"), &ce.rows)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct HistoryRow {
    iteration: usize,
    objective: f64,
}

#[derive(Serialize)]
struct SolutionSummary {
    iterations: usize,
    kkt_residual: f64,
    objective: f64,
}

/// Control (CSV and binary), subgradient, state, adjoint, objective history and a JSON summary.
pub fn write_solution(problem: &ProblemConfig, sol: &SolveResult, dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    write_csv(&sol.u, &dir.join("control.csv"))?;
    write_binary(&sol.u, &dir.join("control.bin"))?;
    write_csv(&sol.lambda, &dir.join("subgradient.csv"))?;
    let st = StateTriple::new(&problem.pde, &sol.u)?;
    write_csv(&st.y, &dir.join("state.csv"))?;
    write_csv(&st.phi, &dir.join("adjoint.csv"))?;
    let hist: Vec<HistoryRow> =
        sol.history.iter().enumerate().map(|(iteration, &objective)| HistoryRow { iteration, objective }).collect();
    write_rows(&dir.join("history.csv"), &hist)?;
    let summary = SolutionSummary {
        iterations: sol.iterations,
        kkt_residual: sol.kkt_residual,
        objective: problem.objective(&sol.u)?,
    };
    let path = dir.join("summary.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n").map_err(|e| Error::io(&path, e))
}
