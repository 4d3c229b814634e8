//! Run reports and the CSV summary schema.

use std::io::Write;

use serde::Serialize;

use crate::engine::RoundBudget;
use crate::error::Result;
use crate::placement::Cost;

pub const CSV_HEADER: &str =
    "instance,algorithm,workers,seed,budget_type,budget,rounds_executed,best_cost,final_cost,elapsed_ms";

/// Best cost observed at a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Checkpoint {
    pub rounds: u64,
    pub elapsed_ms: u64,
    pub best_cost: Cost,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub instance: String,
    pub algorithm: String,
    pub workers: usize,
    pub seed: u64,
    pub budget: RoundBudget,
    pub rounds_executed: u64,
    pub best_cost: Cost,
    pub final_cost: Cost,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Checkpoint>>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    instance: &'a str,
    algorithm: &'a str,
    workers: usize,
    seed: u64,
    budget_type: &'a str,
    budget: String,
    rounds_executed: u64,
    best_cost: Cost,
    final_cost: Cost,
    /// Left empty for round budgets so those rows stay byte-reproducible.
    elapsed_ms: Option<u64>,
}

impl RunReport {
    fn csv_row(&self) -> CsvRow<'_> {
        let (budget, elapsed_ms) = match self.budget {
            RoundBudget::OuterRounds(n) => (n.to_string(), None),
            RoundBudget::WallClockSeconds(s) => (s.to_string(), Some(self.elapsed_ms)),
        };
        CsvRow {
            instance: &self.instance,
            algorithm: &self.algorithm,
            workers: self.workers,
            seed: self.seed,
            budget_type: self.budget.kind(),
            budget,
            rounds_executed: self.rounds_executed,
            best_cost: self.best_cost,
            final_cost: self.final_cost,
            elapsed_ms,
        }
    }
}

/// Writes the header row followed by one row per report.
pub fn write_csv<W: Write>(out: W, reports: &[RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r.csv_row())?;
    }
    if reports.is_empty() {
        w.write_record(CSV_HEADER.split(','))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn csv_string(reports: &[RunReport]) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, reports)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(budget: RoundBudget) -> RunReport {
        RunReport {
            instance: "a".into(),
            algorithm: "alg2".into(),
            workers: 8,
            seed: 7,
            budget,
            rounds_executed: 100,
            best_cost: 40,
            final_cost: 42,
            elapsed_ms: 12,
            trajectory: None,
        }
    }

    #[test]
    fn header_and_rows() {
        let s = csv_string(&[report(RoundBudget::OuterRounds(100))]).unwrap();
        assert_eq!(
            s,
            format!("{CSV_HEADER}\na,alg2,8,7,rounds,100,100,40,42,\n")
        );
        let s = csv_string(&[report(RoundBudget::WallClockSeconds(1.5))]).unwrap();
        assert!(s.ends_with("a,alg2,8,7,seconds,1.5,100,40,42,12\n"), "{s}");
        assert_eq!(csv_string(&[]).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
