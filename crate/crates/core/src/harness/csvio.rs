use std::io::{Read, Write};

use crate::engine::{RunRecord, StepRecord};
use crate::error::{invalid, Error, Result};

fn format_tasks(tasks: &[usize]) -> String {
    tasks.iter().map(usize::to_string).collect::<Vec<_>>().join("+")
}

fn parse_tasks(s: &str) -> Result<Vec<usize>> {
    s.split('+')
        .map(|t| t.parse::<usize>().map_err(|e| Error::InvalidArgument(format!("bad task set '{s}': {e}"))))
        .collect()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::InvalidArgument(format!("bad number '{s}': {e}")))
}

/// Column names for a `dim`-dimensional problem.
pub fn csv_header(dim: usize) -> Vec<String> {
    let mut h = vec!["seed".to_string(), "step".to_string(), "task_set".to_string()];
    h.extend((1..=dim).map(|i| format!("x{i}")));
    h.push("spent".into());
    h.push("oc".into());
    h.extend((1..=dim).map(|i| format!("rec_x{i}")));
    h
}

/// Writes runs as one row per step. Floats use the shortest representation
/// that parses back to the same value.
pub fn write_runs<W: Write>(out: W, dim: usize, runs: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(dim))?;
    for run in runs {
        for s in &run.steps {
            if s.recommended.len() != dim || s.location.as_ref().is_some_and(|l| l.len() != dim) {
                return invalid("step record dimension does not match the header");
            }
            let mut row = vec![run.seed.to_string(), s.step.to_string(), format_tasks(&s.tasks)];
            match &s.location {
                Some(l) => row.extend(l.iter().map(f64::to_string)),
                None => row.extend(std::iter::repeat_n(String::new(), dim)),
            }
            row.push(s.spent.to_string());
            row.push(s.oc.to_string());
            row.extend(s.recommended.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Parses the output of [`write_runs`], grouping rows by seed in file order.
pub fn read_runs<R: Read>(input: R) -> Result<(usize, Vec<RunRecord>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() < 5 || (header.len() - 5) % 2 != 0 || &header[0] != "seed" {
        return invalid("not a run CSV");
    }
    let dim = (header.len() - 5) / 2;
    let mut runs: Vec<RunRecord> = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let seed: u64 = rec[0].parse().map_err(|e| Error::InvalidArgument(format!("bad seed: {e}")))?;
        let step: usize = rec[1].parse().map_err(|e| Error::InvalidArgument(format!("bad step: {e}")))?;
        let tasks = parse_tasks(&rec[2])?;
        let loc_fields: Vec<&str> = (0..dim).map(|i| &rec[3 + i]).collect();
        let location = if loc_fields.iter().all(|f| f.is_empty()) {
            None
        } else {
            Some(loc_fields.iter().map(|f| parse_f64(f)).collect::<Result<Vec<_>>>()?)
        };
        let spent = parse_f64(&rec[3 + dim])?;
        let oc = parse_f64(&rec[4 + dim])?;
        let recommended = (0..dim).map(|i| parse_f64(&rec[5 + dim + i])).collect::<Result<Vec<_>>>()?;
        let s = StepRecord { step, tasks, location, spent, oc, recommended };
        match runs.last_mut() {
            Some(run) if run.seed == seed => run.steps.push(s),
            _ => runs.push(RunRecord { seed, steps: vec![s] }),
        }
    }
    Ok((dim, runs))
}
