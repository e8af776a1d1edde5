//! Table and summary output.

use std::io::Write;
use std::path::Path;

use crate::experiment::RunRecord;

/// Two significant digits, as in `3.1E-13`.
pub fn sci2(x: f64) -> String {
    format!("{x:.1E}")
}

/// Shortest representation that parses back to `x` exactly.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Wall time of each run divided by the fastest successful one.
pub fn normalized_cpu(records: &[RunRecord]) -> Vec<Option<f64>> {
    let fastest = records
        .iter()
        .filter(|r| r.outcome.is_ok())
        .map(|r| r.wall_seconds)
        .fold(f64::INFINITY, f64::min);
    records
        .iter()
        .map(|r| match r.outcome {
            Ok(_) if fastest > 0.0 && fastest.is_finite() => Some(r.wall_seconds / fastest),
            Ok(_) => Some(1.0),
            Err(_) => None,
        })
        .collect()
}

const HEADER: [&str; 9] = [
    "problem",
    "run",
    "mode",
    "err",
    "reimb",
    "rejs/first",
    "cpu",
    "secs",
    "nsteps",
];

pub fn write_table(out: &mut impl Write, records: &[RunRecord]) -> std::io::Result<()> {
    let cpu = normalized_cpu(records);
    let mut rows = vec![HEADER.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for (r, cpu) in records.iter().zip(&cpu) {
        let mut row = vec![r.problem.clone(), r.tag.clone(), r.mode.clone()];
        match &r.outcome {
            Ok(s) => {
                row.push(s.err.map_or("n/a".into(), sci2));
                row.push(s.reimbeddings.to_string());
                row.push(format!("{}/{}", s.rejections, s.first_column_rejections()));
                row.push(format!("{:.2}", cpu.unwrap_or(f64::NAN)));
                row.push(format!("{:.3}", r.wall_seconds));
                row.push(s.steps.to_string());
            }
            Err(_) => row.extend(std::iter::repeat_n("-".to_string(), 6)),
        }
        rows.push(row);
    }
    let widths: Vec<usize> = (0..HEADER.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        writeln!(out, "{}", line.join("  ").trim_end())?;
    }
    Ok(())
}

pub fn write_failures(out: &mut impl Write, records: &[RunRecord]) -> std::io::Result<()> {
    for r in records {
        if let Err(f) = &r.outcome {
            writeln!(
                out,
                "{} {} failed at {}: {}",
                r.problem,
                r.tag,
                f.location(),
                f.message
            )?;
        }
    }
    Ok(())
}

/// Machine-readable summary, one row per run, numbers at full precision.
pub fn write_summary(path: &Path, records: &[RunRecord]) -> anyhow::Result<()> {
    let cpu = normalized_cpu(records);
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "problem",
        "run",
        "mode",
        "status",
        "err",
        "reimb",
        "reimb_columns",
        "rejs",
        "first",
        "nsteps",
        "wall_seconds",
        "cpu",
        "fail_t",
        "fail_column",
        "message",
    ])?;
    for (r, cpu) in records.iter().zip(&cpu) {
        let opt = |x: Option<f64>| x.map_or(String::new(), num);
        let mut rec = vec![r.problem.clone(), r.tag.clone(), r.mode.clone()];
        match &r.outcome {
            Ok(s) => rec.extend([
                "ok".to_string(),
                opt(s.err),
                s.reimbeddings.to_string(),
                s.reimbedded_columns.to_string(),
                s.rejections.to_string(),
                s.first_column_rejections().to_string(),
                s.steps.to_string(),
                num(r.wall_seconds),
                opt(*cpu),
                String::new(),
                String::new(),
                String::new(),
            ]),
            Err(f) => {
                rec.push("failed".into());
                rec.extend(std::iter::repeat_n(String::new(), 6));
                rec.push(num(r.wall_seconds));
                rec.push(String::new());
                rec.push(opt(f.t));
                rec.push(f.column.map_or(String::new(), |c| c.to_string()));
                rec.push(f.message.clone());
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
