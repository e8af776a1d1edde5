//! One attempted step of the factored integrator, column by column.

use crate::error::Error;
use crate::flows::{column_rhs, column_update, Chart};
use crate::frames::Frames;
use crate::integrate::butcher::ButcherPair;
use crate::linalg::Matrix;
use crate::problems::ProblemSpec;

/// Data of a step that passed the error test for every column.
#[derive(Debug, Clone)]
pub struct StepData {
    /// New coordinates per column, before post-step normalization.
    pub states: Vec<Vec<f64>>,
    /// `stage_states[s][i]`: value of column `i` at stage `s`.
    pub stage_states: Vec<Vec<Vec<f64>>>,
    /// `stage_diag[s][i]`: diagonal entry `i` of `Ã` at stage `s`.
    pub stage_diag: Vec<Vec<f64>>,
    /// Per-column error estimate: scaled by the tolerance in adaptive mode,
    /// raw `‖Δ‖∞` otherwise.
    pub errors: Vec<f64>,
}

/// Result of [`attempt_step`].
#[derive(Debug, Clone)]
pub enum Attempt {
    Accepted(StepData),
    /// Column `column` failed the error test with scaled error `err`; later
    /// columns were not touched.
    Rejected {
        column: usize,
        err: f64,
    },
    /// A stage could not be evaluated (division hazard or overflow).
    Aborted {
        column: usize,
        error: Error,
    },
}

/// Mixed absolute/relative error `max_k |Δ_k| / (tol (1 + max(|y0_k|, |y1_k|)))`.
pub fn scaled_error(delta: &[f64], y0: &[f64], y1: &[f64], tol: f64) -> f64 {
    let mut e: f64 = 0.0;
    for k in 0..delta.len() {
        let sc = tol * (1.0 + y0[k].abs().max(y1[k].abs()));
        e = e.max(delta[k].abs() / sc);
    }
    if delta.iter().any(|d| !d.is_finite()) {
        f64::INFINITY
    } else {
        e
    }
}

/// Attempts the step `[t, t + h]` from `frames`.
///
/// Columns are advanced in order; each stage of column `i` is driven by the
/// block obtained from `A(t + c_s h)` by the updates of columns `0..i` at the
/// same stage. With `tol = Some(_)` the step is rejected at the first column
/// whose scaled error exceeds one. `evals[i]` counts right-hand side
/// evaluations of column `i`.
pub fn attempt_step(
    frames: &Frames,
    problem: &ProblemSpec,
    t: f64,
    h: f64,
    pair: &ButcherPair,
    tol: Option<f64>,
    evals: &mut [u64],
) -> Attempt {
    let p = frames.p();
    let s = pair.stages();
    let mut blocks: Vec<Matrix> = pair.c.iter().map(|c| problem.a(t + c * h)).collect();
    let mut states = Vec::with_capacity(p);
    let mut stage_states: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(p); s];
    let mut stage_diag: Vec<Vec<f64>> = vec![Vec::with_capacity(p); s];
    let mut errors = Vec::with_capacity(p);
    for i in 0..p {
        let chart = Chart::of(frames, i);
        let y0 = frames.state(i);
        let run = pair.run(y0, h, |st, y| {
            evals[i] += 1;
            let k = column_rhs(chart, y, &blocks[st])?;
            if k.iter().all(|x| x.is_finite()) {
                Ok(k)
            } else {
                Err(Error::NonFinite { column: i })
            }
        });
        let run = match run {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Aborted {
                    column: i,
                    error: e.in_column(i),
                }
            }
        };
        if run.y1.iter().any(|x| !x.is_finite()) {
            return Attempt::Aborted {
                column: i,
                error: Error::NonFinite { column: i },
            };
        }
        let err = match tol {
            Some(tol) => scaled_error(&run.delta, y0, &run.y1, tol),
            None => run.delta.iter().fold(0.0, |m: f64, d| m.max(d.abs())),
        };
        if tol.is_some() && err > 1.0 {
            return Attempt::Rejected { column: i, err };
        }
        for st in 0..s {
            let up = match column_update(chart, &run.values[st], &run.rates[st], &blocks[st]) {
                Ok(b) => b,
                Err(e) => {
                    return Attempt::Aborted {
                        column: i,
                        error: e.in_column(i),
                    }
                }
            };
            stage_diag[st].push(up[(0, 0)]);
            blocks[st] = up.trailing();
        }
        for (st, v) in run.values.into_iter().enumerate() {
            stage_states[st].push(v);
        }
        states.push(run.y1);
        errors.push(err);
    }
    Attempt::Accepted(StepData {
        states,
        stage_states,
        stage_diag,
        errors,
    })
}
