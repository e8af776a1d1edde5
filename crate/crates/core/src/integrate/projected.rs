//! Baseline: Runge–Kutta on the full `Q` equation, then modified Gram–Schmidt.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::flows::rhs_qrflow;
use crate::integrate::step::scaled_error;
use crate::integrate::{
    fixed_step_count, step_factor, AcceptedStep, ButcherPair, IntegrationConfig,
    LyapunovAccumulator, Observer, RunStats, Solution, StepMode, StepView,
};
use crate::linalg::{mgs_orthonormalize, Matrix};
use crate::problems::{q_error, ProblemSpec};

fn diag_qaq(q: &Matrix, a: &Matrix) -> Vec<f64> {
    (0..q.cols())
        .map(|j| {
            let col = q.column(j);
            crate::linalg::dot(&col, &a.matvec(&col))
        })
        .collect()
}

fn as_matrix(rows: usize, cols: usize, data: &[f64]) -> Matrix {
    Matrix::from_fn(rows, cols, |i, j| data[i * cols + j])
}

/// Projected baseline. The error test treats all of `Q` as one block, so
/// rejection counters have a single entry.
pub fn integrate_projected(
    problem: &ProblemSpec,
    config: &IntegrationConfig,
    observer: &mut dyn Observer,
) -> Result<Solution> {
    config.validate(problem)?;
    let start = Instant::now();
    let (t0, tf) = config.interval(problem);
    let (n, p) = (problem.n, problem.p);
    let pair = ButcherPair::new(config.pair);
    let exponent = pair.controller_exponent();
    let mut q = mgs_orthonormalize(&problem.x0).map_err(|e| e.at(t0))?;
    let mut stats = RunStats::new(1, problem.seed);
    let mut lyap = LyapunovAccumulator::new(t0, p);
    let mut diag = diag_qaq(&q, &problem.a(t0));
    let (fixed, tol) = match config.mode {
        StepMode::Fixed { h } => (Some(fixed_step_count(t0, tf, h)), None),
        StepMode::Adaptive { tol } => (None, Some(tol)),
    };
    let mut h = match config.mode {
        StepMode::Fixed { h } => h,
        StepMode::Adaptive { tol } => tol.powf(exponent).min(0.5 * (tf - t0)),
    };
    let h_min = config.h_min(t0, tf);
    let mut t = t0;
    let mut k = 0usize;
    while t < tf {
        let (h_try, t_next) = match fixed {
            Some(nsteps) => {
                let t_next = if k + 1 >= nsteps {
                    tf
                } else {
                    t0 + (k + 1) as f64 * h
                };
                (t_next - t, t_next)
            }
            None if t + h >= tf || tf - (t + h) < 1e-12 * (tf - t0) => (tf - t, tf),
            None => (h, t + h),
        };
        let a: Vec<Matrix> = pair.c.iter().map(|c| problem.a(t + c * h_try)).collect();
        let run: Result<_> = pair.run(q.as_slice(), h_try, |s, y| {
            stats.rhs_evals_by_column[0] += 1;
            let k = rhs_qrflow(&as_matrix(n, p, y), &a[s]);
            if k.is_finite() {
                Ok(k.as_slice().to_vec())
            } else {
                Err(Error::NonFinite { column: 0 })
            }
        });
        let run = match run {
            Ok(r) if r.y1.iter().all(|x| x.is_finite()) => r,
            Ok(_) | Err(_) => {
                if fixed.is_some() {
                    return Err(Error::NonFinite { column: 0 }.at(t));
                }
                stats.reject(0);
                observer.rejected(t, h_try, 0);
                h = 0.5 * h_try;
                if h < h_min {
                    return Err(Error::StepsizeUnderflow { t, h, column: 0 });
                }
                continue;
            }
        };
        let err = match tol {
            Some(tol) => scaled_error(&run.delta, q.as_slice(), &run.y1, tol),
            None => run.delta.iter().fold(0.0, |m: f64, d| m.max(d.abs())),
        };
        if tol.is_some() && err > 1.0 {
            stats.reject(0);
            observer.rejected(t, h_try, 0);
            h = h_try * step_factor(err, exponent, false, config);
            if h < h_min {
                return Err(Error::StepsizeUnderflow { t, h, column: 0 });
            }
            continue;
        }
        q = mgs_orthonormalize(&as_matrix(n, p, &run.y1)).map_err(|e| e.at(t_next))?;
        let stages: Vec<Matrix> = run.values.iter().map(|y| as_matrix(n, p, y)).collect();
        let stage_diag: Vec<Vec<f64>> =
            stages.iter().zip(&a).map(|(y, a)| diag_qaq(y, a)).collect();
        diag = diag_qaq(&q, &a[pair.stages() - 1]);
        lyap.add(h_try, &pair.b, &stage_diag);
        t = t_next;
        k += 1;
        stats.steps += 1;
        observer.accepted(&AcceptedStep {
            t,
            h: h_try,
            diag: &diag,
            stage_diag: &stage_diag,
            c: &pair.c,
            b: &pair.b,
            column_errors: std::slice::from_ref(&err),
            view: StepView::Dense {
                q: &q,
                stages: &stages,
            },
        });
        if tol.is_some() {
            h = h_try * step_factor(err, exponent, true, config);
        }
    }
    stats.err = problem.exact(tf).map(|qe| q_error(&q, &qe)).transpose()?;
    stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(Solution {
        t,
        frames: None,
        q,
        diag,
        lyapunov: lyap.exponents(),
        stats,
    })
}
