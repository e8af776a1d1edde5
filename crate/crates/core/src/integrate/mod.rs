//! Fixed-step and adaptive drivers, the projected baseline and Lyapunov
//! quadrature.

mod butcher;
mod projected;
mod step;

use std::fmt;
use std::time::Instant;

pub use butcher::{ButcherPair, PairKind, StageRun};
pub use projected::integrate_projected;
pub use step::{attempt_step, scaled_error, Attempt, StepData};

use crate::error::{Error, Result};
use crate::frames::{Coordinates, Frames};
use crate::linalg::{Matrix, Variant};
use crate::problems::{q_error, ProblemSpec};

/// Integration method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    U,
    V,
    W,
    Theta,
    /// Runge–Kutta on the full `Q` equation followed by modified Gram–Schmidt.
    Projected,
}

impl Method {
    pub fn coordinates(self) -> Option<Coordinates> {
        match self {
            Method::U => Some(Coordinates::Householder(Variant::U)),
            Method::V => Some(Coordinates::Householder(Variant::V)),
            Method::W => Some(Coordinates::Householder(Variant::W)),
            Method::Theta => Some(Coordinates::Givens),
            Method::Projected => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::U => "u",
            Method::V => "v",
            Method::W => "w",
            Method::Theta => "theta",
            Method::Projected => "projected",
        }
    }

    pub const ALL: [Method; 5] = [
        Method::U,
        Method::V,
        Method::W,
        Method::Theta,
        Method::Projected,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    Fixed { h: f64 },
    Adaptive { tol: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub method: Method,
    pub pair: PairKind,
    pub mode: StepMode,
    /// Overrides of the problem's interval.
    pub t0: Option<f64>,
    pub tf: Option<f64>,
    pub safety: f64,
    pub growth: f64,
    pub shrink: f64,
    /// Smallest admissible step; defaults to `1e-14 (tf − t0)`.
    pub h_min: Option<f64>,
}

impl IntegrationConfig {
    pub fn new(method: Method, pair: PairKind, mode: StepMode) -> Self {
        IntegrationConfig {
            method,
            pair,
            mode,
            t0: None,
            tf: None,
            safety: 0.8,
            growth: 4.0,
            shrink: 0.1,
            h_min: None,
        }
    }

    pub fn fixed(method: Method, pair: PairKind, h: f64) -> Self {
        Self::new(method, pair, StepMode::Fixed { h })
    }

    pub fn adaptive(method: Method, pair: PairKind, tol: f64) -> Self {
        Self::new(method, pair, StepMode::Adaptive { tol })
    }

    pub fn with_interval(mut self, t0: f64, tf: f64) -> Self {
        self.t0 = Some(t0);
        self.tf = Some(tf);
        self
    }

    /// Integration interval for `problem`.
    pub fn interval(&self, problem: &ProblemSpec) -> (f64, f64) {
        (self.t0.unwrap_or(problem.t0), self.tf.unwrap_or(problem.tf))
    }

    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        problem.validate()?;
        let (t0, tf) = self.interval(problem);
        if !(t0.is_finite() && tf.is_finite() && t0 < tf) {
            return Err(Error::InvalidConfig(format!(
                "need t0 < tf, got [{t0}, {tf}]"
            )));
        }
        match self.mode {
            StepMode::Fixed { h } if !(h > 0.0 && h.is_finite()) => {
                return Err(Error::InvalidConfig(format!(
                    "step size must be positive, got {h}"
                )))
            }
            StepMode::Adaptive { tol } if !(tol > 0.0 && tol.is_finite()) => {
                return Err(Error::InvalidConfig(format!(
                    "tolerance must be positive, got {tol}"
                )))
            }
            _ => {}
        }
        if !(self.safety > 0.0 && self.shrink > 0.0 && self.shrink <= 1.0 && self.growth >= 1.0) {
            return Err(Error::InvalidConfig(
                "bad step size controller constants".into(),
            ));
        }
        Ok(())
    }

    fn h_min(&self, t0: f64, tf: f64) -> f64 {
        self.h_min.unwrap_or(1e-14 * (tf - t0))
    }
}

/// Counters and measurements of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    /// Sign-invariant error against the exact factor at the final time, when known.
    pub err: Option<f64>,
    /// Number of mesh points at which a chart change happened.
    pub reimbeddings: usize,
    /// Number of columns whose chart was rebuilt, summed over mesh points.
    pub reimbedded_columns: usize,
    pub rejections: usize,
    /// Rejections attributed to the column that failed; sums to `rejections`.
    pub rejections_by_column: Vec<usize>,
    /// Accepted steps.
    pub steps: usize,
    /// Right-hand side evaluations per column, rejected attempts included.
    pub rhs_evals_by_column: Vec<u64>,
    pub wall_seconds: f64,
    pub seed: Option<u64>,
}

impl RunStats {
    fn new(columns: usize, seed: Option<u64>) -> Self {
        RunStats {
            rejections_by_column: vec![0; columns],
            rhs_evals_by_column: vec![0; columns],
            seed,
            ..Default::default()
        }
    }

    fn reject(&mut self, column: usize) {
        self.rejections += 1;
        self.rejections_by_column[column] += 1;
    }

    /// Rejections at the first column (counted from one in reports).
    pub fn first_column_rejections(&self) -> usize {
        self.rejections_by_column.first().copied().unwrap_or(0)
    }
}

enum StepView<'a> {
    Frames {
        frames: &'a Frames,
        stage_states: &'a [Vec<Vec<f64>>],
    },
    Dense {
        q: &'a Matrix,
        stages: &'a [Matrix],
    },
}

/// What an [`Observer`] sees after each accepted step.
pub struct AcceptedStep<'a> {
    /// End of the step.
    pub t: f64,
    pub h: f64,
    /// `diag(Ã)` at `t`.
    pub diag: &'a [f64],
    /// `diag(Ã)` at each stage abscissa `t − h + c_s h`.
    pub stage_diag: &'a [Vec<f64>],
    pub c: &'a [f64],
    pub b: &'a [f64],
    /// Per-column error estimates of this step.
    pub column_errors: &'a [f64],
    view: StepView<'a>,
}

impl AcceptedStep<'_> {
    /// The orthonormal factor at `t`.
    pub fn q(&self) -> Matrix {
        match &self.view {
            StepView::Frames { frames, .. } => frames.q(),
            StepView::Dense { q, .. } => (*q).clone(),
        }
    }

    /// The factor formed from stage `s` values.
    pub fn stage_q(&self, s: usize) -> Matrix {
        match &self.view {
            StepView::Frames {
                frames,
                stage_states,
            } => {
                let mut f = (*frames).clone();
                for (i, y) in stage_states[s].iter().enumerate() {
                    f.set_state(i, y.clone());
                }
                f.q()
            }
            StepView::Dense { stages, .. } => stages[s].clone(),
        }
    }

    pub fn frames(&self) -> Option<&Frames> {
        match &self.view {
            StepView::Frames { frames, .. } => Some(frames),
            StepView::Dense { .. } => None,
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }
}

/// Callback invoked by the drivers.
pub trait Observer {
    fn accepted(&mut self, step: &AcceptedStep<'_>);

    fn rejected(&mut self, _t: f64, _h: f64, _column: usize) {}
}

impl<F: FnMut(&AcceptedStep<'_>)> Observer for F {
    fn accepted(&mut self, step: &AcceptedStep<'_>) {
        self(step)
    }
}

/// Observer that does nothing.
pub struct NoObserver;

impl Observer for NoObserver {
    fn accepted(&mut self, _: &AcceptedStep<'_>) {}
}

/// Running `∫ diag(Ã) dt` by the weights `b` of the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovAccumulator {
    pub t0: f64,
    pub t: f64,
    pub integral: Vec<f64>,
}

impl LyapunovAccumulator {
    pub fn new(t0: f64, columns: usize) -> Self {
        LyapunovAccumulator {
            t0,
            t: t0,
            integral: vec![0.0; columns],
        }
    }

    pub fn add(&mut self, h: f64, b: &[f64], stage_diag: &[Vec<f64>]) {
        for (w, d) in b.iter().zip(stage_diag) {
            if *w != 0.0 {
                for (acc, x) in self.integral.iter_mut().zip(d) {
                    *acc += h * w * x;
                }
            }
        }
        self.t += h;
    }

    /// Time averages `(1/(t − t0)) ∫ diag(Ã)`.
    pub fn exponents(&self) -> Vec<f64> {
        let span = self.t - self.t0;
        self.integral.iter().map(|x| x / span).collect()
    }
}

impl Observer for LyapunovAccumulator {
    fn accepted(&mut self, step: &AcceptedStep<'_>) {
        self.add(step.h, step.b, step.stage_diag);
        self.t = step.t;
    }
}

/// Final state of a run.
#[derive(Debug, Clone)]
pub struct Solution {
    pub t: f64,
    /// Final coordinates (absent for the projected baseline).
    pub frames: Option<Frames>,
    pub q: Matrix,
    /// `diag(Ã)` at the final time.
    pub diag: Vec<f64>,
    /// Time averages of `diag(Ã)` over the run.
    pub lyapunov: Vec<f64>,
    pub stats: RunStats,
}

/// `h · clamp(safety · err^{−1/(q+1)}, shrink, cap)` with `cap = growth` on
/// acceptance and `1` on rejection.
pub fn next_step_size(h: f64, err: f64, q: u32, accepted: bool, cfg: &IntegrationConfig) -> f64 {
    h * step_factor(err, 1.0 / (q as f64 + 1.0), accepted, cfg)
}

fn step_factor(err: f64, exponent: f64, accepted: bool, cfg: &IntegrationConfig) -> f64 {
    let cap = if accepted { cfg.growth } else { 1.0 };
    let raw = if err > 0.0 {
        cfg.safety * (1.0 / err).powf(exponent)
    } else {
        f64::INFINITY
    };
    raw.clamp(cfg.shrink, cap)
}

/// Integrates `problem` with the method and step control of `config`.
pub fn integrate(
    problem: &ProblemSpec,
    config: &IntegrationConfig,
    observer: &mut dyn Observer,
) -> Result<Solution> {
    let coords = match config.method.coordinates() {
        Some(c) => c,
        None => return integrate_projected(problem, config, observer),
    };
    config.validate(problem)?;
    let start = Instant::now();
    let (t0, tf) = config.interval(problem);
    let pair = ButcherPair::new(config.pair);
    let p = problem.p;
    let mut frames = Frames::init(&problem.x0, coords).map_err(|e| e.at(t0))?;
    let mut stats = RunStats::new(p, problem.seed);
    let mut lyap = LyapunovAccumulator::new(t0, p);
    let mut diag = crate::flows::column_rates_and_diag(&frames, &problem.a(t0))
        .map(|(_, d)| d)
        .unwrap_or_else(|_| vec![f64::NAN; p]);
    let exponent = pair.controller_exponent();
    let mut t = t0;

    let (fixed_h, tol) = match config.mode {
        StepMode::Fixed { h } => (Some(h), None),
        StepMode::Adaptive { tol } => (None, Some(tol)),
    };
    let mut h = match config.mode {
        StepMode::Fixed { h } => h,
        StepMode::Adaptive { tol } => tol.powf(exponent).min(0.5 * (tf - t0)),
    };
    let h_min = config.h_min(t0, tf);
    let fixed_steps = fixed_h.map(|h| fixed_step_count(t0, tf, h));
    let mut k = 0usize;

    while t < tf {
        if let Some(i) = frames.first_unhealthy() {
            frames.reimbed_from(i).map_err(|e| e.at(t))?;
            stats.reimbeddings += 1;
            stats.reimbedded_columns += p - i;
        }
        let (h_try, t_next) = match fixed_steps {
            Some(nsteps) => {
                let t_next = if k + 1 >= nsteps {
                    tf
                } else {
                    t0 + (k + 1) as f64 * h
                };
                (t_next - t, t_next)
            }
            None => {
                if t + h >= tf || tf - (t + h) < 1e-12 * (tf - t0) {
                    (tf - t, tf)
                } else {
                    (h, t + h)
                }
            }
        };
        let attempt = attempt_step(
            &frames,
            problem,
            t,
            h_try,
            &pair,
            tol,
            &mut stats.rhs_evals_by_column,
        );
        match attempt {
            Attempt::Accepted(data) => {
                for (i, y) in data.states.into_iter().enumerate() {
                    frames.set_state(i, y);
                }
                frames.normalize();
                let last = pair.stages() - 1;
                diag.clone_from(&data.stage_diag[last]);
                lyap.add(h_try, &pair.b, &data.stage_diag);
                t = t_next;
                k += 1;
                stats.steps += 1;
                observer.accepted(&AcceptedStep {
                    t,
                    h: h_try,
                    diag: &diag,
                    stage_diag: &data.stage_diag,
                    c: &pair.c,
                    b: &pair.b,
                    column_errors: &data.errors,
                    view: StepView::Frames {
                        frames: &frames,
                        stage_states: &data.stage_states,
                    },
                });
                if fixed_h.is_none() {
                    let fac = data
                        .errors
                        .iter()
                        .map(|&e| step_factor(e, exponent, true, config))
                        .fold(config.growth, f64::min);
                    h = h_try * fac;
                }
            }
            Attempt::Rejected { column, err } => {
                stats.reject(column);
                observer.rejected(t, h_try, column);
                h = h_try * step_factor(err, exponent, false, config);
                if h < h_min {
                    return Err(Error::StepsizeUnderflow { t, h, column });
                }
            }
            Attempt::Aborted { column, error } => {
                if fixed_h.is_some() {
                    return Err(error.at(t));
                }
                stats.reject(column);
                observer.rejected(t, h_try, column);
                h = 0.5 * h_try;
                if h < h_min {
                    return Err(Error::StepsizeUnderflow { t, h, column });
                }
            }
        }
    }

    let q = frames.q();
    stats.err = problem.exact(tf).map(|qe| q_error(&q, &qe)).transpose()?;
    stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(Solution {
        t,
        q,
        diag,
        lyapunov: lyap.exponents(),
        frames: Some(frames),
        stats,
    })
}

/// Number of steps of size `h` covering `[t0, tf]`, the last one possibly shorter.
pub(crate) fn fixed_step_count(t0: f64, tf: f64, h: f64) -> usize {
    let r = (tf - t0) / h;
    let n = r.round();
    if (r - n).abs() <= 1e-9 * r.max(1.0) {
        n.max(1.0) as usize
    } else {
        r.ceil() as usize
    }
}
