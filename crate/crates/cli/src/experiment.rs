//! Experiment configuration and a single run.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use qrflow::problems::{
    example1, example2, example3, example4, example4_d, example5, example6, zero_problem,
};
use qrflow::{
    integrate, AcceptedStep, Error, IntegrationConfig, Method, PairKind, ProblemSpec, RunStats,
    StepMode,
};

use crate::report::num;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    U,
    V,
    W,
    Theta,
    Projected,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::U => Method::U,
            MethodArg::V => Method::V,
            MethodArg::W => Method::W,
            MethodArg::Theta => Method::Theta,
            MethodArg::Projected => Method::Projected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairArg {
    Rk38,
    Dp5,
}

impl From<PairArg> for PairKind {
    fn from(p: PairArg) -> PairKind {
        match p {
            PairArg::Rk38 => PairKind::Rk38,
            PairArg::Dp5 => PairKind::Dp5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Adaptive,
}

/// Flags describing one experiment. Shared by the command line and by
/// suite manifest lines.
#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// example1 .. example6 or zero
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    #[arg(long, value_enum, default_value = "dp5")]
    pub pair: PairArg,
    /// Inferred from --h / --tol when omitted.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Step size (fixed mode).
    #[arg(long)]
    pub h: Option<f64>,
    /// Tolerance (adaptive mode).
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tf: Option<f64>,
    /// Size of example6 and zero.
    #[arg(long)]
    pub n: Option<usize>,
    /// Column count of example6 and zero.
    #[arg(long)]
    pub p: Option<usize>,
    /// Random initial factor for example5.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Write the accepted-step trajectory to this file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// A validated experiment.
pub struct ExperimentConfig {
    pub problem: ProblemSpec,
    pub config: IntegrationConfig,
    pub csv: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_args(args: &ExperimentArgs) -> anyhow::Result<Self> {
        let label = args
            .problem
            .as_deref()
            .ok_or_else(|| anyhow!("--problem is required"))?;
        let method = args.method.ok_or_else(|| anyhow!("--method is required"))?;
        let pair = args.pair;
        let mode = match (args.mode, args.h, args.tol) {
            (_, Some(_), Some(_)) => bail!("give either --h or --tol, not both"),
            (Some(ModeArg::Fixed) | None, Some(h), None) => StepMode::Fixed { h },
            (Some(ModeArg::Adaptive) | None, None, Some(tol)) => StepMode::Adaptive { tol },
            (Some(ModeArg::Fixed), None, _) => bail!("fixed mode needs --h"),
            (Some(ModeArg::Adaptive), _, None) => bail!("adaptive mode needs --tol"),
            (None, None, None) => bail!("one of --h or --tol is required"),
        };
        let problem = build_problem(label, args)?;
        let mut config = IntegrationConfig::new(method.into(), pair.into(), mode);
        config.t0 = args.t0;
        config.tf = args.tf;
        config.validate(&problem)?;
        Ok(ExperimentConfig {
            problem,
            config,
            csv: args.csv.clone(),
        })
    }

    pub fn tag(&self) -> String {
        format!("{}{}", self.config.method, self.config.pair)
    }

    pub fn mode_text(&self) -> String {
        match self.config.mode {
            StepMode::Fixed { h } => format!("h={h:e}"),
            StepMode::Adaptive { tol } => format!("tol={tol:e}"),
        }
    }
}

fn build_problem(label: &str, args: &ExperimentArgs) -> anyhow::Result<ProblemSpec> {
    let sized = matches!(label, "example6" | "zero");
    if !sized && (args.n.is_some() || args.p.is_some()) {
        bail!("--n/--p apply to example6 and zero only");
    }
    if args.seed.is_some() && label != "example5" {
        bail!("--seed applies to example5 only");
    }
    let alpha = args.alpha;
    let beta = args.beta;
    let problem = match label {
        "example1" => example1(alpha.unwrap_or(100.0), beta.unwrap_or(100.0)),
        "example2" => example2(alpha.unwrap_or(100.0)),
        "example3" => example3(args.epsilon.unwrap_or(1e-2)),
        "example4" => example4(alpha.unwrap_or(1.0), beta.unwrap_or(2f64.sqrt())),
        "example5" => example5(args.seed.is_some(), args.seed.unwrap_or(0)),
        "example6" | "zero" => {
            let (dn, dp) = if label == "example6" {
                (25, 13)
            } else {
                (2, 2)
            };
            let n = args.n.unwrap_or(dn);
            let p = args.p.unwrap_or(dp.min(n));
            if n == 0 || p == 0 || p > n {
                bail!("need 0 < p <= n, got n = {n}, p = {p}");
            }
            if label == "example6" {
                example6(n, p)
            } else {
                zero_problem(n, p)
            }
        }
        other => bail!("unknown problem {other:?}"),
    };
    Ok(problem)
}

/// Where and why a run stopped.
#[derive(Debug, Clone)]
pub struct Failure {
    pub t: Option<f64>,
    pub column: Option<usize>,
    pub message: String,
}

impl Failure {
    fn from_error(e: &Error) -> Self {
        Failure {
            t: e.time(),
            column: e.column(),
            message: e.to_string(),
        }
    }

    pub fn location(&self) -> String {
        let t = self
            .t
            .map_or("t unknown".to_string(), |t| format!("t = {t}"));
        let c = self
            .column
            .map_or("column unknown".to_string(), |c| format!("column {c}"));
        format!("{t}, {c}")
    }
}

pub struct RunRecord {
    pub problem: String,
    pub tag: String,
    pub mode: String,
    pub wall_seconds: f64,
    pub outcome: Result<RunStats, Failure>,
}

fn csv_header(spec: &ProblemSpec, method: Method, defect: bool) -> Vec<String> {
    let mut head = vec!["t".to_string(), "h".to_string()];
    if method == Method::Projected {
        head.push("err".into());
    } else {
        head.extend((1..=spec.p).map(|i| format!("err_{i}")));
    }
    head.extend((1..=spec.p).map(|i| format!("diag_{i}")));
    if defect {
        head.push("log10_defect".into());
    }
    head
}

fn csv_record(step: &AcceptedStep<'_>, defect: bool) -> Vec<String> {
    let mut rec = vec![num(step.t), num(step.h)];
    rec.extend(step.column_errors.iter().map(|&e| num(e)));
    rec.extend(step.diag.iter().map(|&d| num(d)));
    if defect {
        let gap = step
            .diag
            .iter()
            .zip(example4_d(step.t))
            .fold(0.0f64, |g, (a, b)| g.max((a - b).abs()));
        rec.push(num(gap.log10()));
    }
    rec
}

/// Runs one experiment. Errors are only returned for output problems; an
/// integration failure is part of the record.
pub fn run_experiment(exp: &ExperimentConfig) -> anyhow::Result<RunRecord> {
    let spec = &exp.problem;
    let defect = spec.label.starts_with("example5") && spec.p == 4;
    let mut writer = match &exp.csv {
        Some(path) => {
            let mut w = csv::Writer::from_path(path)
                .with_context(|| format!("cannot create {}", path.display()))?;
            w.write_record(csv_header(spec, exp.config.method, defect))?;
            Some(w)
        }
        None => None,
    };
    let mut write_err = None;
    let start = Instant::now();
    let result = {
        let mut obs = |step: &AcceptedStep<'_>| {
            if let Some(w) = writer.as_mut() {
                if write_err.is_none() {
                    if let Err(e) = w.write_record(csv_record(step, defect)) {
                        write_err = Some(e);
                    }
                }
            }
        };
        integrate(spec, &exp.config, &mut obs)
    };
    let wall_seconds = start.elapsed().as_secs_f64();
    if let Some(e) = write_err {
        return Err(e.into());
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    Ok(RunRecord {
        problem: spec.label.clone(),
        tag: exp.tag(),
        mode: exp.mode_text(),
        wall_seconds,
        outcome: result.map(|s| s.stats).map_err(|e| Failure::from_error(&e)),
    })
}
