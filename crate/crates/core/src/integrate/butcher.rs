//! Explicit embedded Runge–Kutta pairs.

use std::fmt;

/// Which tableau to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairKind {
    /// 3/8 rule of order 4 with an embedded order 3 formula.
    Rk38,
    /// Dormand–Prince 5(4).
    Dp5,
}

impl PairKind {
    pub fn name(self) -> &'static str {
        match self {
            PairKind::Rk38 => "rk38",
            PairKind::Dp5 => "dp5",
        }
    }
}

impl fmt::Display for PairKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An explicit tableau with embedded weights.
///
/// Both built-in pairs have a last stage at `c = 1` whose row equals `b`, so
/// the last stage value is the new solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherPair {
    pub kind: PairKind,
    pub c: Vec<f64>,
    /// Strictly lower triangular coefficients, `a[s]` has `s` entries.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub bhat: Vec<f64>,
    /// Order of the propagated solution.
    pub order: u32,
    /// Order `q` of the embedded formula.
    pub embedded_order: u32,
}

impl ButcherPair {
    pub fn new(kind: PairKind) -> Self {
        match kind {
            PairKind::Rk38 => Self::rk38(),
            PairKind::Dp5 => Self::dp5(),
        }
    }

    pub fn rk38() -> Self {
        ButcherPair {
            kind: PairKind::Rk38,
            c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0, 1.0],
            a: vec![
                vec![],
                vec![1.0 / 3.0],
                vec![-1.0 / 3.0, 1.0],
                vec![1.0, -1.0, 1.0],
                vec![1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
            ],
            b: vec![1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0, 0.0],
            bhat: vec![1.0 / 12.0, 1.0 / 2.0, 1.0 / 4.0, 0.0, 1.0 / 6.0],
            order: 4,
            embedded_order: 3,
        }
    }

    pub fn dp5() -> Self {
        ButcherPair {
            kind: PairKind::Dp5,
            c: vec![0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0],
            a: vec![
                vec![],
                vec![1.0 / 5.0],
                vec![3.0 / 40.0, 9.0 / 40.0],
                vec![44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
                vec![
                    19372.0 / 6561.0,
                    -25360.0 / 2187.0,
                    64448.0 / 6561.0,
                    -212.0 / 729.0,
                ],
                vec![
                    9017.0 / 3168.0,
                    -355.0 / 33.0,
                    46732.0 / 5247.0,
                    49.0 / 176.0,
                    -5103.0 / 18656.0,
                ],
                vec![
                    35.0 / 384.0,
                    0.0,
                    500.0 / 1113.0,
                    125.0 / 192.0,
                    -2187.0 / 6784.0,
                    11.0 / 84.0,
                ],
            ],
            b: vec![
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
                0.0,
            ],
            bhat: vec![
                5179.0 / 57600.0,
                0.0,
                7571.0 / 16695.0,
                393.0 / 640.0,
                -92097.0 / 339200.0,
                187.0 / 2100.0,
                1.0 / 40.0,
            ],
            order: 5,
            embedded_order: 4,
        }
    }

    pub fn stages(&self) -> usize {
        self.c.len()
    }

    /// Exponent `1/(q+1)` used by the step size controller.
    pub fn controller_exponent(&self) -> f64 {
        1.0 / (self.embedded_order as f64 + 1.0)
    }

    /// Whether the last stage value coincides with the propagated solution.
    pub fn last_stage_is_solution(&self) -> bool {
        let s = self.stages();
        self.c[s - 1] == 1.0
            && self.a[s - 1].iter().zip(&self.b).all(|(x, y)| x == y)
            && self.b[s - 1] == 0.0
    }

    /// Runs the stages for `y' = f(s, y)` where `s` is the stage index.
    ///
    /// Returns the stage values, the stage derivatives, the new solution and
    /// the embedded difference `h Σ (b − b̂) K`.
    pub fn run<E>(
        &self,
        y0: &[f64],
        h: f64,
        mut f: impl FnMut(usize, &[f64]) -> Result<Vec<f64>, E>,
    ) -> Result<StageRun, E> {
        let n = y0.len();
        let s = self.stages();
        let mut values: Vec<Vec<f64>> = Vec::with_capacity(s);
        let mut rates: Vec<Vec<f64>> = Vec::with_capacity(s);
        for st in 0..s {
            let mut y = y0.to_vec();
            for (j, a) in self.a[st].iter().enumerate() {
                if *a != 0.0 {
                    let k = &rates[j];
                    for (yi, ki) in y.iter_mut().zip(k) {
                        *yi += h * a * ki;
                    }
                }
            }
            let k = f(st, &y)?;
            values.push(y);
            rates.push(k);
        }
        let mut y1 = y0.to_vec();
        let mut delta = vec![0.0; n];
        for st in 0..s {
            let (b, d) = (self.b[st], self.b[st] - self.bhat[st]);
            for i in 0..n {
                y1[i] += h * b * rates[st][i];
                delta[i] += h * d * rates[st][i];
            }
        }
        Ok(StageRun {
            values,
            rates,
            y1,
            delta,
        })
    }
}

/// Output of [`ButcherPair::run`].
#[derive(Debug, Clone)]
pub struct StageRun {
    pub values: Vec<Vec<f64>>,
    pub rates: Vec<Vec<f64>>,
    pub y1: Vec<f64>,
    pub delta: Vec<f64>,
}
