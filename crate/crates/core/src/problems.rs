//! Built-in test problems `Ẋ = A(t) X` and their exact orthonormal factors.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{mgs_orthonormalize, Matrix};

pub type CoefficientFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;

/// A coefficient matrix provider together with initial data.
#[derive(Clone)]
pub struct ProblemSpec {
    pub label: String,
    pub n: usize,
    pub p: usize,
    /// Default integration interval.
    pub t0: f64,
    pub tf: f64,
    pub coeff: CoefficientFn,
    pub x0: Matrix,
    pub exact_q: Option<CoefficientFn>,
    /// Seed used to draw random initial data, when any.
    pub seed: Option<u64>,
}

impl ProblemSpec {
    pub fn new(
        label: impl Into<String>,
        interval: (f64, f64),
        x0: Matrix,
        coeff: impl Fn(f64) -> Matrix + Send + Sync + 'static,
    ) -> Self {
        let (n, p) = x0.shape();
        ProblemSpec {
            label: label.into(),
            n,
            p,
            t0: interval.0,
            tf: interval.1,
            coeff: Arc::new(coeff),
            x0,
            exact_q: None,
            seed: None,
        }
    }

    pub fn with_exact(mut self, q: impl Fn(f64) -> Matrix + Send + Sync + 'static) -> Self {
        self.exact_q = Some(Arc::new(q));
        self
    }

    pub fn a(&self, t: f64) -> Matrix {
        (self.coeff)(t)
    }

    pub fn exact(&self, t: f64) -> Option<Matrix> {
        self.exact_q.as_ref().map(|q| q(t))
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.p > self.n {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= p <= n, got n = {}, p = {}",
                self.n, self.p
            )));
        }
        let a0 = self.a(self.t0);
        if a0.shape() != (self.n, self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: a0.rows(),
            });
        }
        if !a0.is_finite() || !self.x0.is_finite() {
            return Err(Error::InvalidConfig("non-finite problem data at t0".into()));
        }
        Ok(())
    }
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("p", &self.p)
            .field("interval", &(self.t0, self.tf))
            .field("exact", &self.exact_q.is_some())
            .field("seed", &self.seed)
            .finish()
    }
}

/// Planar rotation `[[cos φ, −sin φ], [sin φ, cos φ]]`.
fn rotation2(phi: f64) -> Matrix {
    let (s, c) = phi.sin_cos();
    Matrix::from_rows(&[[c, -s], [s, c]])
}

/// Exponentially dichotomic, fast rotating 2x2 problem on `[0, 10]`.
///
/// `X(t) = [[cos αt, sin αt], [sin αt, −cos αt]] diag(e^{βt}, −e^{−βt})`,
/// whose orthonormal factor is the rotation by `αt`.
pub fn example1(alpha: f64, beta: f64) -> ProblemSpec {
    ProblemSpec::new("example1", (0.0, 10.0), Matrix::identity(2), move |t| {
        let (s2, c2) = (2.0 * alpha * t).sin_cos();
        Matrix::from_rows(&[
            [beta * c2, -alpha + beta * s2],
            [alpha + beta * s2, -beta * c2],
        ])
    })
    .with_exact(move |t| rotation2(alpha * t))
}

/// Angle driving [`example2`].
pub fn example2_angle(alpha: f64, t: f64) -> f64 {
    alpha / (1.0 + alpha * alpha) * ((-alpha * t).exp() + alpha * t.sin() - t.cos())
}

/// Skew 2x2 problem `A = α(θ(t) − sin t) [[0, 1], [−1, 0]]` on `[0, 10]`.
///
/// The angle satisfies `θ' = −α(θ − sin t)`, so the flow from `X(0) = I` is
/// the rotation by `θ(t)` in the positive sense.
pub fn example2(alpha: f64) -> ProblemSpec {
    ProblemSpec::new("example2", (0.0, 10.0), Matrix::identity(2), move |t| {
        let g = alpha * (example2_angle(alpha, t) - t.sin());
        Matrix::from_rows(&[[0.0, g], [-g, 0.0]])
    })
    .with_exact(move |t| rotation2(example2_angle(alpha, t)))
}

/// Coefficients of a stiff boundary value problem with interior layer, on `[−1, 1]`.
pub fn example3(epsilon: f64) -> ProblemSpec {
    let e = epsilon;
    ProblemSpec::new("example3", (-1.0, 1.0), Matrix::identity(4), move |t| {
        Matrix::from_rows(&[
            [0.0, 0.0, 1.0, 0.0],
            [t / (2.0 * e), 0.0, 1.0, 0.5],
            [1.0 / e, 0.0, 0.0, 0.0],
            [0.0, 1.0 / e, 1.0 / e, -t / (2.0 * e)],
        ])
    })
}

/// `Q_γ(t) = [[cos γt, sin γt], [−sin γt, cos γt]]` and its time derivative.
fn q_gamma(gamma: f64, t: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    let (s, c) = (gamma * t).sin_cos();
    (
        [[c, s], [-s, c]],
        [[-gamma * s, gamma * c], [-gamma * c, -gamma * s]],
    )
}

/// The orthogonal factor of [`example4`] and its derivative.
pub fn example4_q(alpha: f64, beta: f64, t: f64) -> (Matrix, Matrix) {
    let (qa, dqa) = q_gamma(alpha, t);
    let (qb, dqb) = q_gamma(beta, t);
    let embed_b = |b: &[[f64; 2]; 2], one: f64| {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = one;
        m[(3, 3)] = one;
        for i in 0..2 {
            for j in 0..2 {
                m[(1 + i, 1 + j)] = b[i][j];
            }
        }
        m
    };
    let embed_a = |a: &[[f64; 2]; 2]| {
        let mut m = Matrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                m[(i, j)] = a[i][j];
                m[(2 + i, 2 + j)] = a[i][j];
            }
        }
        m
    };
    let mb = embed_b(&qb, 1.0);
    let dmb = embed_b(&dqb, 0.0);
    let na = embed_a(&qa);
    let dna = embed_a(&dqa);
    let q = mb.matmul(&na);
    let dq = dmb.matmul(&na).add(&mb.matmul(&dna));
    (q, dq)
}

/// `D(t) = diag(1, cos t, −1/(2√(t+1)), −10)`.
pub fn example4_d(t: f64) -> [f64; 4] {
    [1.0, t.cos(), -0.5 / (t + 1.0).sqrt(), -10.0]
}

/// `A = Q D Qᵀ + Q̇ Qᵀ` with block rotations `Q(t)`, on `[0, 100]`.
pub fn example4(alpha: f64, beta: f64) -> ProblemSpec {
    ProblemSpec::new("example4", (0.0, 100.0), Matrix::identity(4), move |t| {
        let (q, dq) = example4_q(alpha, beta, t);
        let qt = q.transpose();
        q.matmul(&Matrix::diag(&example4_d(t)))
            .matmul(&qt)
            .add(&dq.matmul(&qt))
    })
    .with_exact(move |t| example4_q(alpha, beta, t).0)
}

/// Diagonal problem `A = diag(−1/(2√(t+1)), −10, cos t, 1)` on `[0, 100]`,
/// started from `I` or from a seeded random orthogonal matrix.
pub fn example5(random_q0: bool, seed: u64) -> ProblemSpec {
    let coeff = |t: f64| Matrix::diag(&[-0.5 / (t + 1.0).sqrt(), -10.0, t.cos(), 1.0]);
    if random_q0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = Matrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..=1.0));
        let q0 = mgs_orthonormalize(&raw).expect("random 4x4 draw is full rank");
        let mut spec = ProblemSpec::new("example5-random", (0.0, 100.0), q0, coeff);
        spec.seed = Some(seed);
        spec
    } else {
        ProblemSpec::new("example5", (0.0, 100.0), Matrix::identity(4), coeff)
            .with_exact(|_| Matrix::identity(4))
    }
}

/// Upper Hessenberg Frank matrix of order `n`.
pub fn frank_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        if j + 1 >= i {
            (n - i.max(j)) as f64
        } else {
            0.0
        }
    })
}

/// Constant Frank matrix flow from `X(0) = [I_p; 0]` on `[0, 100]`.
pub fn example6(n: usize, p: usize) -> ProblemSpec {
    let a = frank_matrix(n);
    ProblemSpec::new("example6", (0.0, 100.0), Matrix::eye(n, p), move |_| {
        a.clone()
    })
}

/// Real parts of the 13 leading eigenvalues of the order-25 Frank matrix,
/// to four digits.
pub const FRANK25_LEADING: [f64; 13] = [
    77.9837, 60.5984, 47.7777, 37.5667, 29.2021, 22.2856, 16.5772, 11.9193, 8.2006, 5.3359, 3.2479,
    1.8495, 1.1841,
];

/// `A ≡ 0` smoke problem.
pub fn zero_problem(n: usize, p: usize) -> ProblemSpec {
    ProblemSpec::new("zero", (0.0, 1.0), Matrix::eye(n, p), move |_| {
        Matrix::zeros(n, n)
    })
    .with_exact(move |_| Matrix::eye(n, p))
}

/// Sign-invariant distance between orthonormal factors: the largest, over
/// columns, of `min(‖a − b‖∞, ‖a + b‖∞)`.
pub fn q_error(computed: &Matrix, exact: &Matrix) -> Result<f64> {
    if computed.shape() != exact.shape() {
        return Err(Error::DimensionMismatch {
            expected: exact.rows() * exact.cols(),
            found: computed.rows() * computed.cols(),
        });
    }
    let mut worst = 0.0f64;
    for j in 0..exact.cols() {
        let (mut minus, mut plus) = (0.0f64, 0.0f64);
        for i in 0..exact.rows() {
            minus = minus.max((computed[(i, j)] - exact[(i, j)]).abs());
            plus = plus.max((computed[(i, j)] + exact[(i, j)]).abs());
        }
        worst = worst.max(minus.min(plus));
    }
    Ok(worst)
}
