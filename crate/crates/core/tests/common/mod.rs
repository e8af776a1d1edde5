//! Independent oracles shared by the integration tests and the acceptance run.
//!
//! Nothing here calls the library's own factorization or flow code; frames are
//! only read through their public fields and `q()`.

#![allow(dead_code)]

use qrflow::flows::{column_rates_and_diag, update_a_givens, update_a_householder};
use qrflow::frames::{GivensFrames, HouseholderFrames};
use qrflow::integrate::{attempt_step, Attempt, ButcherPair};
use qrflow::{Coordinates, Frames, Matrix, Method, PairKind, ProblemSpec, Variant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn sign(rng: &mut impl Rng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn unit_vector(rng: &mut impl Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        if nv > 0.1 && nv <= 1.0 {
            return v.iter().map(|x| x / nv).collect();
        }
    }
}

pub const COORDS: [Coordinates; 4] = [
    Coordinates::Givens,
    Coordinates::Householder(Variant::U),
    Coordinates::Householder(Variant::V),
    Coordinates::Householder(Variant::W),
];

pub const FACTORED: [Method; 4] = [Method::Theta, Method::U, Method::V, Method::W];

// ---------------------------------------------------------------------------
// Dense elementary transforms

/// `I − 2 z zᵀ / zᵀz`.
pub fn reflector_matrix(z: &[f64]) -> Matrix {
    let nu: f64 = z.iter().map(|x| x * x).sum();
    Matrix::from_fn(z.len(), z.len(), |i, j| {
        (if i == j { 1.0 } else { 0.0 }) - 2.0 * z[i] * z[j] / nu
    })
}

/// Rotator in the plane `(0, j)`: `[[c, −s], [s, c]]`.
pub fn rotator_matrix(m: usize, j: usize, theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    let mut r = Matrix::identity(m);
    r[(0, 0)] = c;
    r[(0, j)] = -s;
    r[(j, 0)] = s;
    r[(j, j)] = c;
    r
}

/// Derivative of [`rotator_matrix`] with respect to the angle.
pub fn rotator_derivative(m: usize, j: usize, theta: f64) -> Matrix {
    let (s, c) = theta.sin_cos();
    let mut r = Matrix::zeros(m, m);
    r[(0, 0)] = -s;
    r[(0, j)] = -c;
    r[(j, 0)] = c;
    r[(j, j)] = -s;
    r
}

/// `R_{π(1)} ⋯ R_{π(m−1)}`.
pub fn givens_product(angles: &[f64], pi: &[usize]) -> Matrix {
    let m = pi.len();
    let mut g = Matrix::identity(m);
    for (th, &j) in angles.iter().zip(&pi[1..]) {
        g = g.matmul(&rotator_matrix(m, j, *th));
    }
    g
}

/// `Σ_k θ̇_k R_{π(1)} ⋯ R'_{π(k)} ⋯ R_{π(m−1)}`.
pub fn givens_product_rate(angles: &[f64], rates: &[f64], pi: &[usize]) -> Matrix {
    let m = pi.len();
    let mut out = Matrix::zeros(m, m);
    for k in 0..angles.len() {
        let mut g = Matrix::identity(m);
        for (l, (th, &j)) in angles.iter().zip(&pi[1..]).enumerate() {
            let f = if l == k {
                rotator_derivative(m, j, *th)
            } else {
                rotator_matrix(m, j, *th)
            };
            g = g.matmul(&f);
        }
        out = out.add(&g.scale(rates[k]));
    }
    out
}

/// `exp(h A) X` by a long Taylor series; `‖hA‖` is assumed small.
pub fn propagate(a: &Matrix, h: f64, x: &Matrix) -> Matrix {
    let mut out = x.clone();
    let mut term = x.clone();
    for k in 1..40 {
        term = a.matmul(&term).scale(h / k as f64);
        out = out.add(&term);
        if term.max_abs() == 0.0 {
            break;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Textbook triangularizations

/// Signs `σᵢ = −1` if `xᵢ(0) ≥ 0`, else `+1`, from reducing `x0` column by column.
pub fn ideal_sigmas(x0: &Matrix) -> Vec<f64> {
    let (n, p) = x0.shape();
    let mut w = x0.clone();
    let mut out = Vec::new();
    for i in 0..p {
        let x: Vec<f64> = (i..n).map(|r| w[(r, i)]).collect();
        let s = if x[0] >= 0.0 { -1.0 } else { 1.0 };
        let mut u = x.clone();
        u[0] -= s * norm(&x);
        let pm = reflector_matrix(&u);
        let block = pm.matmul(&w.block(i, 0, n - i, p));
        for r in i..n {
            for c in 0..p {
                w[(r, c)] = block[(r - i, c)];
            }
        }
        out.push(s);
    }
    out
}

/// Plane orderings `[0, l, 1, …]`, `l` the largest trailing entry (first on
/// ties), and angles making all partial first entries nonnegative.
pub fn ideal_givens(x0: &Matrix) -> (Vec<Vec<usize>>, Vec<Vec<f64>>) {
    let (n, p) = x0.shape();
    let mut w = x0.clone();
    let mut orders = Vec::new();
    let mut angles = Vec::new();
    for i in 0..p {
        let m = n - i;
        let mut x: Vec<f64> = (i..n).map(|r| w[(r, i)]).collect();
        let mut l = 1;
        for j in 2..m {
            if x[j].abs() > x[l].abs() {
                l = j;
            }
        }
        let mut pi = vec![0];
        if m > 1 {
            pi.push(l);
            pi.extend((1..m).filter(|&j| j != l));
        }
        let mut th = Vec::new();
        for &j in &pi[1..] {
            let t = x[j].atan2(x[0]);
            let (s, c) = t.sin_cos();
            let (a, b) = (x[0], x[j]);
            x[0] = c * a + s * b;
            x[j] = -s * a + c * b;
            th.push(t);
        }
        let g = givens_product(&th, &pi);
        let block = g.transpose().matmul(&w.block(i, 0, m, p));
        for r in i..n {
            for c in 0..p {
                w[(r, c)] = block[(r - i, c)];
            }
        }
        orders.push(pi);
        angles.push(th);
    }
    (orders, angles)
}

// ---------------------------------------------------------------------------
// Random frames and the refactorization oracle

/// Random frames away from coordinate singularities.
pub fn random_frames(rng: &mut impl Rng, n: usize, p: usize, coords: Coordinates) -> Frames {
    match coords {
        Coordinates::Givens => {
            let mut g = GivensFrames::identity(n, p);
            for i in 0..p {
                let m = n - i;
                g.angles[i] = (0..m - 1).map(|_| rng.gen_range(-0.8..0.8)).collect();
                if m > 1 {
                    let l = rng.gen_range(1..m);
                    let mut pi = vec![0, l];
                    pi.extend((1..m).filter(|&j| j != l));
                    g.order[i] = pi;
                }
            }
            Frames::Givens(g)
        }
        Coordinates::Householder(variant) => {
            let mut cols = Vec::new();
            let mut sigma = Vec::new();
            for i in 0..p {
                let m = n - i;
                let s = sign(rng);
                let st = match variant {
                    Variant::U => {
                        // [x − σ‖x‖e₁; σ‖x‖] for a random x
                        loop {
                            let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                            let nx = norm(&x);
                            let mut u = x.clone();
                            u[0] -= s * nx;
                            if nx > 0.3 && norm(&u) > 0.3 * nx {
                                u.push(s * nx);
                                break u;
                            }
                        }
                    }
                    Variant::V => loop {
                        let v = unit_vector(rng, m);
                        if v[0].abs() > 0.3 {
                            break v;
                        }
                    },
                    Variant::W => (0..m - 1).map(|_| rng.gen_range(-0.7..0.7)).collect(),
                };
                cols.push(st);
                sigma.push(s);
            }
            Frames::Householder(HouseholderFrames {
                variant,
                n,
                p,
                cols,
                sigma,
            })
        }
    }
}

/// A matrix `X = Q R` whose triangularization in the charts of `frames`
/// (same signs, same plane orderings) reproduces `frames` exactly.
pub fn matrix_for(frames: &Frames, rng: &mut impl Rng) -> Matrix {
    let p = frames.p();
    let mut r = Matrix::zeros(p, p);
    for i in 0..p {
        r[(i, i)] = match frames {
            Frames::Householder(h) if h.variant == Variant::U => h.cols[i][h.n - i],
            Frames::Householder(h) => h.sigma[i] * rng.gen_range(0.5..2.0),
            Frames::Givens(_) => rng.gen_range(0.5..2.0),
        };
        for j in i + 1..p {
            r[(i, j)] = rng.gen_range(-1.0..1.0);
        }
    }
    frames.q().matmul(&r)
}

/// Triangularizes `x` keeping every chart choice of `template` fixed: the
/// signs `σᵢ`, the sign of each `v`, and each plane ordering.
pub fn refactor(x: &Matrix, template: &Frames) -> Frames {
    let (n, p) = x.shape();
    let mut w = x.clone();
    let mut out = template.clone();
    for i in 0..p {
        let m = n - i;
        let xi: Vec<f64> = (i..n).map(|r| w[(r, i)]).collect();
        let transform = match &mut out {
            Frames::Householder(h) => {
                let s = h.sigma[i];
                let nx = norm(&xi);
                let mut u = xi.clone();
                u[0] -= s * nx;
                h.cols[i] = match h.variant {
                    Variant::U => {
                        let mut st = u.clone();
                        st.push(s * nx);
                        st
                    }
                    Variant::V => {
                        let nu = norm(&u);
                        let flip = if (u[0] < 0.0) != (template.state(i)[0] < 0.0) {
                            -1.0
                        } else {
                            1.0
                        };
                        u.iter().map(|v| flip * v / nu).collect()
                    }
                    Variant::W => u[1..].iter().map(|v| v / u[0]).collect(),
                };
                reflector_matrix(&u)
            }
            Frames::Givens(g) => {
                let pi = g.order[i].clone();
                let mut y = xi.clone();
                let mut th = Vec::new();
                for &j in &pi[1..] {
                    let t = y[j].atan2(y[0]);
                    let (s, c) = t.sin_cos();
                    let (a, b) = (y[0], y[j]);
                    y[0] = c * a + s * b;
                    y[j] = -s * a + c * b;
                    th.push(t);
                }
                let gm = givens_product(&th, &pi).transpose();
                g.angles[i] = th;
                gm
            }
        };
        let block = transform.matmul(&w.block(i, 0, m, p));
        for r in i..n {
            for c in 0..p {
                w[(r, c)] = block[(r - i, c)];
            }
        }
    }
    out
}

/// Central difference of the refactorized states along `exp(tA) X`.
pub fn fd_rates(a: &Matrix, x: &Matrix, template: &Frames, h: f64) -> Vec<Vec<f64>> {
    let plus = refactor(&propagate(a, h, x), template);
    let minus = refactor(&propagate(a, -h, x), template);
    (0..template.p())
        .map(|i| {
            plus.state(i)
                .iter()
                .zip(minus.state(i))
                .map(|(p, m)| (p - m) / (2.0 * h))
                .collect()
        })
        .collect()
}

pub fn rel_discrepancy(approx: &[Vec<f64>], exact: &[Vec<f64>]) -> f64 {
    let scale = 1.0 + exact.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    approx
        .iter()
        .flatten()
        .zip(exact.iter().flatten())
        .fold(0.0f64, |m, (a, e)| m.max((a - e).abs()))
        / scale
}

#[derive(Debug, Default)]
pub struct OracleReport {
    pub instances: usize,
    pub worst_discrepancy: f64,
    pub worst_ratio: f64,
    pub best_ratio: f64,
    pub worst_diag: f64,
}

/// Runs the refactorization oracle on `count` random instances of `coords`,
/// with `n ≤ 8`. Central differences at `h = 2e−3` and `1e−3` must approach
/// the rates at second order (ratio of discrepancies in `[3, 5]`), and their
/// Richardson extrapolation must remove the `h²` term: its discrepancy is
/// below `max(1e−9, 0.01 d(1e−3))`.
pub fn fd_oracle(coords: Coordinates, count: usize, seed: u64) -> Result<OracleReport, String> {
    let mut rng = rng(seed);
    let mut rep = OracleReport {
        best_ratio: f64::INFINITY,
        ..Default::default()
    };
    while rep.instances < count {
        let n = rng.gen_range(2..=8);
        let p = rng.gen_range(1..=n.min(4));
        let frames = random_frames(&mut rng, n, p, coords);
        let a = random_matrix(&mut rng, n, n);
        let x = matrix_for(&frames, &mut rng);
        let back = refactor(&x, &frames);
        for i in 0..p {
            let d = back
                .state(i)
                .iter()
                .zip(frames.state(i))
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if d > 1e-10 {
                return Err(format!(
                    "oracle does not reproduce the frame: column {i}, {d:e}"
                ));
            }
        }
        let (rates, diag) = column_rates_and_diag(&frames, &a).map_err(|e| e.to_string())?;
        let fd2 = fd_rates(&a, &x, &frames, 2e-3);
        let fd1 = fd_rates(&a, &x, &frames, 1e-3);
        let d2 = rel_discrepancy(&fd2, &rates);
        let d1 = rel_discrepancy(&fd1, &rates);
        let rich: Vec<Vec<f64>> = fd1
            .iter()
            .zip(&fd2)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (4.0 * x - y) / 3.0).collect())
            .collect();
        let dr = rel_discrepancy(&rich, &rates);
        if dr > (0.01 * d1).max(1e-9) {
            return Err(format!(
                "{coords:?} n={n} p={p}: extrapolated discrepancy {dr:e} (central {d1:e} at h=1e-3)"
            ));
        }
        if d1 > 1e-10 {
            let ratio = d2 / d1;
            if !(3.0..=5.0).contains(&ratio) {
                return Err(format!(
                    "{coords:?} n={n} p={p}: ratio {ratio} ({d2:e} / {d1:e})"
                ));
            }
            rep.worst_ratio = rep.worst_ratio.max((ratio - 4.0).abs());
            rep.best_ratio = rep.best_ratio.min(ratio);
        }
        // diag(Ã) = diag(QᵀAQ) because QᵀQ̇ is skew
        let q = frames.q();
        let qaq = q.transpose().matmul(&a.matmul(&q));
        for i in 0..p {
            rep.worst_diag = rep.worst_diag.max((qaq[(i, i)] - diag[i]).abs());
        }
        if rep.worst_diag > 1e-12 {
            return Err(format!("{coords:?}: diag mismatch {:e}", rep.worst_diag));
        }
        rep.worst_discrepancy = rep.worst_discrepancy.max(dr);
        rep.instances += 1;
    }
    Ok(rep)
}

/// Largest entrywise gap between both block updates and their dense formulas
/// over `count` random instances with `m ≤ 8`.
pub fn dense_update_gap(count: usize, seed: u64) -> Result<f64, String> {
    let mut rng = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let m = rng.gen_range(1..=8);
        let b = random_matrix(&mut rng, m, m);
        let z: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let zd: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if norm(&z) < 0.2 {
            continue;
        }
        let nu: f64 = z.iter().map(|v| v * v).sum();
        let zzd: f64 = z.iter().zip(&zd).map(|(a, b)| a * b).sum();
        let pm = reflector_matrix(&z);
        let pdot = Matrix::from_fn(m, m, |i, j| {
            -2.0 * (zd[i] * z[j] + z[i] * zd[j]) / nu + 4.0 * zzd * z[i] * z[j] / (nu * nu)
        });
        let dense = pm.matmul(&b).matmul(&pm).sub(&pm.matmul(&pdot));
        let got = update_a_householder(&b, &z, &zd).map_err(|e| e.to_string())?;
        worst = worst.max(got.sub(&dense).max_abs());

        let l = if m > 1 { rng.gen_range(1..m) } else { 1 };
        let mut pi = vec![0];
        if m > 1 {
            pi.push(l);
            pi.extend((1..m).filter(|&j| j != l));
        }
        let th: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let rates: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let g = givens_product(&th, &pi);
        let gd = givens_product_rate(&th, &rates, &pi);
        let dense = g
            .transpose()
            .matmul(&b)
            .matmul(&g)
            .sub(&g.transpose().matmul(&gd));
        let got = update_a_givens(&b, &th, &rates, &pi).map_err(|e| e.to_string())?;
        worst = worst.max(got.sub(&dense).max_abs());
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Early rejection

/// `A` that leaves the first two coordinates at rest and spins the third and
/// fourth at angular speed `omega (1 + sin 10t)`.
pub fn block_spin(omega: f64) -> ProblemSpec {
    ProblemSpec::new("block-spin", (0.0, 1.0), Matrix::identity(4), move |t| {
        let w = omega * (1.0 + (10.0 * t).sin());
        let mut a = Matrix::zeros(4, 4);
        a[(2, 3)] = w;
        a[(3, 2)] = -w;
        a
    })
}

/// Forces a rejection at column 2 of [`block_spin`] and returns the per-column
/// evaluation counts of that attempt.
pub fn forced_rejection(method: Method, pair: PairKind) -> Result<Vec<u64>, String> {
    let prob = block_spin(50.0);
    let coords = method.coordinates().ok_or("no factored coordinates")?;
    let frames = Frames::init(&prob.x0, coords).map_err(|e| e.to_string())?;
    let bp = ButcherPair::new(pair);
    let mut evals = vec![0u64; 4];
    match attempt_step(&frames, &prob, 0.0, 0.1, &bp, Some(1e-8), &mut evals) {
        Attempt::Rejected { column: 2, .. } => Ok(evals),
        other => Err(format!(
            "{method}: expected rejection at column 2, got {other:?}"
        )),
    }
}

// ---------------------------------------------------------------------------
// Chart and predicate checks

/// Worst relative deviation of `diag(E)` from `−η²/2` and of the
/// off-diagonal entries from `±η`, with `E = Q(θ)ᵀ(Q(θ − η) − Q(θ))` for
/// 2×2 rotation frames, over random `θ` and `η ∈ {1e−3, 1e−4, 1e−5}`.
pub fn thetacc_deviation(samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = rng(seed);
    let (mut diag_dev, mut off_dev) = (0.0f64, 0.0f64);
    let frame = |th: f64| {
        let mut g = GivensFrames::identity(2, 2);
        g.angles[0] = vec![th];
        Frames::Givens(g).q()
    };
    for _ in 0..samples {
        let th = rng.gen_range(-3.0..3.0);
        for eta in [1e-3, 1e-4, 1e-5] {
            let q = frame(th);
            let e = q.transpose().matmul(&frame(th - eta).sub(&q));
            let d = -0.5 * eta * eta;
            for i in 0..2 {
                diag_dev = diag_dev.max(((e[(i, i)] - d) / d).abs());
            }
            off_dev = off_dev.max(((e[(0, 1)] - eta) / eta).abs());
            off_dev = off_dev.max(((e[(1, 0)] + eta) / eta).abs());
        }
    }
    (diag_dev, off_dev)
}

fn random_x0(rng: &mut impl Rng) -> Matrix {
    loop {
        let n = rng.gen_range(2..=6);
        let p = rng.gen_range(1..=n);
        let x = random_matrix(rng, n, p);
        // keep well away from rank deficiency
        let q = qrflow::linalg::mgs_orthonormalize(&x);
        if let Ok(q) = q {
            let r = q.transpose().matmul(&x);
            if (0..p).all(|i| r[(i, i)].abs() > 0.05) {
                return x;
            }
        }
    }
}

/// Householder charts: starting from `init`, a zero-length step followed by a
/// chart change yields the textbook signs of `X0`; so does a chart change
/// from an arbitrary chart representing the same factor. Returns the number
/// of mismatches over `count` random `X0` and all three variants.
pub fn bestcoord1_mismatches(count: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut bad = 0;
    for _ in 0..count {
        let x0 = random_x0(&mut rng);
        let (n, p) = x0.shape();
        let a = random_matrix(&mut rng, n, n);
        let prob = ProblemSpec::new("const", (0.0, 1.0), x0.clone(), move |_| a.clone());
        let want = ideal_sigmas(&x0);
        for variant in [Variant::U, Variant::V, Variant::W] {
            let coords = Coordinates::Householder(variant);
            let mut f = Frames::init(&x0, coords).unwrap();
            let mut evals = vec![0; p];
            let bp = ButcherPair::new(PairKind::Dp5);
            match attempt_step(&f, &prob, 0.0, 0.0, &bp, None, &mut evals) {
                Attempt::Accepted(d) => {
                    for (i, y) in d.states.into_iter().enumerate() {
                        f.set_state(i, y);
                    }
                }
                _ => {
                    bad += 1;
                    continue;
                }
            }
            let Frames::Householder(h) = f.reimbed().unwrap() else {
                unreachable!()
            };
            if h.sigma != want {
                bad += 1;
            }
            // arbitrary chart of a matrix with the same column space structure
            let g = random_frames(&mut rng, n, p, coords);
            let x = matrix_for(&g, &mut rng);
            let Frames::Householder(h) = g.reimbed().unwrap() else {
                unreachable!()
            };
            if h.sigma != ideal_sigmas(&x) {
                bad += 1;
            }
        }
    }
    bad
}

/// Givens charts: a chart change from an arbitrary chart (any plane order,
/// angles anywhere in `(−3, 3)`) reproduces the largest-entry ordering and
/// the nonnegative-partials angles of the matrix it represents.
pub fn bestcoord2_mismatches(count: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut bad = 0;
    for _ in 0..count {
        let x0 = random_x0(&mut rng);
        let (n, p) = x0.shape();
        let (orders, angles) = ideal_givens(&x0);
        let Frames::Givens(g) = Frames::init(&x0, Coordinates::Givens).unwrap() else {
            unreachable!()
        };
        let Frames::Givens(g) = Frames::Givens(g).reimbed().unwrap() else {
            unreachable!()
        };
        if g.order != orders || !close(&g.angles, &angles, 1e-10) {
            bad += 1;
        }
        let mut f = random_frames(&mut rng, n, p, Coordinates::Givens);
        if let Frames::Givens(g) = &mut f {
            for th in g.angles.iter_mut().flatten() {
                *th = rng.gen_range(-3.0..3.0);
            }
        }
        let x = matrix_for(&f, &mut rng);
        let (orders, angles) = ideal_givens(&x);
        let Frames::Givens(g) = f.reimbed().unwrap() else {
            unreachable!()
        };
        if g.order != orders || !close(&g.angles, &angles, 1e-9) {
            bad += 1;
        }
    }
    bad
}

fn close(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() <= tol))
}

/// Householder health predicates against the textbook sign of the column
/// they encode, `x = σ r P e₁`, for random states of all three variants.
pub fn wellscaled_mismatches(samples: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut bad = 0;
    for k in 0..samples {
        let m = rng.gen_range(2..=8);
        let s = sign(&mut rng);
        let r = rng.gen_range(0.1..10.0);
        let variant = [Variant::U, Variant::V, Variant::W][k % 3];
        let (state, z) = match variant {
            Variant::V => {
                let v = unit_vector(&mut rng, m);
                (v.clone(), v)
            }
            Variant::W => {
                let wh: Vec<f64> = (0..m - 1)
                    .map(|_| rng.gen_range(-1.5..1.5) / (m as f64).sqrt())
                    .collect();
                let mut w = vec![1.0];
                w.extend_from_slice(&wh);
                (wh, w)
            }
            Variant::U => {
                let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let nx = norm(&x);
                let mut u = x.clone();
                u[0] -= s * nx;
                let z = u.clone();
                u.push(s * nx);
                (u, z)
            }
        };
        let pe1 = reflector_matrix(&z).column(0);
        let x: Vec<f64> = pe1.iter().map(|v| s * r * v).collect();
        let textbook = if x[0] >= 0.0 { -1.0 } else { 1.0 };
        let f = HouseholderFrames {
            variant,
            n: m,
            p: 1,
            cols: vec![state],
            sigma: vec![s],
        };
        if f.is_healthy(0) != (textbook == s) {
            bad += 1;
        }
    }
    bad
}

/// Product-of-cosines predicate against `x₁² + x₂² ≥ x_j²` on the column
/// `x = G e₁` in plane order, for random angles and orderings.
pub fn cheapcos_mismatches(samples: usize, seed: u64) -> usize {
    let mut rng = rng(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let m = rng.gen_range(2..=8);
        let l = rng.gen_range(1..m);
        let mut pi = vec![0, l];
        pi.extend((1..m).filter(|&j| j != l));
        let th: Vec<f64> = (0..m - 1).map(|_| rng.gen_range(-3.2..3.2)).collect();
        let x = givens_product(&th, &pi).column(0);
        let lead = x[pi[0]].powi(2) + x[pi[1]].powi(2);
        let ineq = pi[2..].iter().all(|&j| lead >= x[j].powi(2));
        let mut g = GivensFrames::identity(m, 1);
        g.angles[0] = th;
        g.order[0] = pi;
        if g.is_healthy(0) != ineq {
            bad += 1;
        }
    }
    bad
}
