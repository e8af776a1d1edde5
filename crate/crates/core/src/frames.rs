//! Factored coordinates for an orthonormal `Q`.
//!
//! Column `i` (zero-based) of `Q` is carried by an elementary transform of
//! order `m = n − i` acting on the trailing coordinates:
//!
//! * Householder frames store one reflector vector per column together with
//!   the sign `σᵢ` of the diagonal entry it produces, so that
//!   `Qᵀ = P_{p−1} ⋯ P_0`.
//! * Givens frames store `m − 1` rotation angles per column together with an
//!   ordering `πᵢ` of the rotation planes, so that `Q = Q_0 ⋯ Q_{p−1} [I; 0]`.
//!
//! Each chart is valid only locally. The health predicates decide whether
//! the current chart is numerically sound, and reimbedding switches to a
//! fresh chart representing the same `Q`, using only the transforms
//! themselves.

use crate::error::{Error, Result};
use crate::linalg::{
    dot, householder_vector_from, norm2, reflect_cols, reflect_rows, rotate_cols, rotate_rows,
    rotate_vec, Matrix, Variant,
};

/// Length of the ODE state carried for a column of order `m`.
pub fn state_len(variant: Variant, m: usize) -> usize {
    match variant {
        // [u; σ‖x‖]
        Variant::U => m + 1,
        Variant::V => m,
        // ŵ, the leading 1 is implicit
        Variant::W => m - 1,
    }
}

/// Reflector vector `u`, `v` or `w = [1; ŵ]` encoded by a column state of order `m`.
pub fn reflector_from_state(variant: Variant, state: &[f64], m: usize) -> Vec<f64> {
    match variant {
        Variant::U => state[..m].to_vec(),
        Variant::V => state.to_vec(),
        Variant::W => {
            let mut w = Vec::with_capacity(m);
            w.push(1.0);
            w.extend_from_slice(state);
            w
        }
    }
}

/// Time derivative of the reflector vector given the derivative of the state.
pub fn reflector_rate_from_state(variant: Variant, rate: &[f64], m: usize) -> Vec<f64> {
    match variant {
        Variant::U => rate[..m].to_vec(),
        Variant::V => rate.to_vec(),
        Variant::W => {
            let mut w = Vec::with_capacity(m);
            w.push(0.0);
            w.extend_from_slice(rate);
            w
        }
    }
}

/// Applies `I − 2 z zᵀ / zᵀz` to a vector in place.
fn reflect_vec(z: &[f64], x: &mut [f64]) {
    let zz = dot(z, z);
    if zz == 0.0 {
        return;
    }
    let f = 2.0 * dot(z, x) / zz;
    for (xi, zi) in x.iter_mut().zip(z) {
        *xi -= f * zi;
    }
}

fn column_floor(x0: &Matrix) -> f64 {
    1e-14 * x0.max_abs()
}

/// Householder coordinates for `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HouseholderFrames {
    pub variant: Variant,
    pub n: usize,
    pub p: usize,
    /// Per-column ODE state: `[u; σ‖x‖]`, `v`, or `ŵ`.
    pub cols: Vec<Vec<f64>>,
    /// `σᵢ = ±1`.
    pub sigma: Vec<f64>,
}

impl HouseholderFrames {
    /// Triangularizes `x0` with textbook signs.
    pub fn from_matrix(x0: &Matrix, variant: Variant) -> Result<Self> {
        let (n, p) = x0.shape();
        let floor = column_floor(x0);
        let mut work: Vec<Vec<f64>> = (0..p).map(|j| x0.column(j)).collect();
        let mut cols = Vec::with_capacity(p);
        let mut sigma = Vec::with_capacity(p);
        for i in 0..p {
            let x = work[i][i..].to_vec();
            let nx = norm2(&x);
            if !(nx > floor) {
                return Err(Error::ZeroColumn { column: i });
            }
            let (u, s) =
                householder_vector_from(&x).map_err(|_| Error::ZeroColumn { column: i })?;
            for col in work.iter_mut().skip(i + 1) {
                reflect_vec(&u, &mut col[i..]);
            }
            cols.push(encode_householder(variant, &u, s * nx, None));
            sigma.push(s);
        }
        Ok(HouseholderFrames {
            variant,
            n,
            p,
            cols,
            sigma,
        })
    }

    pub fn order(&self, i: usize) -> usize {
        self.n - i
    }

    pub fn reflector(&self, i: usize) -> Vec<f64> {
        reflector_from_state(self.variant, &self.cols[i], self.order(i))
    }

    /// Health predicate for column `i`.
    pub fn is_healthy(&self, i: usize) -> bool {
        let y = &self.cols[i];
        match self.variant {
            Variant::V => {
                let tail: f64 = y[1..].iter().map(|x| x * x).sum();
                y[0] * y[0] >= tail
            }
            Variant::U => {
                let m = self.order(i);
                // e₁ᵀx = e₁ᵀu + σ‖x‖
                self.sigma[i] * (y[0] + y[m]) < 0.0
            }
            Variant::W => 1.0 - y.iter().map(|x| x * x).sum::<f64>() >= 0.0,
        }
    }

    /// Rescales v-vectors back to unit length.
    pub fn normalize(&mut self) {
        if self.variant == Variant::V {
            for v in &mut self.cols {
                let nv = norm2(v);
                if nv > 0.0 {
                    v.iter_mut().for_each(|x| *x /= nv);
                }
            }
        }
    }

    /// Applies the factored `Q` to `[I_cols; 0]`.
    pub fn form_q(&self, cols: usize) -> Matrix {
        let cols = cols.min(self.p);
        let mut q = Matrix::zeros(self.n, cols);
        let reflectors: Vec<Vec<f64>> = (0..cols).map(|i| self.reflector(i)).collect();
        for k in 0..cols {
            let mut e = vec![0.0; self.n];
            e[k] = 1.0;
            for i in (0..=k).rev() {
                reflect_vec(&reflectors[i], &mut e[i..]);
            }
            q.set_column(k, &e);
        }
        q
    }

    /// Chart change for columns `start..p`, keeping columns before `start`.
    pub fn reimbed_from(&mut self, start: usize) -> Result<()> {
        if start >= self.p {
            return Ok(());
        }
        let mut k = Matrix::identity(self.order(start));
        for i in start..self.p {
            let m = self.order(i);
            let old = self.reflector(i);
            // y = σ_old K Q_old e₁
            let zz = dot(&old, &old);
            let mut q_e1: Vec<f64> = old.iter().map(|z| -2.0 * z * old[0] / zz).collect();
            q_e1[0] += 1.0;
            let mut y = k.matvec(&q_e1);
            y.iter_mut().for_each(|x| *x *= self.sigma[i]);
            let ny = norm2(&y);
            if !(ny > 1e-8) {
                return Err(Error::DegenerateReflector { column: i });
            }
            let (u, s_new) = householder_vector_from(&y)
                .map_err(|_| Error::DegenerateReflector { column: i })?;
            if i + 1 < self.p {
                let mut next = k;
                reflect_cols(&old, &mut next);
                reflect_rows(&u, &mut next);
                k = next.trailing();
            } else {
                k = Matrix::zeros(0, 0);
            }
            let old_state = &self.cols[i];
            let new_state = match self.variant {
                Variant::U => {
                    let nx = old_state[m].abs();
                    let scale = nx / ny;
                    let scaled: Vec<f64> = u.iter().map(|x| x * scale).collect();
                    encode_householder(Variant::U, &scaled, s_new * nx, None)
                }
                Variant::V => encode_householder(Variant::V, &u, 0.0, Some(old_state[0])),
                Variant::W => encode_householder(Variant::W, &u, 0.0, None),
            };
            self.cols[i] = new_state;
            self.sigma[i] = s_new;
        }
        Ok(())
    }
}

/// Encodes a textbook reflector vector `u` as the column state of `variant`.
/// `rho` is `σ‖x‖` (u-variables only); `v_sign_ref` fixes the sign of `v`.
fn encode_householder(variant: Variant, u: &[f64], rho: f64, v_sign_ref: Option<f64>) -> Vec<f64> {
    match variant {
        Variant::U => {
            let mut s = u.to_vec();
            s.push(rho);
            s
        }
        Variant::V => {
            let nu = norm2(u);
            let mut flip = 1.0;
            if let Some(r) = v_sign_ref {
                if (r < 0.0) != (u[0] < 0.0) {
                    flip = -1.0;
                }
            }
            u.iter().map(|x| flip * x / nu).collect()
        }
        Variant::W => u[1..].iter().map(|x| x / u[0]).collect(),
    }
}

/// Rotation plane ordering `[0, l, 1, …, l−1, l+1, …, m−1]`.
pub fn index_array(m: usize, l: usize) -> Vec<usize> {
    let mut pi = Vec::with_capacity(m);
    pi.push(0);
    if m > 1 {
        pi.push(l);
        pi.extend((1..m).filter(|&j| j != l));
    }
    pi
}

/// Position of the largest entry of `x[1..]` in absolute value, smallest
/// index on ties. Returns 1 for vectors of length 1.
pub fn largest_trailing(x: &[f64]) -> usize {
    let mut l = 1;
    let mut best = f64::NEG_INFINITY;
    for (j, v) in x.iter().enumerate().skip(1) {
        if v.abs() > best {
            best = v.abs();
            l = j;
        }
    }
    l
}

/// Angles that rotate `x` onto `‖x‖e₁` in the order `pi`, keeping every
/// partially rotated vector's first entry nonnegative.
pub fn angles_for(x: &[f64], pi: &[usize]) -> Vec<f64> {
    let mut x = x.to_vec();
    let mut angles = Vec::with_capacity(pi.len().saturating_sub(1));
    for &j in &pi[1..] {
        let theta = x[j].atan2(x[0]);
        let (s, c) = theta.sin_cos();
        rotate_vec(c, s, j, &mut x, true);
        angles.push(theta);
    }
    angles
}

/// Givens coordinates for `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct GivensFrames {
    pub n: usize,
    pub p: usize,
    /// `angles[i][k]` rotates in the plane `(0, order[i][k + 1])`.
    pub angles: Vec<Vec<f64>>,
    pub order: Vec<Vec<usize>>,
}

impl GivensFrames {
    pub fn from_matrix(x0: &Matrix) -> Result<Self> {
        let (n, p) = x0.shape();
        let floor = column_floor(x0);
        let mut work: Vec<Vec<f64>> = (0..p).map(|j| x0.column(j)).collect();
        let mut angles = Vec::with_capacity(p);
        let mut order = Vec::with_capacity(p);
        for i in 0..p {
            let x = &work[i][i..];
            if !(norm2(x) > floor) {
                return Err(Error::ZeroColumn { column: i });
            }
            let pi = index_array(x.len(), largest_trailing(x));
            let th = angles_for(x, &pi);
            for col in work.iter_mut().skip(i) {
                apply_givens_t(&th, &pi, &mut col[i..]);
            }
            angles.push(th);
            order.push(pi);
        }
        Ok(GivensFrames {
            n,
            p,
            angles,
            order,
        })
    }

    /// Frames with the given orderings and all-zero angles.
    pub fn identity(n: usize, p: usize) -> Self {
        GivensFrames {
            n,
            p,
            angles: (0..p).map(|i| vec![0.0; n - i - 1]).collect(),
            order: (0..p).map(|i| (0..n - i).collect()).collect(),
        }
    }

    pub fn order_of(&self, i: usize) -> usize {
        self.n - i
    }

    /// Product-of-cosines health predicate for column `i`.
    pub fn is_healthy(&self, i: usize) -> bool {
        cosines_healthy(&self.angles[i])
    }

    /// Wraps every angle to `[−π, π]`.
    pub fn wrap_angles(&mut self) {
        for th in self.angles.iter_mut().flatten() {
            let (s, c) = th.sin_cos();
            *th = s.atan2(c);
        }
    }

    pub fn form_q(&self, cols: usize) -> Matrix {
        let cols = cols.min(self.p);
        let mut q = Matrix::zeros(self.n, cols);
        for k in 0..cols {
            let mut e = vec![0.0; self.n];
            e[k] = 1.0;
            for i in (0..=k).rev() {
                apply_givens(&self.angles[i], &self.order[i], &mut e[i..]);
            }
            q.set_column(k, &e);
        }
        q
    }

    /// Chart change for columns `start..p`, keeping columns before `start`.
    pub fn reimbed_from(&mut self, start: usize) -> Result<()> {
        if start >= self.p {
            return Ok(());
        }
        let mut k = Matrix::identity(self.order_of(start));
        for i in start..self.p {
            let m = self.order_of(i);
            let mut g_e1 = vec![0.0; m];
            g_e1[0] = 1.0;
            apply_givens(&self.angles[i], &self.order[i], &mut g_e1);
            let probe = k.matvec(&g_e1);
            let norm = norm2(&probe);
            if (norm - 1.0).abs() > 1e-8 {
                return Err(Error::DegenerateProbe { column: i, norm });
            }
            let pi = index_array(m, largest_trailing(&probe));
            let th = angles_for(&probe, &pi);
            if i + 1 < self.p {
                // K' = trailing(G_newᵀ K G_old)
                let mut next = k;
                for (a, &j) in self.angles[i].iter().zip(&self.order[i][1..]) {
                    let (s, c) = a.sin_cos();
                    rotate_cols(c, s, j, &mut next, false);
                }
                for (a, &j) in th.iter().zip(&pi[1..]) {
                    let (s, c) = a.sin_cos();
                    rotate_rows(c, s, j, &mut next, true);
                }
                k = next.trailing();
            } else {
                k = Matrix::zeros(0, 0);
            }
            self.angles[i] = th;
            self.order[i] = pi;
        }
        Ok(())
    }
}

/// `∏_{b=1}^{k} cos²θ_b ≥ sin²θ_k` for every `k ≥ 1`, angles in application order.
pub fn cosines_healthy(angles: &[f64]) -> bool {
    let mut prod = 1.0;
    for th in angles.iter().skip(1) {
        let (s, c) = th.sin_cos();
        prod *= c * c;
        if prod < s * s {
            return false;
        }
    }
    true
}

/// `x ← G x` with `G = R_{π(1)} ⋯ R_{π(m−1)}`.
pub fn apply_givens(angles: &[f64], pi: &[usize], x: &mut [f64]) {
    for (th, &j) in angles.iter().zip(&pi[1..]).rev() {
        let (s, c) = th.sin_cos();
        rotate_vec(c, s, j, x, false);
    }
}

/// `x ← Gᵀ x`.
pub fn apply_givens_t(angles: &[f64], pi: &[usize], x: &mut [f64]) {
    for (th, &j) in angles.iter().zip(&pi[1..]) {
        let (s, c) = th.sin_cos();
        rotate_vec(c, s, j, x, true);
    }
}

/// Coordinate system used to represent `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coordinates {
    Householder(Variant),
    Givens,
}

/// Either kind of factored coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Frames {
    Householder(HouseholderFrames),
    Givens(GivensFrames),
}

impl Frames {
    pub fn init(x0: &Matrix, coords: Coordinates) -> Result<Self> {
        Ok(match coords {
            Coordinates::Householder(v) => {
                Frames::Householder(HouseholderFrames::from_matrix(x0, v)?)
            }
            Coordinates::Givens => Frames::Givens(GivensFrames::from_matrix(x0)?),
        })
    }

    pub fn coordinates(&self) -> Coordinates {
        match self {
            Frames::Householder(h) => Coordinates::Householder(h.variant),
            Frames::Givens(_) => Coordinates::Givens,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Frames::Householder(h) => h.n,
            Frames::Givens(g) => g.n,
        }
    }

    pub fn p(&self) -> usize {
        match self {
            Frames::Householder(h) => h.p,
            Frames::Givens(g) => g.p,
        }
    }

    /// ODE state of column `i`.
    pub fn state(&self, i: usize) -> &[f64] {
        match self {
            Frames::Householder(h) => &h.cols[i],
            Frames::Givens(g) => &g.angles[i],
        }
    }

    pub fn set_state(&mut self, i: usize, y: Vec<f64>) {
        match self {
            Frames::Householder(h) => h.cols[i] = y,
            Frames::Givens(g) => g.angles[i] = y,
        }
    }

    /// Plane ordering of column `i` for Givens frames.
    pub fn plane_order(&self, i: usize) -> Option<&[usize]> {
        match self {
            Frames::Householder(_) => None,
            Frames::Givens(g) => Some(&g.order[i]),
        }
    }

    pub fn health(&self) -> Vec<bool> {
        (0..self.p())
            .map(|i| match self {
                Frames::Householder(h) => h.is_healthy(i),
                Frames::Givens(g) => g.is_healthy(i),
            })
            .collect()
    }

    pub fn first_unhealthy(&self) -> Option<usize> {
        self.health().iter().position(|ok| !ok)
    }

    pub fn reimbed_from(&mut self, start: usize) -> Result<()> {
        match self {
            Frames::Householder(h) => h.reimbed_from(start),
            Frames::Givens(g) => g.reimbed_from(start),
        }
    }

    /// Full chart change of every column.
    pub fn reimbed(&self) -> Result<Frames> {
        let mut out = self.clone();
        out.reimbed_from(0)?;
        Ok(out)
    }

    /// Post-step normalization: unit v-vectors, angles wrapped to `[−π, π]`.
    pub fn normalize(&mut self) {
        match self {
            Frames::Householder(h) => h.normalize(),
            Frames::Givens(g) => g.wrap_angles(),
        }
    }

    pub fn form_q(&self, cols: usize) -> Matrix {
        match self {
            Frames::Householder(h) => h.form_q(cols),
            Frames::Givens(g) => g.form_q(cols),
        }
    }

    pub fn q(&self) -> Matrix {
        self.form_q(self.p())
    }
}

/// Textbook triangularization of `x0` with `P_i x_i = σᵢ‖xᵢ‖e₁`, returning the signs.
pub fn textbook_sigmas(x0: &Matrix) -> Result<Vec<f64>> {
    HouseholderFrames::from_matrix(x0, Variant::U).map(|f| f.sigma)
}
