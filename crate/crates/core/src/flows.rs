//! Right-hand sides of the coordinate ODEs and the progressive block updates.
//!
//! Column `i` is driven by a working block `B` of order `m = n − i`: the
//! trailing part of `Ã_{i−1}`, where `Ã_j = P_j Ã_{j−1} P_j − P_j Ṗ_j` (or the
//! analogous rotator form) and `Ã_{−1} = A`. All functions here are pure and
//! report column-local failures against column 0; callers reattribute them.

use crate::error::{Error, Result};
use crate::frames::{
    apply_givens, reflector_from_state, reflector_rate_from_state, state_len, Frames,
};
use crate::linalg::{dot, rotate_cols, rotate_rows, rotate_vec, Matrix, Variant};

const RHO_FLOOR: f64 = 1e-30;
const HAZARD_FLOOR: f64 = 1e-8;

fn check_len(found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_square(b: &Matrix, m: usize) -> Result<()> {
    check_len(b.rows(), m)?;
    check_len(b.cols(), m)
}

fn quad(b: &Matrix, x: &[f64]) -> f64 {
    dot(x, &b.matvec(x))
}

/// `d/dt [u; ρ]` with `ρ = σ‖x‖` and `x = u + ρe₁`.
pub fn rhs_u(state: &[f64], b: &Matrix) -> Result<Vec<f64>> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(state.len(), m + 1)?;
    let u = &state[..m];
    let rho = state[m];
    if !(rho.abs() >= RHO_FLOOR) {
        return Err(Error::DivisionHazard {
            column: 0,
            value: rho,
        });
    }
    let bu = b.matvec(u);
    // e₁ᵀ A_s u
    let s1 = 0.5 * (bu[0] + (0..m).map(|j| b[(j, 0)] * u[j]).sum::<f64>());
    let utbu = dot(u, &bu);
    let b00 = b[(0, 0)];
    let mut out = Vec::with_capacity(m + 1);
    for k in 0..m {
        out.push(bu[k] + rho * b[(k, 0)]);
    }
    out[0] += -2.0 * s1 - rho * b00 - utbu / rho;
    out.push(2.0 * s1 + b00 * rho + utbu / rho);
    Ok(out)
}

/// `v̇` for a unit reflector vector `v` with nonzero leading entry.
pub fn rhs_v(v: &[f64], b: &Matrix) -> Result<Vec<f64>> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(v.len(), m)?;
    let v1 = v[0];
    if !(v1.abs() >= HAZARD_FLOOR) {
        return Err(Error::DivisionHazard {
            column: 0,
            value: v1,
        });
    }
    let vh = &v[1..];
    let a11 = b[(0, 0)];
    let a1: Vec<f64> = (1..m).map(|j| b[(j, 0)]).collect();
    // first row of (Bᵀ − B)/2; this sign is what keeps P B P − P Ṗ upper triangular
    let a1a: Vec<f64> = (1..m).map(|j| 0.5 * (b[(j, 0)] - b[(0, j)])).collect();
    let a1s: Vec<f64> = (1..m).map(|j| 0.5 * (b[(j, 0)] + b[(0, j)])).collect();
    // Â v̂ and Â_s v̂
    let mut ah_v = vec![0.0; m - 1];
    let mut ahs_v = vec![0.0; m - 1];
    for r in 1..m {
        let mut s = 0.0;
        let mut ss = 0.0;
        for c in 1..m {
            s += b[(r, c)] * vh[c - 1];
            ss += 0.5 * (b[(r, c)] + b[(c, r)]) * vh[c - 1];
        }
        ah_v[r - 1] = s;
        ahs_v[r - 1] = ss;
    }
    let g = 2.0 * v1 * v1 - 1.0;
    let bv: Vec<f64> = (0..m - 1).map(|k| 0.5 * g * a1[k] + ah_v[k] * v1).collect();
    let inner: Vec<f64> = (0..m - 1).map(|k| a1s[k] * v1 + ahs_v[k]).collect();
    let alpha = (a11 * v1 + dot(&a1s, vh)) * g + 2.0 * v1 * dot(vh, &inner);
    let cf = -dot(&a1a, vh) + alpha;
    let c: Vec<f64> = vh.iter().map(|x| cf * x).collect();
    let s: Vec<f64> = (0..m - 1)
        .map(|k| g / (2.0 * v1) * a1[k] + ah_v[k])
        .collect();
    let vv = dot(vh, vh);
    let sv = dot(&s, vh);
    let mut out = Vec::with_capacity(m);
    out.push((0..m - 1).map(|k| (c[k] - bv[k]) * vh[k]).sum());
    for k in 0..m - 1 {
        out.push((bv[k] - c[k]) * v1 + s[k] * vv - vh[k] * sv);
    }
    Ok(out)
}

/// `dŵ/dt` for `w = [1; ŵ]`.
pub fn rhs_w(wh: &[f64], b: &Matrix) -> Result<Vec<f64>> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(wh.len() + 1, m)?;
    let mut w = Vec::with_capacity(m);
    w.push(1.0);
    w.extend_from_slice(wh);
    let ww = dot(&w, &w);
    let wbw = quad(b, &w);
    let a1wh: f64 = (1..m).map(|j| b[(j, 0)] * wh[j - 1]).sum();
    let coef = b[(0, 0)] + a1wh - 2.0 * wbw / ww;
    let half = 1.0 - 0.5 * ww;
    let out = (1..m)
        .map(|r| {
            let mut ah = 0.0;
            for c in 1..m {
                ah += b[(r, c)] * wh[c - 1];
            }
            coef * wh[r - 1] + half * b[(r, 0)] + ah
        })
        .collect();
    Ok(out)
}

/// Angle rates for a Givens column with plane ordering `pi`.
///
/// `α = Gᵀ B G e₁` is formed by rotating vectors; the rates then solve the
/// diagonal system `θ̇_k ∏_{l>k} cos θ_l = α_{π(k+1)}`.
pub fn rhs_theta(angles: &[f64], pi: &[usize], b: &Matrix) -> Result<Vec<f64>> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(pi.len(), m)?;
    check_len(angles.len() + 1, m)?;
    let mut g = vec![0.0; m];
    g[0] = 1.0;
    apply_givens(angles, pi, &mut g);
    let mut alpha = b.matvec(&g);
    for (th, &j) in angles.iter().zip(&pi[1..]) {
        let (s, c) = th.sin_cos();
        rotate_vec(c, s, j, &mut alpha, true);
    }
    let mut out = vec![0.0; angles.len()];
    let mut prod: f64 = 1.0;
    for k in (0..angles.len()).rev() {
        if !(prod.abs() >= HAZARD_FLOOR) {
            return Err(Error::DivisionHazard {
                column: 0,
                value: prod,
            });
        }
        out[k] = alpha[pi[k + 1]] / prod;
        prod *= angles[k].cos();
    }
    Ok(out)
}

/// `P B P − P Ṗ` for `P = I − 2 z zᵀ / zᵀz`, given `z` and `ż`.
///
/// Returns the full `m × m` block; its `(0, 0)` entry is the diagonal entry of
/// `Ã` for this column and its trailing block drives the next column.
pub fn update_a_householder(b: &Matrix, z: &[f64], zdot: &[f64]) -> Result<Matrix> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(z.len(), m)?;
    check_len(zdot.len(), m)?;
    let nu = dot(z, z);
    if !(nu > 0.0) {
        return Err(Error::DegenerateReflector { column: 0 });
    }
    let bz = b.matvec(z);
    let ztb = b.vecmat(z);
    let zbz = dot(z, &bz);
    let f = 2.0 / nu;
    let g = 4.0 * zbz / (nu * nu);
    let mut out = b.clone();
    for r in 0..m {
        let row = out.row_mut(r);
        for c in 0..m {
            row[c] += -f * (z[r] * ztb[c] + bz[r] * z[c]) + g * z[r] * z[c]
                - f * (z[r] * zdot[c] - zdot[r] * z[c]);
        }
    }
    Ok(out)
}

/// `Gᵀ B G − Gᵀ Ġ` for `G = R_{π(1)} ⋯ R_{π(m−1)}`.
pub fn update_a_givens(b: &Matrix, angles: &[f64], rates: &[f64], pi: &[usize]) -> Result<Matrix> {
    let m = b.rows();
    check_square(b, m)?;
    check_len(pi.len(), m)?;
    check_len(angles.len() + 1, m)?;
    check_len(rates.len(), angles.len())?;
    let mut out = b.clone();
    let cs: Vec<(f64, f64)> = angles.iter().map(|t| t.sin_cos()).collect();
    for (&(s, c), &j) in cs.iter().zip(&pi[1..]) {
        rotate_cols(c, s, j, &mut out, false);
    }
    for (&(s, c), &j) in cs.iter().zip(&pi[1..]) {
        rotate_rows(c, s, j, &mut out, true);
    }
    // Gᵀ Ġ = Σ_k θ̇_k (e_j b_kᵀ − b_k e_jᵀ), b_k = (R_{k+1} ⋯ R_last)ᵀ e₁
    let mut bk = vec![0.0; m];
    for k in 0..angles.len() {
        bk.iter_mut().for_each(|x| *x = 0.0);
        bk[0] = 1.0;
        for l in k + 1..angles.len() {
            let (s, c) = cs[l];
            rotate_vec(c, s, pi[l + 1], &mut bk, true);
        }
        let j = pi[k + 1];
        let r = rates[k];
        for col in 0..m {
            out[(j, col)] -= r * bk[col];
        }
        for row in 0..m {
            out[(row, j)] += r * bk[row];
        }
    }
    Ok(out)
}

/// Baseline flow `A Q − Q (QᵀAQ − S)` with `S` the skew completion of the
/// strictly lower part of `QᵀAQ`.
pub fn rhs_qrflow(q: &Matrix, a: &Matrix) -> Matrix {
    let aq = a.matmul(q);
    let mut k = q.transpose().matmul(&aq);
    let p = k.rows();
    // M − S: upper part becomes M_ij + M_ji, lower part vanishes
    for i in 0..p {
        for j in 0..p {
            if i > j {
                k[(i, j)] = 0.0;
            } else if i < j {
                k[(i, j)] += k[(j, i)];
            }
        }
    }
    aq.sub(&q.matmul(&k))
}

/// How a single column is parametrized.
#[derive(Debug, Clone, Copy)]
pub enum Chart<'a> {
    Householder(Variant),
    Givens(&'a [usize]),
}

impl Chart<'_> {
    pub fn of(frames: &Frames, i: usize) -> Chart<'_> {
        match frames {
            Frames::Householder(h) => Chart::Householder(h.variant),
            Frames::Givens(g) => Chart::Givens(&g.order[i]),
        }
    }

    pub fn state_len(&self, m: usize) -> usize {
        match self {
            Chart::Householder(v) => state_len(*v, m),
            Chart::Givens(_) => m - 1,
        }
    }
}

/// Coordinate rate of one column driven by the working block `b`.
pub fn column_rhs(chart: Chart<'_>, state: &[f64], b: &Matrix) -> Result<Vec<f64>> {
    match chart {
        Chart::Householder(Variant::U) => rhs_u(state, b),
        Chart::Householder(Variant::V) => rhs_v(state, b),
        Chart::Householder(Variant::W) => rhs_w(state, b),
        Chart::Givens(pi) => rhs_theta(state, pi, b),
    }
}

/// Updated block for one column given its coordinates and their rate.
pub fn column_update(chart: Chart<'_>, state: &[f64], rate: &[f64], b: &Matrix) -> Result<Matrix> {
    let m = b.rows();
    match chart {
        Chart::Householder(v) => {
            check_len(state.len(), state_len(v, m))?;
            check_len(rate.len(), state_len(v, m))?;
            let z = reflector_from_state(v, state, m);
            let zd = reflector_rate_from_state(v, rate, m);
            update_a_householder(b, &z, &zd)
        }
        Chart::Givens(pi) => update_a_givens(b, state, rate, pi),
    }
}

/// Exact coordinate rates of every column and the diagonal of `Ã` for a
/// constant-in-time snapshot `A`.
pub fn column_rates_and_diag(frames: &Frames, a: &Matrix) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    check_square(a, frames.n())?;
    let mut block = a.clone();
    let mut rates = Vec::with_capacity(frames.p());
    let mut diag = Vec::with_capacity(frames.p());
    for i in 0..frames.p() {
        let chart = Chart::of(frames, i);
        let state = frames.state(i);
        let rate = column_rhs(chart, state, &block).map_err(|e| e.in_column(i))?;
        let next = column_update(chart, state, &rate, &block).map_err(|e| e.in_column(i))?;
        diag.push(next[(0, 0)]);
        block = next.trailing();
        rates.push(rate);
    }
    Ok((rates, diag))
}

/// `diag(Ã)` from the progressively updated blocks, given per-column rates.
pub fn transformed_diag(frames: &Frames, a: &Matrix, rates: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_square(a, frames.n())?;
    check_len(rates.len(), frames.p())?;
    let mut block = a.clone();
    let mut diag = Vec::with_capacity(frames.p());
    for (i, rate) in rates.iter().enumerate() {
        let next = column_update(Chart::of(frames, i), frames.state(i), rate, &block)
            .map_err(|e| e.in_column(i))?;
        diag.push(next[(0, 0)]);
        block = next.trailing();
    }
    Ok(diag)
}
