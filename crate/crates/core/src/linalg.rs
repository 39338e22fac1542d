//! Dense complex linear algebra used throughout the crate.
//!
//! Everything is built on `nalgebra::DMatrix<Complex64>`. The state dimensions
//! handled here are small (n at most a few dozen), so all routines are dense
//! and favour clarity over blocking.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, VesselError};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a matrix from row slices.
pub fn from_rows(rows: &[Vec<C64>]) -> CMat {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    CMat::from_fn(nr, nc, |i, j| rows[i][j])
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Frobenius norm.
#[inline]
pub fn fro(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(m: &CMat) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    fro(&(m - m.adjoint()))
}

/// Returns (m + m*)/2.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Column-stacking vectorisation. nalgebra storage is column-major, so this is a copy.
pub fn vec_cols(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvec(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_column_slice(rows, cols, v.as_slice())
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Integer matrix power by repeated squaring.
pub fn powi(a: &CMat, k: usize) -> CMat {
    let mut result = eye(a.nrows());
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        e >>= 1;
        if e > 0 {
            base = &base * &base;
        }
    }
    result
}

pub fn inverse(m: &CMat, what: &str) -> Result<CMat> {
    let scale = max_abs(m);
    if scale == 0.0 || !scale.is_finite() {
        return Err(VesselError::Singular(what.to_string()));
    }
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| VesselError::Singular(what.to_string()))?;
    if inv.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(VesselError::Singular(what.to_string()));
    }
    Ok(inv)
}

/// Inverse through the symmetric diagonal scaling `D m D`, `D_j = max_k |m_jk|^(-1/2)`.
/// Keeps entrywise accuracy when the rows of `m` differ widely in magnitude.
pub fn inverse_equilibrated(m: &CMat, what: &str) -> Result<CMat> {
    let d: Vec<f64> = (0..m.nrows())
        .map(|j| {
            let r = m.row(j).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if r > 0.0 && r.is_finite() { 1.0 / r.sqrt() } else { 1.0 }
        })
        .collect();
    let scaled = CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (d[i] * d[j]));
    let inv = inverse(&scaled, what)?;
    Ok(CMat::from_fn(m.nrows(), m.ncols(), |i, j| inv[(i, j)] * (d[i] * d[j])))
}

pub fn determinant(m: &CMat) -> C64 {
    m.clone().lu().determinant()
}

/// Frobenius-norm condition estimate `‖M‖_F ‖M⁻¹‖_F / n`, which is at least 1 for
/// any invertible matrix and agrees with the 2-norm condition number up to a factor n.
pub fn condition(m: &CMat) -> f64 {
    match inverse(m, "condition") {
        Ok(inv) => fro(m) * fro(&inv) / m.nrows().max(1) as f64,
        Err(_) => f64::INFINITY,
    }
}

// Padé coefficients and switching thresholds from Higham's scaling-and-squaring
// analysis (backward error bounded by the unit roundoff in double precision).
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
];
const THETA13: f64 = 5.371920351148152;

/// Norms beyond this overflow double precision after exponentiation.
pub const EXPM_NORM_LIMIT: f64 = 600.0;

/// Matrix exponential by scaling and squaring with diagonal Padé approximants.
pub fn expm(a: &CMat) -> Result<CMat> {
    let n = a.nrows();
    let nrm = norm1(a);
    if !nrm.is_finite() || nrm > EXPM_NORM_LIMIT {
        return Err(VesselError::ExpRange { norm: nrm });
    }
    if nrm == 0.0 {
        return Ok(eye(n));
    }
    let id = eye(n);
    for &(m, theta) in &THETA {
        if nrm <= theta {
            let coeffs: &[f64] = match m {
                3 => &PADE3,
                5 => &PADE5,
                7 => &PADE7,
                _ => &PADE9,
            };
            let a2 = a * a;
            let mut even = id.scale(coeffs[0]);
            let mut odd = id.scale(coeffs[1]);
            let mut p = id.clone();
            for k in 1..=m / 2 {
                p = &p * &a2;
                even += p.scale(coeffs[2 * k]);
                odd += p.scale(coeffs[2 * k + 1]);
            }
            let u = a * odd;
            return pade_solve(&even, &u);
        }
    }
    let s = (nrm / THETA13).log2().ceil().max(0.0) as i32;
    let a = a.scale(0.5f64.powi(s));
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (a6.scale(b[13]) + a4.scale(b[11]) + a2.scale(b[9]))
        + a6.scale(b[7])
        + a4.scale(b[5])
        + a2.scale(b[3])
        + id.scale(b[1]);
    let u = &a * u_inner;
    let v = &a6 * (a6.scale(b[12]) + a4.scale(b[10]) + a2.scale(b[8]))
        + a6.scale(b[6])
        + a4.scale(b[4])
        + a2.scale(b[2])
        + id.scale(b[0]);
    let mut r = pade_solve(&v, &u)?;
    for _ in 0..s {
        r = &r * &r;
    }
    Ok(r)
}

fn pade_solve(v: &CMat, u: &CMat) -> Result<CMat> {
    let den = v - u;
    let num = v + u;
    den.lu()
        .solve(&num)
        .ok_or_else(|| VesselError::Singular("Padé denominator".into()))
}

/// Diagonalisation `A = V diag(values) V⁻¹` of a diagonalizable matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<C64>,
    pub vectors: CMat,
    pub inverse: CMat,
    pub cond: f64,
}

/// Eigenbases with a condition estimate above this are rejected.
pub const EIGEN_COND_LIMIT: f64 = 1e10;

/// Eigen-decomposition via complex Schur form and triangular back-substitution.
///
/// Exactly diagonal inputs skip the Schur step so that their eigenvalues are
/// reproduced bit-for-bit.
pub fn eigen(a: &CMat) -> Result<Eigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(VesselError::Dimension("eigen: matrix not square".into()));
    }
    let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == C64::new(0.0, 0.0)));
    if is_diag {
        return Ok(Eigen {
            values: (0..n).map(|i| a[(i, i)]).collect(),
            vectors: eye(n),
            inverse: eye(n),
            cond: 1.0,
        });
    }
    let (q, t) = nalgebra::linalg::Schur::new(a.clone()).unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let eps = 1e-13 * scale;
    let mut w = zeros(n, n);
    for k in 0..n {
        w[(k, k)] = re(1.0);
        for i in (0..k).rev() {
            let mut acc = C64::new(0.0, 0.0);
            for l in i + 1..=k {
                acc += t[(i, l)] * w[(l, k)];
            }
            let gap = t[(i, i)] - t[(k, k)];
            if gap.norm() <= eps {
                if acc.norm() <= eps {
                    w[(i, k)] = C64::new(0.0, 0.0);
                    continue;
                }
                return Err(VesselError::Conditioning {
                    cond: f64::INFINITY,
                });
            }
            w[(i, k)] = -acc / gap;
        }
        let nrm = w.column(k).norm();
        w.column_mut(k).unscale_mut(nrm);
    }
    let vectors = &q * w;
    let inverse = inverse(&vectors, "eigenbasis")?;
    let cond = fro(&vectors) * fro(&inverse) / n as f64;
    if !cond.is_finite() || cond > EIGEN_COND_LIMIT {
        return Err(VesselError::Conditioning { cond });
    }
    Ok(Eigen {
        values: (0..n).map(|i| t[(i, i)]).collect(),
        vectors,
        inverse,
        cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_exp(a: &CMat) -> CMat {
        let n = a.nrows();
        let mut term = eye(n);
        let mut sum = eye(n);
        for k in 1..80 {
            term = (&term * a).unscale(k as f64);
            sum += &term;
        }
        sum
    }

    fn sample(n: usize, s: f64) -> CMat {
        CMat::from_fn(n, n, |i, j| {
            c(
                s * ((i * 7 + j * 3) % 5) as f64 / 5.0 - s * 0.3,
                s * ((i + 2 * j) % 3) as f64 / 4.0,
            )
        })
    }

    #[test]
    fn expm_matches_taylor_across_pade_degrees() {
        for &s in &[1e-3, 0.05, 0.3, 0.8, 1.5, 4.0] {
            let a = sample(4, s);
            let e = expm(&a).unwrap();
            let t = taylor_exp(&a);
            assert!(fro(&(&e - &t)) <= 1e-13 * fro(&t), "s = {s}");
        }
    }

    #[test]
    fn expm_scaled_branch_on_diagonal() {
        let a = CMat::from_diagonal(&CVec::from_vec(vec![c(-3.0, 2.0), c(5.0, -1.0), re(0.5)]));
        let e = expm(&a).unwrap();
        for i in 0..3 {
            let want = a[(i, i)].exp();
            assert!((e[(i, i)] - want).norm() <= 1e-13 * want.norm());
        }
    }

    #[test]
    fn expm_of_zero_is_identity_and_guard_trips() {
        assert_eq!(expm(&zeros(3, 3)).unwrap(), eye(3));
        let big = eye(2).scale(1e3);
        assert!(matches!(expm(&big), Err(VesselError::ExpRange { .. })));
    }

    #[test]
    fn eigen_reconstructs_nonnormal_matrix() {
        let mut a = sample(5, 1.0);
        a[(4, 4)] += re(3.0);
        let e = eigen(&a).unwrap();
        let d = CMat::from_diagonal(&CVec::from_vec(e.values.clone()));
        let back = &e.vectors * d * &e.inverse;
        assert!(fro(&(back - &a)) <= 1e-12 * fro(&a));
    }

    #[test]
    fn vec_unvec_roundtrip_and_kron_identity() {
        let a = sample(3, 1.0);
        let b = CMat::from_fn(3, 2, |i, j| c(i as f64, j as f64));
        let cm = CMat::from_fn(2, 2, |i, j| c(1.0 + i as f64, -(j as f64)));
        // vec(A B C) = (Cᵀ ⊗ A) vec(B)
        let lhs = vec_cols(&(&a * &b * &cm));
        let rhs = kron(&cm.transpose(), &a) * vec_cols(&b);
        assert!((lhs - rhs).norm() < 1e-12);
        assert_eq!(unvec(&vec_cols(&b), 3, 2), b);
    }
}
