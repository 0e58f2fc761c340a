//! Dense small-matrix kernels: symmetric eigendecomposition, matrix exponential
//! and logarithm, Cholesky factors, triangular-part operators and the Fréchet
//! derivatives of `log` and `exp` on symmetric matrices.
//!
//! Everything here is a pure function of its inputs. Symmetric results are
//! re-symmetrized as `(M + Mᵀ)/2` before they are returned.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GyroError, Result};

pub type Mat = DMatrix<f64>;

/// Relative eigenvalue floor used when admitting a matrix as SPD.
pub const SPD_EPS: f64 = 1e-10;

const SYM_TOL: f64 = 1e-12;

pub fn frob_inner(a: &Mat, b: &Mat) -> f64 {
    a.dot(b)
}

pub fn frob_norm(a: &Mat) -> f64 {
    a.norm()
}

/// `(M + Mᵀ)/2`
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn all_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

fn check_square(m: &Mat, what: &str) -> Result<()> {
    if m.nrows() == 0 || m.nrows() != m.ncols() {
        return Err(GyroError::DimMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

fn asymmetry(m: &Mat) -> f64 {
    (m - m.transpose()).norm()
}

/// An `n × n` symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Mat);

impl SymMatrix {
    /// Admits `m` if it is square, finite and symmetric up to `1e-12·(1+‖m‖_F)`.
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m, "symmetric matrix")?;
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        let asym = asymmetry(&m);
        if asym > SYM_TOL * (1.0 + m.norm()) {
            return Err(GyroError::NotSymmetric(format!("‖M − Mᵀ‖_F = {asym:e}")));
        }
        Ok(SymMatrix(symmetrize(&m)))
    }

    /// Wraps the symmetric part of `m`. For results of closed-form compositions.
    pub fn from_symmetric_part(m: &Mat) -> Self {
        SymMatrix(symmetrize(m))
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(Mat::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        SymMatrix(Mat::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Mat::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Mat::identity(n, n))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn scale(&self, t: f64) -> SymMatrix {
        SymMatrix(&self.0 * t)
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &other.0)
    }

    pub fn frob_inner(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }
}

/// An `n × n` symmetric positive definite matrix.
///
/// Results of spectral functions, congruences and Cholesky products remember
/// how they were built, so later spectral work and [`cholesky`] start from that
/// representation rather than from the rounded matrix. This matters for the
/// badly conditioned intermediates that nested gyro-operations produce.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    m: Mat,
    cache: Cache,
}

#[derive(Debug, Clone)]
enum Cache {
    None,
    /// Eigenvectors (columns) and logarithms of the eigenvalues, descending.
    Spectral { vectors: Mat, logs: DVector<f64> },
    /// Any `F` with `F·Fᵀ = P`.
    Factor(Mat),
    /// The Cholesky factor.
    Cholesky(Mat),
}

impl PartialEq for SpdMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
    }
}

impl SpdMatrix {
    /// Admits `m` as SPD: symmetric, finite, and with smallest eigenvalue above
    /// `SPD_EPS` times the largest. Never repairs its input.
    pub fn new(m: Mat) -> Result<Self> {
        let sym = SymMatrix::new(m)?;
        let eig = sym_eig(sym.as_mat())?;
        let lmax = eig.values[0];
        let lmin = eig.values[eig.values.len() - 1];
        if !(lmin > 0.0 && lmin > SPD_EPS * lmax) {
            return Err(GyroError::NotSpd(format!(
                "eigenvalue range [{lmin:e}, {lmax:e}] violates the relative floor {SPD_EPS:e}"
            )));
        }
        Ok(SpdMatrix::plain(sym.into_mat()))
    }

    fn plain(m: Mat) -> Self {
        SpdMatrix { m, cache: Cache::None }
    }

    /// `V·diag(exp(ℓ))·Vᵀ`, remembering `(V, ℓ)`.
    fn from_log_spectrum(vectors: Mat, logs: DVector<f64>) -> Result<Self> {
        if !all_finite(&vectors) || logs.iter().any(|x| !x.is_finite()) {
            return Err(GyroError::NonFinite);
        }
        let m = SymEig {
            vectors: vectors.clone(),
            values: logs.clone(),
        }
        .reconstruct_with(f64::exp);
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        Ok(SpdMatrix {
            m,
            cache: Cache::Spectral { vectors, logs },
        })
    }

    /// `F·Fᵀ`, remembering `F`.
    pub(crate) fn from_factor(f: Mat) -> Result<Self> {
        let m = &f * f.transpose();
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        Ok(SpdMatrix {
            m: symmetrize(&m),
            cache: Cache::Factor(f),
        })
    }

    /// Some `F` with `F·Fᵀ = P`.
    pub fn factor(&self) -> Mat {
        match &self.cache {
            Cache::Factor(f) | Cache::Cholesky(f) => f.clone(),
            _ => {
                let (vectors, logs) = self.log_eig();
                let mut f = vectors;
                for (j, l) in logs.iter().enumerate() {
                    f.column_mut(j).scale_mut((0.5 * l).exp());
                }
                f
            }
        }
    }

    /// Eigenvectors and the logarithms of the eigenvalues, descending.
    pub fn log_eig(&self) -> (Mat, DVector<f64>) {
        match &self.cache {
            Cache::Spectral { vectors, logs } => (vectors.clone(), logs.clone()),
            Cache::Factor(f) | Cache::Cholesky(f) => {
                let (u, sigma) = left_singular(f);
                (u, sigma.map(|s| 2.0 * s.ln()))
            }
            Cache::None => {
                let e = self.eig();
                let logs = e.values.map(f64::ln);
                (e.vectors, logs)
            }
        }
    }

    /// `V·diag(g(ℓ))·Vᵀ` over the log-eigenvalues `ℓ`.
    fn apply_log_fn(&self, g: impl Fn(f64) -> f64) -> Mat {
        let (vectors, logs) = self.log_eig();
        SymEig { vectors, values: logs }.reconstruct_with(g)
    }

    /// `P^t` as a matrix carrying its spectrum.
    fn log_scaled(&self, t: f64) -> Result<Self> {
        let (vectors, logs) = self.log_eig();
        Self::from_log_spectrum(vectors, logs * t)
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        Self::new(Mat::from_row_slice(n, n, data))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(Mat::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix::plain(Mat::identity(n, n))
    }

    /// Wraps the output of a closed-form operation. Finiteness is always checked;
    /// positive definiteness is re-checked (via a Cholesky attempt) only in
    /// debug builds.
    pub fn from_closed_form(m: &Mat) -> Result<Self> {
        if !all_finite(m) {
            return Err(GyroError::NonFinite);
        }
        let s = symmetrize(m);
        if cfg!(debug_assertions) {
            cholesky_raw(&s)?;
        }
        Ok(SpdMatrix::plain(s))
    }

    pub fn order(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.m
    }

    pub fn into_mat(self) -> Mat {
        self.m
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.m.clone())
    }

    pub fn eig(&self) -> SymEig {
        match &self.cache {
            Cache::None => sym_eig(&self.m).expect("admitted matrices are finite"),
            _ => {
                let (vectors, logs) = self.log_eig();
                SymEig {
                    vectors,
                    values: logs.map(f64::exp),
                }
            }
        }
    }

    /// `Q·diag(f(λ))·Qᵀ` for the eigendecomposition of `self`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Mat {
        self.eig().reconstruct_with(f)
    }
}

/// Eigendecomposition of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEig {
    pub vectors: Mat,
    pub values: DVector<f64>,
}

impl SymEig {
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Mat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            scaled.column_mut(j).scale_mut(fj);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }
}

/// Symmetric eigendecomposition `S = Q·diag(λ)·Qᵀ` with `λ` sorted descending.
pub fn sym_eig(s: &Mat) -> Result<SymEig> {
    check_square(s, "eigendecomposition input")?;
    if !all_finite(s) {
        return Err(GyroError::NonFinite);
    }
    let n = s.nrows();
    let eig = SymmetricEigen::new(symmetrize(s));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let mut vectors = Mat::zeros(n, n);
    let mut values = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = eig.eigenvalues[src];
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEig { vectors, values })
}

/// Matrix logarithm of an SPD matrix.
pub fn mat_log_spd(p: &SpdMatrix) -> SymMatrix {
    SymMatrix(p.apply_log_fn(|l| l))
}

/// Exponential of a symmetric matrix; always SPD.
pub fn sym_exp(s: &SymMatrix) -> Result<SpdMatrix> {
    let e = sym_eig(s.as_mat())?;
    SpdMatrix::from_log_spectrum(e.vectors, e.values)
}

/// `P^t` through the eigendecomposition.
pub fn spd_pow(p: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    p.log_scaled(t)
}

pub fn spd_sqrt(p: &SpdMatrix) -> SpdMatrix {
    p.log_scaled(0.5).expect("square root of an admitted matrix is finite")
}

pub fn spd_inv_sqrt(p: &SpdMatrix) -> SpdMatrix {
    p.log_scaled(-0.5).expect("inverse square root of an admitted matrix is finite")
}

/// Matrix inverse.
pub fn spd_inv(p: &SpdMatrix) -> SpdMatrix {
    p.log_scaled(-1.0).expect("inverse of an admitted matrix is finite")
}

/// Left singular vectors and singular values of a square `f`, descending.
fn left_singular(f: &Mat) -> (Mat, DVector<f64>) {
    let d = svd(f);
    (d.u, d.s)
}

/// Thin singular value decomposition `A = U·diag(s)·Vᵀ`, `s` descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × k` with `k = min(m, n)`; columns for zero singular values are zero.
    pub u: Mat,
    pub s: DVector<f64>,
    /// `n × k`
    pub v: Mat,
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD. Slow for large matrices but accurate to
/// high relative precision in the small singular values.
pub fn svd(a: &Mat) -> Svd {
    if a.nrows() < a.ncols() {
        let t = svd(&a.transpose());
        return Svd {
            u: t.v,
            s: t.s,
            v: t.u,
        };
    }
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = Mat::identity(n, n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = w.column(i).norm_squared();
                let beta = w.column(j).norm_squared();
                let gamma = w.column(i).dot(&w.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for m in [&mut w, &mut v] {
                    for r in 0..m.nrows() {
                        let (x, y) = (m[(r, i)], m[(r, j)]);
                        m[(r, i)] = c * x - sn * y;
                        m[(r, j)] = sn * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let mut u = Mat::zeros(a.nrows(), n);
    let mut vs = Mat::zeros(n, n);
    let mut s = DVector::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        s[dst] = norms[src];
        if norms[src] > 0.0 {
            u.set_column(dst, &(w.column(src) / norms[src]));
        }
        vs.set_column(dst, &v.column(src));
    }
    Svd { u, s, v: vs }
}

/// Singular values, descending.
pub fn singular_values(a: &Mat) -> DVector<f64> {
    svd(a).s
}

pub fn congruence(a: &Mat, x: &Mat) -> Mat {
    symmetrize(&(a * x * a.transpose()))
}

// Padé [13/13] coefficients for exp (Higham 2005).
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
const THETA13: f64 = 5.371920351148152;

fn one_norm(m: &Mat) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Scaling-and-squaring with a degree-13 Padé approximant.
pub fn expm_pade13(a: &Mat) -> Result<Mat> {
    check_square(a, "exponential input")?;
    if !all_finite(a) {
        return Err(GyroError::NonFinite);
    }
    let n = a.nrows();
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let id = Mat::identity(n, n);
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1];
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    let denom = &v - &u;
    let numer = &v + &u;
    let mut r = denom
        .lu()
        .solve(&numer)
        .ok_or(GyroError::NonFinite)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if !all_finite(&r) {
        return Err(GyroError::NonFinite);
    }
    Ok(r)
}

/// Matrix exponential. Symmetric inputs go through the eigendecomposition,
/// everything else (in particular skew-symmetric generators) through Padé-13.
pub fn mat_exp(m: &Mat) -> Result<Mat> {
    check_square(m, "exponential input")?;
    if !all_finite(m) {
        return Err(GyroError::NonFinite);
    }
    if asymmetry(m) <= 1e-14 * (1.0 + m.norm()) {
        let e = sym_eig(m)?.reconstruct_with(f64::exp);
        if !all_finite(&e) {
            return Err(GyroError::NonFinite);
        }
        return Ok(e);
    }
    expm_pade13(m)
}

/// Lower-triangular factor of an SPD matrix with a positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerTriPos(Mat);

impl LowerTriPos {
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m, "lower-triangular matrix")?;
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        let n = m.nrows();
        for i in 0..n {
            if m[(i, i)] <= 0.0 {
                return Err(GyroError::NotLowerTriPos(format!(
                    "diagonal entry {i} is {}",
                    m[(i, i)]
                )));
            }
            for j in (i + 1)..n {
                if m[(i, j)] != 0.0 {
                    return Err(GyroError::NotLowerTriPos(format!(
                        "entry ({i},{j}) above the diagonal is nonzero"
                    )));
                }
            }
        }
        Ok(LowerTriPos(m))
    }

    pub fn identity(n: usize) -> Self {
        LowerTriPos(Mat::identity(n, n))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// `L·Lᵀ`
    pub fn gram(&self) -> Result<SpdMatrix> {
        let g = &self.0 * self.0.transpose();
        if !all_finite(&g) {
            return Err(GyroError::NonFinite);
        }
        Ok(SpdMatrix {
            m: symmetrize(&g),
            cache: Cache::Cholesky(self.0.clone()),
        })
    }

    pub(crate) fn from_raw(m: Mat) -> Self {
        LowerTriPos(m)
    }
}

fn cholesky_raw(p: &Mat) -> Result<Mat> {
    let n = p.nrows();
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = p[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(GyroError::NotSpd(format!("Cholesky pivot {j} is {d:e}")));
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = p[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// The Cholesky factor `φ(P)`: lower triangular, positive diagonal, `L·Lᵀ = P`.
pub fn cholesky(p: &SpdMatrix) -> Result<LowerTriPos> {
    match &p.cache {
        Cache::Cholesky(l) => Ok(LowerTriPos(l.clone())),
        _ => cholesky_raw(p.as_mat()).map(LowerTriPos),
    }
}

/// `⌊M⌋`: entries strictly below the diagonal.
pub fn strict_lower(m: &Mat) -> Mat {
    let mut out = m.clone();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            out[(i, j)] = 0.0;
        }
    }
    out
}

/// `D(M)`: the diagonal part.
pub fn diag_part(m: &Mat) -> Mat {
    Mat::from_diagonal(&m.diagonal())
}

/// `M_{1/2}`: the strictly lower part plus half the diagonal.
pub fn half_lower(m: &Mat) -> Mat {
    strict_lower(m) + diag_part(m) * 0.5
}

pub fn commutator(a: &Mat, b: &Mat) -> Result<Mat> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(GyroError::DimMismatch(format!(
            "commutator operands {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b - b * a)
}

/// Divided difference of `log` at two positive eigenvalues.
fn log_divided_difference(a: f64, b: f64) -> f64 {
    if (a - b).abs() < 1e-12 * a {
        1.0 / a
    } else {
        ((a - b) / b).ln_1p() / (a - b)
    }
}

/// Divided difference of `exp` at two real eigenvalues.
fn exp_divided_difference(x: f64, y: f64) -> f64 {
    let d = x - y;
    if d == 0.0 {
        x.exp()
    } else {
        y.exp() * d.exp_m1() / d
    }
}

fn check_same_order(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GyroError::DimMismatch(format!("orders {a} and {b}")));
    }
    Ok(())
}

fn daleckii_krein(eig: &SymEig, w: &Mat, dd: impl Fn(f64, f64) -> f64) -> Mat {
    let q = &eig.vectors;
    let mut rotated = q.transpose() * w * q;
    let n = rotated.nrows();
    for i in 0..n {
        for j in 0..n {
            rotated[(i, j)] *= dd(eig.values[i], eig.values[j]);
        }
    }
    congruence(q, &rotated)
}

/// Directional derivative of the matrix logarithm at `P` along `W`.
pub fn frechet_dlog(p: &SpdMatrix, w: &SymMatrix) -> Result<SymMatrix> {
    check_same_order(p.order(), w.order())?;
    let out = daleckii_krein(&p.eig(), w.as_mat(), log_divided_difference);
    Ok(SymMatrix(out))
}

/// Directional derivative of the matrix exponential at symmetric `S` along `W`.
/// Inverse of [`frechet_dlog`] at `exp(S)`.
pub fn frechet_dexp(s: &SymMatrix, w: &SymMatrix) -> Result<SymMatrix> {
    check_same_order(s.order(), w.order())?;
    let eig = sym_eig(s.as_mat())?;
    let out = daleckii_krein(&eig, w.as_mat(), exp_divided_difference);
    if !all_finite(&out) {
        return Err(GyroError::NonFinite);
    }
    Ok(SymMatrix(out))
}

/// `diag(A₁, …, A_N)` for square blocks.
pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let total: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Mat::zeros(total, total);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(*b);
        off += k;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn rel(a: &Mat, b: &Mat) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn sample_sym(n: usize, seed: u64) -> Mat {
        // Small deterministic LCG; independent of the crate's generators.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let a = Mat::from_fn(n, n, |_, _| next());
        symmetrize(&a)
    }

    fn sample_spd(n: usize, seed: u64) -> SpdMatrix {
        let a = sample_sym(n, seed) + Mat::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.1);
        SpdMatrix::new(&a * a.transpose() + Mat::identity(n, n) * 0.2).unwrap()
    }

    #[test]
    fn sym_eig_diagonal_and_identity() {
        let e = sym_eig(&Mat::from_diagonal(&DVector::from_vec(vec![1.0, 3.0]))).unwrap();
        assert_eq!(e.values.as_slice(), &[3.0, 1.0]);
        let e = sym_eig(&Mat::identity(2, 2)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0]);
        let qtq = e.vectors.transpose() * &e.vectors;
        assert!((qtq - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn sym_eig_reconstructs_random_symmetric() {
        for seed in 0..20 {
            let s = sample_sym(5, seed);
            let e = sym_eig(&s).unwrap();
            let back = e.reconstruct_with(|x| x);
            assert!(rel(&back, &s) < 1e-12);
            assert!((e.vectors.transpose() * &e.vectors - Mat::identity(5, 5)).norm() < 1e-12);
            assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sym_eig_rejects_nan() {
        let mut m = Mat::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert_eq!(sym_eig(&m).unwrap_err(), GyroError::NonFinite);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(mat_exp(&Mat::zeros(3, 3)).unwrap(), Mat::identity(3, 3));
        let rot = Mat::from_row_slice(2, 2, &[0.0, -FRAC_PI_2, FRAC_PI_2, 0.0]);
        let want = Mat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((mat_exp(&rot).unwrap() - want).norm() < 1e-14);
        let d = mat_exp(&Mat::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).unwrap();
        assert!((d[(0, 0)] - E).abs() < 1e-14 && (d[(1, 1)] - E * E).abs() < 1e-13);
    }

    #[test]
    fn pade_agrees_with_eigen_route_on_symmetric_input() {
        for seed in 0..10 {
            let s = sample_sym(4, seed) * 3.0;
            let a = expm_pade13(&s).unwrap();
            let b = sym_eig(&s).unwrap().reconstruct_with(f64::exp);
            assert!(rel(&a, &b) < 1e-12, "{}", rel(&a, &b));
        }
    }

    #[test]
    fn exp_overflow_is_non_finite() {
        let big = Mat::from_row_slice(2, 2, &[800.0, 1.0, 0.0, 0.0]);
        assert_eq!(mat_exp(&big).unwrap_err(), GyroError::NonFinite);
        let sym = Mat::from_diagonal(&DVector::from_vec(vec![800.0, 0.0]));
        assert_eq!(mat_exp(&sym).unwrap_err(), GyroError::NonFinite);
    }

    #[test]
    fn log_examples_and_roundtrip() {
        assert!(mat_log_spd(&SpdMatrix::identity(3)).norm() < 1e-15);
        let l = mat_log_spd(&SpdMatrix::from_diagonal(&[E, 1.0]).unwrap());
        assert!((l.as_mat() - Mat::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]))).norm() < 1e-15);
        for seed in 0..50 {
            let p = sample_spd(4, seed);
            let back = mat_exp(mat_log_spd(&p).as_mat()).unwrap();
            assert!(rel(&back, p.as_mat()) < 1e-10);
        }
    }

    #[test]
    fn spd_admission_rejects_indefinite_and_near_singular() {
        assert!(matches!(
            SpdMatrix::from_diagonal(&[1.0, -1.0]),
            Err(GyroError::NotSpd(_))
        ));
        assert!(matches!(
            SpdMatrix::from_diagonal(&[1.0, 1e-12]),
            Err(GyroError::NotSpd(_))
        ));
        assert!(matches!(
            SpdMatrix::from_row_slice(2, &[1.0, 0.5, 0.4, 1.0]),
            Err(GyroError::NotSymmetric(_))
        ));
    }

    #[test]
    fn cholesky_examples() {
        let l = cholesky(&SpdMatrix::from_diagonal(&[4.0, 9.0]).unwrap()).unwrap();
        assert_eq!(l.as_mat(), &Mat::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])));
        let l = cholesky(&SpdMatrix::identity(3)).unwrap();
        assert_eq!(l.as_mat(), &Mat::identity(3, 3));
        let p = SpdMatrix::from_row_slice(2, &[4.0, 2.0, 2.0, 5.0]).unwrap();
        let l = cholesky(&p).unwrap();
        assert_eq!(l.as_mat(), &Mat::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]));
        assert!(rel(&(l.as_mat() * l.as_mat().transpose()), p.as_mat()) < 1e-15);
    }

    #[test]
    fn cholesky_rejects_nonpositive_pivot() {
        // Bypass admission to hit the pivot check directly.
        let bad = Mat::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(cholesky_raw(&bad), Err(GyroError::NotSpd(_))));
    }

    #[test]
    fn lower_tri_pos_admission() {
        assert!(LowerTriPos::new(Mat::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 2.0])).is_ok());
        assert!(LowerTriPos::new(Mat::from_row_slice(2, 2, &[1.0, 0.1, 3.0, 2.0])).is_err());
        assert!(LowerTriPos::new(Mat::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 0.0])).is_err());
    }

    #[test]
    fn triangular_parts() {
        assert_eq!(strict_lower(&Mat::identity(3, 3)), Mat::zeros(3, 3));
        let d = Mat::from_diagonal(&DVector::from_vec(vec![2.0, 4.0]));
        assert_eq!(half_lower(&d), Mat::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        let s = sample_sym(4, 3);
        let back = strict_lower(&s) + diag_part(&s) + strict_lower(&s.transpose()).transpose();
        assert!((back - &s).norm() < 1e-15);
    }

    #[test]
    fn commutator_examples() {
        let a = sample_sym(3, 1) + Mat::from_fn(3, 3, |i, j| (i as f64) - (j as f64) * 0.3);
        assert_eq!(commutator(&a, &a).unwrap(), Mat::zeros(3, 3));
        assert!(commutator(&a, &Mat::identity(3, 3)).unwrap().norm() < 1e-15);
        // n = 3, p = 1, B = (b1, b2)
        let (b1, b2) = (0.4, -0.7);
        let x = Mat::from_row_slice(3, 3, &[0.0, b1, b2, b1, 0.0, 0.0, b2, 0.0, 0.0]);
        let ip = Mat::from_diagonal(&DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let want = Mat::from_row_slice(3, 3, &[0.0, -b1, -b2, b1, 0.0, 0.0, b2, 0.0, 0.0]);
        assert_eq!(commutator(&x, &ip).unwrap(), want);
        assert!(commutator(&x, &Mat::identity(2, 2)).is_err());
    }

    #[test]
    fn dlog_examples() {
        let w = SymMatrix::from_row_slice(2, &[0.3, -1.2, -1.2, 2.0]).unwrap();
        let at_id = frechet_dlog(&SpdMatrix::identity(2), &w).unwrap();
        assert!((at_id.as_mat() - w.as_mat()).norm() < 1e-15);

        // central differences (log(P+hW) − log(P−hW))/2h at P = diag(e,1): c = 1/(e−1)
        let p = SpdMatrix::from_diagonal(&[E, 1.0]).unwrap();
        let off = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let h = 1e-5;
        let plus = SpdMatrix::new(p.as_mat() + off.as_mat() * h).unwrap();
        let minus = SpdMatrix::new(p.as_mat() - off.as_mat() * h).unwrap();
        let fd = (mat_log_spd(&plus).as_mat() - mat_log_spd(&minus).as_mat()) / (2.0 * h);
        let c_fd = fd[(0, 1)];
        assert!((c_fd - 0.58198).abs() < 1e-5);
        let d = frechet_dlog(&p, &off).unwrap();
        assert!((d.as_mat()[(0, 1)] - 1.0 / (E - 1.0)).abs() < 1e-15);
        assert!((d.as_mat()[(0, 1)] - c_fd).abs() < 1e-8);
        assert!(d.as_mat()[(0, 0)].abs() < 1e-15);

        let a = 2.5;
        let d = frechet_dlog(&SpdMatrix::from_diagonal(&[a, a]).unwrap(), &w).unwrap();
        assert!((d.as_mat() - w.as_mat() / a).norm() < 1e-15);
    }

    #[test]
    fn dlog_second_order_fd_convergence() {
        for seed in 0..10 {
            let p = sample_spd(4, seed + 100);
            let w = SymMatrix::from_symmetric_part(&sample_sym(4, seed + 200));
            let exact = frechet_dlog(&p, &w).unwrap();
            let err = |h: f64| {
                let plus = SpdMatrix::new(p.as_mat() + w.as_mat() * h).unwrap();
                let minus = SpdMatrix::new(p.as_mat() - w.as_mat() * h).unwrap();
                let fd = (mat_log_spd(&plus).as_mat() - mat_log_spd(&minus).as_mat()) / (2.0 * h);
                (fd - exact.as_mat()).norm()
            };
            let ratio = err(1e-3) / err(5e-4);
            assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn dexp_examples() {
        let w = SymMatrix::from_row_slice(2, &[0.3, -1.2, -1.2, 2.0]).unwrap();
        let d = frechet_dexp(&SymMatrix::zeros(2), &w).unwrap();
        assert!((d.as_mat() - w.as_mat()).norm() < 1e-15);

        let s = SymMatrix::from_diagonal(&[1.0, 0.0]);
        let off = SymMatrix::from_row_slice(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let d = frechet_dexp(&s, &off).unwrap();
        assert!((d.as_mat()[(0, 1)] - (E - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn dexp_inverts_dlog() {
        for seed in 0..20 {
            let s = SymMatrix::from_symmetric_part(&sample_sym(3, seed));
            let w = SymMatrix::from_symmetric_part(&sample_sym(3, seed + 50));
            let p = sym_exp(&s).unwrap();
            let back = frechet_dlog(&p, &frechet_dexp(&s, &w).unwrap()).unwrap();
            assert!((back.as_mat() - w.as_mat()).norm() < 1e-9);
        }
    }

    #[test]
    fn divided_differences_are_stable_near_coincidence() {
        let a = 2.0;
        let b = a * (1.0 + 1e-9);
        assert!((log_divided_difference(a, b) - 1.0 / (a * (1.0 + 0.5e-9))).abs() < 1e-15);
        assert!((exp_divided_difference(1.0, 1.0 + 1e-10) - E * (1.0 + 0.5e-10)).abs() < 1e-14);
    }

    #[test]
    fn block_diag_layout() {
        let a = Mat::from_row_slice(1, 1, &[2.0]);
        let b = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let m = block_diag(&[&a, &b]);
        assert_eq!(m, Mat::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, 1.0, 2.0, 0.0, 3.0, 4.0]));
    }

    #[test]
    fn jacobi_svd_reconstructs() {
        // A matrix on which a bidiagonal QR SVD has been seen to go wrong.
        let f = Mat::from_row_slice(
            3,
            3,
            &[
                0.3375715506650497,
                -0.6583313961248337,
                0.5351017971819794,
                0.20701245514575212,
                0.5596305588611735,
                0.7866247584715822,
                -0.6445846838295445,
                -0.16504185865055063,
                0.5328644545622545,
            ],
        );
        let wide = Mat::from_fn(2, 5, |i, j| ((i * 5 + j) as f64).sin());
        let deficient = Mat::from_fn(4, 3, |i, j| (i + 1) as f64 * (j as f64 - 1.0));
        for a in [f, wide, deficient, sample_sym(5, 11)] {
            let d = svd(&a);
            let rec = &d.u * Mat::from_diagonal(&d.s) * d.v.transpose();
            assert!((rec - &a).norm() < 1e-13 * (1.0 + a.norm()));
            assert!(d.s.as_slice().windows(2).all(|w| w[0] >= w[1]));
            let gram = (a.transpose() * &a).symmetric_eigenvalues();
            let mut want: Vec<f64> = gram.iter().map(|x| x.max(0.0).sqrt()).collect();
            want.sort_by(|x, y| y.total_cmp(x));
            for (got, w) in d.s.iter().zip(&want) {
                assert!((got - w).abs() < 1e-10 * (1.0 + w));
            }
        }
    }

    #[test]
    fn cached_representations_agree_with_plain_matrices() {
        let p = SpdMatrix::new(sample_sym(4, 3) * 2.0 + Mat::identity(4, 4) * 9.0).unwrap();
        let s = sym_exp(&SymMatrix::from_symmetric_part(&sample_sym(4, 5))).unwrap();
        let f = SpdMatrix::from_factor(spd_sqrt(&p).as_mat() * s.factor()).unwrap();
        for x in [&s, &f, &spd_pow(&p, -1.5).unwrap()] {
            let plain = SpdMatrix::new(x.as_mat().clone()).unwrap();
            let a = mat_log_spd(x).into_mat();
            let b = mat_log_spd(&plain).into_mat();
            assert!((a - b).norm() < 1e-12);
            let l = cholesky(x).unwrap();
            assert!((l.as_mat() * l.as_mat().transpose() - x.as_mat()).norm() < 1e-12 * x.as_mat().norm());
        }
    }
}
