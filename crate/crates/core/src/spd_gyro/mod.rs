//! Gyrovector spaces on SPD matrices under the Log-Euclidean (LE),
//! Log-Cholesky (LC) and Affine-Invariant (AI) metrics, all with power `r = 1`.
//!
//! The gyration is always evaluated as the composite
//! `gyr[P,Q]R = ⊖(P ⊕ Q) ⊕ (P ⊕ (Q ⊕ R))`, for every metric. It reduces to the
//! identity for LE and LC; the test-suite checks that rather than assuming it.

mod lt;
mod triangle;

use std::fmt;
use std::str::FromStr;

pub use lt::{
    lower_to_tangent, lt_add, lt_coords, lt_exp, lt_inverse, lt_log, lt_metric, lt_scale,
    tangent_to_lower,
};
pub use triangle::{gyrotriangle_laws, GyroTriangleReport};

use crate::error::{GyroError, Result};
use crate::matker::{
    cholesky, congruence, frechet_dexp, frechet_dlog, half_lower, mat_log_spd, strict_lower, spd_inv_sqrt, spd_inv,
    spd_pow, spd_sqrt, sym_eig, sym_exp, LowerTriPos, Mat, SpdMatrix, SymMatrix,
};

/// Norm below which a gyrovector is treated as the identity when measuring angles.
pub const ANGLE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpdMetric {
    Le,
    Lc,
    Ai,
}

impl SpdMetric {
    pub const ALL: [SpdMetric; 3] = [SpdMetric::Le, SpdMetric::Lc, SpdMetric::Ai];

    pub fn tag(self) -> &'static str {
        match self {
            SpdMetric::Le => "le",
            SpdMetric::Lc => "lc",
            SpdMetric::Ai => "ai",
        }
    }

    /// LE and LC are flat: their gyrations are trivial and the Euclidean
    /// triangle laws hold.
    pub fn is_flat(self) -> bool {
        !matches!(self, SpdMetric::Ai)
    }
}

impl fmt::Display for SpdMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for SpdMetric {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "le" => Ok(SpdMetric::Le),
            "lc" => Ok(SpdMetric::Lc),
            "ai" => Ok(SpdMetric::Ai),
            other => Err(GyroError::InvalidConfig(format!("unknown SPD metric `{other}`"))),
        }
    }
}

/// A symmetric tangent vector anchored at an SPD base point.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTangent {
    base: SpdMatrix,
    value: SymMatrix,
}

impl SymTangent {
    pub fn new(base: SpdMatrix, value: SymMatrix) -> Result<Self> {
        same_order(base.order(), value.order())?;
        Ok(SymTangent { base, value })
    }

    pub fn at_identity(value: SymMatrix) -> Self {
        SymTangent {
            base: SpdMatrix::identity(value.order()),
            value,
        }
    }

    pub fn base(&self) -> &SpdMatrix {
        &self.base
    }

    pub fn value(&self) -> &SymMatrix {
        &self.value
    }

    pub fn into_value(self) -> SymMatrix {
        self.value
    }
}

fn same_order(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(GyroError::DimMismatch(format!("orders {a} and {b}")));
    }
    Ok(())
}

fn lt_gram(l: &LowerTriPos) -> Result<SpdMatrix> {
    l.gram()
}

pub fn spd_add(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix) -> Result<SpdMatrix> {
    same_order(p.order(), q.order())?;
    match m {
        SpdMetric::Le => {
            let s = mat_log_spd(p).add(&mat_log_spd(q));
            sym_exp(&s)
        }
        SpdMetric::Lc => lt_gram(&lt_add(&cholesky(p)?, &cholesky(q)?)?),
        SpdMetric::Ai => SpdMatrix::from_factor(spd_sqrt(p).as_mat() * q.factor()),
    }
}

/// The left inverse `⊖P`.
pub fn spd_inverse(m: SpdMetric, p: &SpdMatrix) -> Result<SpdMatrix> {
    match m {
        SpdMetric::Le | SpdMetric::Ai => Ok(spd_inv(p)),
        SpdMetric::Lc => lt_gram(&lt_inverse(&cholesky(p)?)),
    }
}

pub fn spd_scale(m: SpdMetric, t: f64, p: &SpdMatrix) -> Result<SpdMatrix> {
    if !t.is_finite() {
        return Err(GyroError::NonFinite);
    }
    match m {
        SpdMetric::Le | SpdMetric::Ai => spd_pow(p, t),
        SpdMetric::Lc => lt_gram(&lt_scale(t, &cholesky(p)?)?),
    }
}

/// `gyr[P,Q]R = ⊖(P ⊕ Q) ⊕ (P ⊕ (Q ⊕ R))`
pub fn spd_gyr(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix, r: &SpdMatrix) -> Result<SpdMatrix> {
    same_order(p.order(), r.order())?;
    let pq = spd_add(m, p, q)?;
    let inner = spd_add(m, p, &spd_add(m, q, r)?)?;
    spd_add(m, &spd_inverse(m, &pq)?, &inner)
}

/// Riemannian logarithm `Log_P(Q)`.
pub fn spd_log(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix) -> Result<SymTangent> {
    same_order(p.order(), q.order())?;
    let value = match m {
        SpdMetric::Le => {
            let lp = mat_log_spd(p);
            frechet_dexp(&lp, &mat_log_spd(q).sub(&lp))?
        }
        SpdMetric::Ai => {
            let (h, hi) = (spd_sqrt(p), spd_inv_sqrt(p));
            let inner = SpdMatrix::from_closed_form(&congruence(hi.as_mat(), q.as_mat()))?;
            SymMatrix::from_symmetric_part(&congruence(h.as_mat(), mat_log_spd(&inner).as_mat()))
        }
        SpdMetric::Lc => {
            let l = cholesky(p)?;
            let x = lt_log(&l, &cholesky(q)?);
            SymMatrix::from_symmetric_part(&lower_to_tangent(&l, &x))
        }
    };
    SymTangent::new(p.clone(), value)
}

/// Riemannian exponential `Exp_P(W)` at the base point of `w`.
pub fn spd_exp(m: SpdMetric, w: &SymTangent) -> Result<SpdMatrix> {
    let p = w.base();
    let v = w.value();
    match m {
        SpdMetric::Le => sym_exp(&mat_log_spd(p).add(&frechet_dlog(p, v)?)),
        SpdMetric::Ai => {
            let (h, hi) = (spd_sqrt(p), spd_inv_sqrt(p));
            let inner = SymMatrix::from_symmetric_part(&congruence(hi.as_mat(), v.as_mat()));
            SpdMatrix::from_closed_form(&congruence(h.as_mat(), sym_exp(&inner)?.as_mat()))
        }
        SpdMetric::Lc => {
            let l = cholesky(p)?;
            lt_gram(&lt_exp(&l, &tangent_to_lower(&l, v.as_mat()))?)
        }
    }
}

/// Transport of a tangent vector at the identity to `P`, chosen so that
/// `Exp_P(T(Log_I(Q))) = P ⊕ Q`.
pub fn spd_transport_identity(m: SpdMetric, p: &SpdMatrix, w: &SymMatrix) -> Result<SymTangent> {
    same_order(p.order(), w.order())?;
    let value = match m {
        SpdMetric::Le => frechet_dexp(&mat_log_spd(p), w)?,
        SpdMetric::Ai => SymMatrix::from_symmetric_part(&congruence(spd_sqrt(p).as_mat(), w.as_mat())),
        SpdMetric::Lc => {
            let l = cholesky(p)?;
            let x = half_lower(w.as_mat());
            let mut moved = strict_lower(&x);
            for i in 0..x.nrows() {
                moved[(i, i)] = l.as_mat()[(i, i)] * x[(i, i)];
            }
            SymMatrix::from_symmetric_part(&lower_to_tangent(&l, &moved))
        }
    };
    SymTangent::new(p.clone(), value)
}

/// Coordinates of `Log_I(P)` in which the inner product at the identity is Frobenius.
pub fn identity_coords(m: SpdMetric, p: &SpdMatrix) -> Result<Mat> {
    match m {
        SpdMetric::Le | SpdMetric::Ai => Ok(mat_log_spd(p).into_mat()),
        SpdMetric::Lc => Ok(lt_coords(&cholesky(p)?)),
    }
}

/// `⟨Log_I(P), Log_I(Q)⟩` at the identity.
pub fn spd_inner(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    same_order(p.order(), q.order())?;
    Ok(identity_coords(m, p)?.dot(&identity_coords(m, q)?))
}

pub fn spd_norm(m: SpdMetric, p: &SpdMatrix) -> Result<f64> {
    Ok(identity_coords(m, p)?.norm())
}

/// `‖⊖P ⊕ Q‖`
pub fn spd_gyrodistance(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix) -> Result<f64> {
    spd_norm(m, &spd_add(m, &spd_inverse(m, p)?, q)?)
}

/// Gyroangle at vertex `P` between the gyrovectors `⊖P⊕Q` and `⊖P⊕R`.
pub fn spd_gyroangle(m: SpdMetric, p: &SpdMatrix, q: &SpdMatrix, r: &SpdMatrix) -> Result<f64> {
    let ip = spd_inverse(m, p)?;
    let u = identity_coords(m, &spd_add(m, &ip, q)?)?;
    let v = identity_coords(m, &spd_add(m, &ip, r)?)?;
    angle_between(&u, &v)
}

pub(crate) fn angle_between(u: &Mat, v: &Mat) -> Result<f64> {
    let (nu, nv) = (u.norm(), v.norm());
    if nu < ANGLE_EPS || nv < ANGLE_EPS {
        return Err(GyroError::DegenerateAngle);
    }
    // Same value as arccos of the clamped cosine, without its loss of
    // precision near 0 and π.
    let (a, b) = (u / nu, v / nv);
    Ok(2.0 * (&a - &b).norm().atan2((&a + &b).norm()))
}

/// Riemannian metric `⟨U, V⟩_P` between two tangent vectors at the same base point.
pub fn spd_tangent_inner(m: SpdMetric, u: &SymTangent, v: &SymTangent) -> Result<f64> {
    if u.base() != v.base() {
        return Err(GyroError::DimMismatch(
            "tangent vectors are anchored at different base points".into(),
        ));
    }
    let p = u.base();
    match m {
        SpdMetric::Le => Ok(frechet_dlog(p, u.value())?.frob_inner(&frechet_dlog(p, v.value())?)),
        SpdMetric::Ai => {
            let hi = spd_inv_sqrt(p);
            let a = congruence(hi.as_mat(), u.value().as_mat());
            let b = congruence(hi.as_mat(), v.value().as_mat());
            Ok(a.dot(&b))
        }
        SpdMetric::Lc => {
            let l = cholesky(p)?;
            let x = tangent_to_lower(&l, u.value().as_mat());
            let y = tangent_to_lower(&l, v.value().as_mat());
            Ok(lt_metric(&l, &x, &y))
        }
    }
}

pub fn spd_tangent_norm(m: SpdMetric, w: &SymTangent) -> Result<f64> {
    Ok(spd_tangent_inner(m, w, w)?.max(0.0).sqrt())
}

/// Eigenvalues, descending. Used to compare orthogonally congruent matrices.
pub fn spectrum(p: &SpdMatrix) -> Vec<f64> {
    sym_eig(p.as_mat())
        .map(|e| e.values.as_slice().to_vec())
        .unwrap_or_default()
}
