//! Grassmann manifolds `Gr(n, p)` as gyrovector spaces, in two perspectives:
//! rank-`p` orthogonal projectors, and `n × p` orthonormal frames (ONB) related
//! to projectors by `τ(U) = U·Uᵀ`.
//!
//! Everything is anchored at the identity subspace `I_{n,p} = diag(I_p, 0)`,
//! whose frame is `Ĩ_{n,p} = [I_p; 0]`. A tangent vector there has the block
//! form `X = [[0, B], [Bᵀ, 0]]`, and `exp([X, I_{n,p}])` is the orthogonal matrix
//! that moves `I_{n,p}` along the geodesic with initial velocity `X`.
//!
//! The inner product is the Frobenius product of the `n × n` identity-based
//! logarithms, so `‖X‖ = √2·‖B‖_F`.

use nalgebra::DVector;

use crate::error::{GyroError, Result};
use crate::matker::{commutator, mat_exp, singular_values, svd, symmetrize, Mat};

/// Smallest admissible singular value of the top `p × p` block of a frame.
pub const CUT_LOCUS_EPS: f64 = 1e-8;

const ORTHONORMAL_TOL: f64 = 1e-10;

fn check_rank(n: usize, p: usize) -> Result<()> {
    if p == 0 || p >= n {
        return Err(GyroError::DimMismatch(format!("need 1 ≤ p < n, got n={n}, p={p}")));
    }
    Ok(())
}

fn all_finite(m: &Mat) -> bool {
    m.iter().all(|x| x.is_finite())
}

/// `I_{n,p} = diag(I_p, 0)`
pub fn identity_projector_matrix(n: usize, p: usize) -> Mat {
    Mat::from_fn(n, n, |i, j| if i == j && i < p { 1.0 } else { 0.0 })
}

/// `Ĩ_{n,p} = [I_p; 0]`
pub fn identity_frame_matrix(n: usize, p: usize) -> Mat {
    Mat::from_fn(n, p, |i, j| if i == j { 1.0 } else { 0.0 })
}

/// A rank-`p` orthogonal projector on `Rⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    p: usize,
    m: Mat,
}

impl Projector {
    /// Admits `m` if it is symmetric (1e-10), idempotent (1e-9) and has
    /// integral trace `p` with `1 ≤ p < n` (1e-8).
    pub fn new(m: Mat) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(GyroError::DimMismatch(format!(
                "projector must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        let asym = (&m - m.transpose()).norm();
        if asym > 1e-10 {
            return Err(GyroError::NotProjector(format!("‖M − Mᵀ‖_F = {asym:e}")));
        }
        let idem = (&m * &m - &m).norm();
        if idem > 1e-9 {
            return Err(GyroError::NotProjector(format!("‖M² − M‖_F = {idem:e}")));
        }
        let trace = m.trace();
        let p = trace.round();
        if (trace - p).abs() > 1e-8 || p < 1.0 || p >= n as f64 {
            return Err(GyroError::NotProjector(format!(
                "trace {trace} is not an integer rank in 1..{n}"
            )));
        }
        Ok(Projector {
            p: p as usize,
            m: symmetrize(&m),
        })
    }

    pub fn identity(n: usize, p: usize) -> Result<Self> {
        check_rank(n, p)?;
        Ok(Projector {
            p,
            m: identity_projector_matrix(n, p),
        })
    }

    fn from_closed_form(m: &Mat, p: usize) -> Result<Self> {
        if !all_finite(m) {
            return Err(GyroError::NonFinite);
        }
        let m = symmetrize(m);
        if cfg!(debug_assertions) {
            let idem = (&m * &m - &m).norm();
            if idem > 1e-8 {
                return Err(GyroError::NotProjector(format!("‖M² − M‖_F = {idem:e}")));
            }
        }
        Ok(Projector { p, m })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn as_mat(&self) -> &Mat {
        &self.m
    }

    /// An orthonormal frame of the range: eigenvectors of the top `p` eigenvalues.
    pub fn frame(&self) -> OnbFrame {
        let eig = crate::matker::sym_eig(&self.m).expect("finite projector");
        OnbFrame {
            m: eig.vectors.columns(0, self.p).into_owned(),
        }
    }
}

/// An `n × p` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OnbFrame {
    m: Mat,
}

impl OnbFrame {
    /// Admits `m` if `‖mᵀm − I_p‖_F < 1e-10` and `1 ≤ p < n`.
    pub fn new(m: Mat) -> Result<Self> {
        check_rank(m.nrows(), m.ncols())?;
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        let p = m.ncols();
        let err = (m.transpose() * &m - Mat::identity(p, p)).norm();
        if err >= ORTHONORMAL_TOL {
            return Err(GyroError::NotOrthonormal(format!("‖UᵀU − I‖_F = {err:e}")));
        }
        Ok(OnbFrame { m })
    }

    pub fn from_row_slice(n: usize, p: usize, data: &[f64]) -> Result<Self> {
        Self::new(Mat::from_row_slice(n, p, data))
    }

    pub fn identity(n: usize, p: usize) -> Result<Self> {
        check_rank(n, p)?;
        Ok(OnbFrame {
            m: identity_frame_matrix(n, p),
        })
    }

    pub(crate) fn from_closed_form(m: Mat) -> Result<Self> {
        if !all_finite(&m) {
            return Err(GyroError::NonFinite);
        }
        if cfg!(debug_assertions) {
            let p = m.ncols();
            let err = (m.transpose() * &m - Mat::identity(p, p)).norm();
            if err > 1e-8 {
                return Err(GyroError::NotOrthonormal(format!("‖UᵀU − I‖_F = {err:e}")));
            }
        }
        Ok(OnbFrame { m })
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn p(&self) -> usize {
        self.m.ncols()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.m
    }

    pub fn into_mat(self) -> Mat {
        self.m
    }

    /// `U·O` for an orthogonal `p × p` matrix `O`; spans the same subspace.
    pub fn rotate(&self, o: &Mat) -> Result<OnbFrame> {
        if o.shape() != (self.p(), self.p()) {
            return Err(GyroError::DimMismatch(format!(
                "rotation {:?} for a frame with p = {}",
                o.shape(),
                self.p()
            )));
        }
        OnbFrame::new(&self.m * o)
    }

    /// Smallest singular value of the top `p × p` block.
    pub fn top_block_sigma_min(&self) -> f64 {
        let p = self.p();
        let top = self.m.rows(0, p).into_owned();
        singular_values(&top).min()
    }
}

/// Tangent vector at `I_{n,p}`, stored by its `p × (n−p)` block `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrTangentAtI {
    n: usize,
    b: Mat,
}

impl GrTangentAtI {
    pub fn new(n: usize, b: Mat) -> Result<Self> {
        let p = b.nrows();
        check_rank(n, p)?;
        if b.ncols() != n - p {
            return Err(GyroError::DimMismatch(format!(
                "block must be {p}x{}, got {}x{}",
                n - p,
                b.nrows(),
                b.ncols()
            )));
        }
        if !all_finite(&b) {
            return Err(GyroError::NonFinite);
        }
        Ok(GrTangentAtI { n, b })
    }

    pub fn zero(n: usize, p: usize) -> Result<Self> {
        check_rank(n, p)?;
        Ok(GrTangentAtI {
            n,
            b: Mat::zeros(p, n - p),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.b.nrows()
    }

    pub fn block(&self) -> &Mat {
        &self.b
    }

    pub fn scale(&self, t: f64) -> GrTangentAtI {
        GrTangentAtI {
            n: self.n,
            b: &self.b * t,
        }
    }

    /// `[[0, B], [Bᵀ, 0]]`
    pub fn matrix(&self) -> Mat {
        let p = self.p();
        let mut x = Mat::zeros(self.n, self.n);
        x.view_mut((0, p), (p, self.n - p)).copy_from(&self.b);
        x.view_mut((p, 0), (self.n - p, p)).copy_from(&self.b.transpose());
        x
    }

    /// `exp([X, I_{n,p}])`, an orthogonal `n × n` matrix.
    pub fn flow(&self) -> Mat {
        let ip = identity_projector_matrix(self.n, self.p());
        let gen = commutator(&self.matrix(), &ip).expect("square operands of equal order");
        mat_exp(&gen).expect("skew generator of finite norm")
    }

    /// Frobenius inner product of the `n × n` block matrices, `2⟨B, B'⟩`.
    pub fn inner(&self, other: &GrTangentAtI) -> f64 {
        2.0 * self.b.dot(&other.b)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }
}

/// `τ(U) = U·Uᵀ`
pub fn tau(u: &OnbFrame) -> Projector {
    Projector {
        p: u.p(),
        m: symmetrize(&(u.as_mat() * u.as_mat().transpose())),
    }
}

fn frame_log(u: &OnbFrame) -> Result<GrTangentAtI> {
    let (n, p) = (u.n(), u.p());
    let sigma = u.top_block_sigma_min();
    if !(sigma > CUT_LOCUS_EPS) {
        return Err(GyroError::CutLocus(format!(
            "top-block smallest singular value {sigma:e} ≤ {CUT_LOCUS_EPS:e}"
        )));
    }
    let top = u.as_mat().rows(0, p).into_owned();
    let bottom = u.as_mat().rows(p, n - p).into_owned();
    let top_inv = top
        .try_inverse()
        .ok_or_else(|| GyroError::CutLocus("top block is singular".into()))?;
    // T = U₂U₁⁻¹ = Z·S·Yᵀ spans the subspace as the graph of T over span(Ĩ).
    let t = bottom * top_inv;
    let d = svd(&t);
    let theta = DVector::from_iterator(d.s.len(), d.s.iter().map(|s| s.atan()));
    let b = &d.v * Mat::from_diagonal(&theta) * d.u.transpose();
    GrTangentAtI::new(n, b)
}

/// `Log_{I_{n,p}}(Q)`.
///
/// Fails with `CutLocus` if some principal angle to `span(Ĩ_{n,p})` is (numerically) `π/2`.
pub fn gr_log_identity(q: &Projector) -> Result<GrTangentAtI> {
    frame_log(&q.frame())
}

/// `Log_{I_{n,p}}(τ(U))`, read directly from the frame.
pub fn onb_log_identity(u: &OnbFrame) -> Result<GrTangentAtI> {
    frame_log(u)
}

/// `Exp_{I_{n,p}}(X) = E·I_{n,p}·Eᵀ`, `E = exp([X, I_{n,p}])`.
pub fn gr_exp_identity(x: &GrTangentAtI) -> Result<Projector> {
    let e = x.flow();
    let ip = identity_projector_matrix(x.n(), x.p());
    Projector::from_closed_form(&(&e * ip * e.transpose()), x.p())
}

fn same_shape(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return Err(GyroError::DimMismatch(format!(
            "Gr({}, {}) and Gr({}, {})",
            a.0, a.1, b.0, b.1
        )));
    }
    Ok(())
}

/// `P ⊕ Q = E·Q·Eᵀ` with `E = exp([Log(P), I_{n,p}])`.
pub fn gr_add(p: &Projector, q: &Projector) -> Result<Projector> {
    same_shape((p.n(), p.p()), (q.n(), q.p()))?;
    let e = gr_log_identity(p)?.flow();
    Projector::from_closed_form(&(&e * q.as_mat() * e.transpose()), q.p())
}

/// `⊖P = Exp(−Log(P))`
pub fn gr_inverse(p: &Projector) -> Result<Projector> {
    gr_exp_identity(&gr_log_identity(p)?.scale(-1.0))
}

/// `t ⊗ P = Exp(t·Log(P))`
pub fn gr_scale(t: f64, p: &Projector) -> Result<Projector> {
    if !t.is_finite() {
        return Err(GyroError::NonFinite);
    }
    gr_exp_identity(&gr_log_identity(p)?.scale(t))
}

/// `gyr[P,Q]R = ⊖(P ⊕ Q) ⊕ (P ⊕ (Q ⊕ R))`
pub fn gr_gyr(p: &Projector, q: &Projector, r: &Projector) -> Result<Projector> {
    let pq = gr_add(p, q)?;
    let inner = gr_add(p, &gr_add(q, r)?)?;
    gr_add(&gr_inverse(&pq)?, &inner)
}

/// `U ⊕̃ V = exp([Ū, I_{n,p}])·V` with `Ū = Log(τ(U))`.
pub fn onb_add(u: &OnbFrame, v: &OnbFrame) -> Result<OnbFrame> {
    same_shape((u.n(), u.p()), (v.n(), v.p()))?;
    let e = onb_log_identity(u)?.flow();
    OnbFrame::from_closed_form(e * v.as_mat())
}

/// `t ⊗̃ U = exp([t·Ū, I_{n,p}])·Ĩ_{n,p}`
pub fn onb_scale(t: f64, u: &OnbFrame) -> Result<OnbFrame> {
    if !t.is_finite() {
        return Err(GyroError::NonFinite);
    }
    let e = onb_log_identity(u)?.scale(t).flow();
    OnbFrame::from_closed_form(e * identity_frame_matrix(u.n(), u.p()))
}

/// `⊖̃U = exp(−[Ū, I_{n,p}])·Ĩ_{n,p}`
pub fn onb_inverse(u: &OnbFrame) -> Result<OnbFrame> {
    onb_scale(-1.0, u)
}

/// The orthogonal matrix `F̃ = exp(−[Log(τU ⊕ τV), I])·exp([Ū, I])·exp([V̄, I])`
/// through which the ONB gyration acts.
pub fn onb_gyr_matrix(u: &OnbFrame, v: &OnbFrame) -> Result<Mat> {
    same_shape((u.n(), u.p()), (v.n(), v.p()))?;
    let ub = onb_log_identity(u)?;
    let vb = onb_log_identity(v)?;
    let sum = gr_log_identity(&gr_add(&tau(u), &tau(v))?)?;
    Ok(sum.scale(-1.0).flow() * ub.flow() * vb.flow())
}

/// `g̃yr[U, V]W = F̃·W`
pub fn onb_gyr(u: &OnbFrame, v: &OnbFrame, w: &OnbFrame) -> Result<OnbFrame> {
    same_shape((u.n(), u.p()), (w.n(), w.p()))?;
    OnbFrame::from_closed_form(onb_gyr_matrix(u, v)? * w.as_mat())
}

/// `⟨Log(P), Log(Q)⟩_F`
pub fn gr_inner(p: &Projector, q: &Projector) -> Result<f64> {
    same_shape((p.n(), p.p()), (q.n(), q.p()))?;
    Ok(gr_log_identity(p)?.inner(&gr_log_identity(q)?))
}

pub fn gr_norm(p: &Projector) -> Result<f64> {
    Ok(gr_log_identity(p)?.norm())
}

/// `‖⊖P ⊕ Q‖`
pub fn gr_gyrodistance(p: &Projector, q: &Projector) -> Result<f64> {
    gr_norm(&gr_add(&gr_inverse(p)?, q)?)
}

/// Principal angles between `span(U)` and `span(V)`, ascending.
///
/// Equal to `arccos(clamp(σᵢ(UᵀV), 0, 1))`; small angles are taken from the
/// singular values of `V − U·UᵀV` instead, where arccos loses precision.
pub fn principal_angles(u: &OnbFrame, v: &OnbFrame) -> Result<Vec<f64>> {
    same_shape((u.n(), u.p()), (v.n(), v.p()))?;
    let utv = u.as_mat().transpose() * v.as_mat();
    let resid = v.as_mat() - u.as_mat() * &utv;
    let mut cos: Vec<f64> = singular_values(&utv).iter().map(|s| s.clamp(0.0, 1.0)).collect();
    let mut sin: Vec<f64> = singular_values(&resid).iter().map(|s| s.clamp(0.0, 1.0)).collect();
    cos.sort_by(|a, b| b.total_cmp(a));
    sin.sort_by(|a, b| a.total_cmp(b));
    Ok(cos
        .iter()
        .zip(&sin)
        .map(|(&c, &s)| if c * c >= 0.5 { s.asin() } else { c.acos() })
        .collect())
}

/// `‖θ‖₂` over the principal angles.
pub fn principal_angle_distance(u: &OnbFrame, v: &OnbFrame) -> Result<f64> {
    Ok(principal_angles(u, v)?.iter().map(|t| t * t).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn line(theta: f64) -> OnbFrame {
        OnbFrame::from_row_slice(2, 1, &[theta.cos(), theta.sin()]).unwrap()
    }

    fn close(a: &Mat, b: &Mat, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    /// Frame `exp([[0,−B],[Bᵀ,0]])·Ĩ·O`: principal angles bounded by ‖B‖₂,
    /// basis rotated by `O`.
    fn frame_strategy(n: usize, p: usize, max_angle: f64) -> impl Strategy<Value = OnbFrame> {
        (
            proptest::collection::vec(-1.0f64..1.0, p * (n - p)),
            proptest::collection::vec(-1.0f64..1.0, p * p),
        )
            .prop_map(move |(bv, ov)| {
                let b = Mat::from_row_slice(p, n - p, &bv);
                let s = b.norm().max(1e-12);
                let x = GrTangentAtI::new(n, b * (max_angle / s)).unwrap();
                let u = x.flow() * identity_frame_matrix(n, p);
                let o = nalgebra::QR::new(Mat::from_row_slice(p, p, &ov) + Mat::identity(p, p) * 2.0).q();
                OnbFrame::new(u * o).unwrap()
            })
    }

    #[test]
    fn tau_examples() {
        let ip = tau(&OnbFrame::identity(4, 2).unwrap());
        assert_eq!(ip.as_mat(), &identity_projector_matrix(4, 2));
        let t = 0.7;
        let p = tau(&line(t));
        let want = Mat::from_row_slice(2, 2, &[t.cos().powi(2), t.cos() * t.sin(), t.cos() * t.sin(), t.sin().powi(2)]);
        assert!(close(p.as_mat(), &want, 1e-15));
        assert!(Projector::new(p.as_mat().clone()).is_ok());
    }

    #[test]
    fn admission() {
        assert!(matches!(OnbFrame::from_row_slice(2, 1, &[1.0, 1.0]), Err(GyroError::NotOrthonormal(_))));
        assert!(matches!(Projector::new(Mat::identity(2, 2) * 0.5), Err(GyroError::NotProjector(_))));
        assert!(matches!(OnbFrame::new(Mat::identity(2, 2)), Err(GyroError::DimMismatch(_))));
    }

    #[test]
    fn log_examples() {
        let zero = gr_log_identity(&Projector::identity(5, 2).unwrap()).unwrap();
        assert!(zero.block().norm() < 1e-15);
        let x = gr_log_identity(&tau(&line(0.3))).unwrap();
        assert!((x.block()[(0, 0)] - 0.3).abs() < 1e-14);
        let perp = tau(&line(FRAC_PI_2));
        assert!(matches!(gr_log_identity(&perp), Err(GyroError::CutLocus(_))));
        assert!(matches!(onb_log_identity(&line(FRAC_PI_2)), Err(GyroError::CutLocus(_))));
    }

    #[test]
    fn exp_examples() {
        let id = gr_exp_identity(&GrTangentAtI::zero(4, 2).unwrap()).unwrap();
        assert_eq!(id.as_mat(), &identity_projector_matrix(4, 2));
        let t = 1.1;
        let x = GrTangentAtI::new(2, Mat::from_element(1, 1, t)).unwrap();
        assert!(close(gr_exp_identity(&x).unwrap().as_mat(), tau(&line(t)).as_mat(), 1e-14));
    }

    #[test]
    fn projector_ops_on_lines() {
        let (a, b) = (0.3, 0.5);
        let sum = gr_add(&tau(&line(a)), &tau(&line(b))).unwrap();
        assert!(close(sum.as_mat(), tau(&line(a + b)).as_mat(), 1e-14));
        let q = tau(&line(0.4));
        let id = Projector::identity(2, 1).unwrap();
        assert!(close(gr_add(&id, &q).unwrap().as_mat(), q.as_mat(), 1e-14));
        let back = gr_add(&gr_inverse(&q).unwrap(), &q).unwrap();
        assert!(close(back.as_mat(), id.as_mat(), 1e-14));
    }

    #[test]
    fn frame_ops_on_lines() {
        let id = OnbFrame::identity(2, 1).unwrap();
        let v = line(0.9);
        assert!(close(onb_add(&id, &v).unwrap().as_mat(), v.as_mat(), 1e-15));
        let u = onb_add(&line(0.35), &id).unwrap();
        assert!(close(u.as_mat(), line(0.35).as_mat(), 1e-14));
        assert!(close(onb_scale(0.0, &v).unwrap().as_mat(), id.as_mat(), 1e-15));
        let doubled = onb_scale(2.0, &line(0.2)).unwrap();
        assert!(close(doubled.as_mat(), line(0.4).as_mat(), 1e-14));
        let once = onb_scale(1.0, &line(-0.2)).unwrap();
        assert!(close(tau(&once).as_mat(), tau(&line(-0.2)).as_mat(), 1e-14));
        let w = line(0.1);
        assert!(close(onb_gyr(&id, &v, &w).unwrap().as_mat(), w.as_mat(), 1e-14));
        assert!(matches!(onb_add(&line(FRAC_PI_2), &v), Err(GyroError::CutLocus(_))));
    }

    #[test]
    fn inner_and_distance_examples() {
        let q = tau(&line(0.4));
        assert!(gr_inner(&Projector::identity(2, 1).unwrap(), &q).unwrap().abs() < 1e-15);
        assert!(gr_gyrodistance(&q, &q).unwrap() < 1e-14);
        let theta = 0.6;
        let d = gr_gyrodistance(&tau(&line(0.0)), &tau(&line(theta))).unwrap();
        assert!((d - theta * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn principal_angle_examples() {
        let u = line(0.0);
        assert_eq!(principal_angle_distance(&u, &u).unwrap(), 0.0);
        assert!((principal_angle_distance(&u, &line(FRAC_PI_2)).unwrap() - FRAC_PI_2).abs() < 1e-15);
        for k in 1..=15 {
            let t = 0.1 * k as f64;
            assert!((principal_angle_distance(&u, &line(t)).unwrap() - t).abs() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn exp_log_roundtrip(u in frame_strategy(6, 2, 1.2)) {
            let q = tau(&u);
            let x = gr_log_identity(&q).unwrap();
            prop_assert!(close(gr_exp_identity(&x).unwrap().as_mat(), q.as_mat(), 1e-9));
            let angles = principal_angles(&OnbFrame::identity(6, 2).unwrap(), &u).unwrap();
            let mut sv: Vec<f64> = singular_values(x.block()).iter().copied().collect();
            sv.sort_by(|a, b| a.total_cmp(b));
            for (a, s) in angles.iter().zip(&sv) {
                prop_assert!((a - s).abs() < 1e-9);
            }
        }

        #[test]
        fn frame_ops_commute_with_tau(u in frame_strategy(5, 2, 0.5), v in frame_strategy(5, 2, 0.5), w in frame_strategy(5, 2, 0.5), t in -2.0f64..2.0) {
            let sum = onb_add(&u, &v).unwrap();
            prop_assert!(close(tau(&sum).as_mat(), gr_add(&tau(&u), &tau(&v)).unwrap().as_mat(), 1e-9));
            let scaled = onb_scale(t, &u).unwrap();
            prop_assert!(close(tau(&scaled).as_mat(), gr_scale(t, &tau(&u)).unwrap().as_mat(), 1e-9));
            let g = onb_gyr(&u, &v, &w).unwrap();
            let want = gr_gyr(&tau(&u), &tau(&v), &tau(&w)).unwrap();
            prop_assert!(close(tau(&g).as_mat(), want.as_mat(), 1e-9));
            let f = onb_gyr_matrix(&u, &v).unwrap();
            prop_assert!((f.transpose() * &f - Mat::identity(5, 5)).norm() < 1e-10);
        }

        #[test]
        fn principal_distance_ignores_basis(u in frame_strategy(6, 3, 1.0), ov in proptest::collection::vec(-1.0f64..1.0, 9)) {
            let o = nalgebra::QR::new(Mat::from_row_slice(3, 3, &ov) + Mat::identity(3, 3) * 2.0).q();
            let d = principal_angle_distance(&u, &u.rotate(&o).unwrap()).unwrap();
            prop_assert!(d < 1e-10, "{}", d);
        }
    }
}
