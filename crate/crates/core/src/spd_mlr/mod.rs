//! Hypergyroplanes on SPD manifolds, distances from points to them, and
//! multinomial logistic regression built on those distances.
//!
//! A plane `H = {Q : ⟨Log_P(Q), W⟩_P = 0}` is stored as its base point `P` and
//! normal `W`, a symmetric matrix read as a tangent at `P`. The closed-form
//! distances all share the shape `|num| / den`, where `num` is the metric's
//! version of `⟨Log_P(X), W⟩_P` and `den = ‖W‖_P`. [`PlaneScorer`] caches the
//! plane-side half of that computation.

mod frame;
mod trainer;

pub use frame::{
    plane_distance_numeric, plane_sample, plane_sample_scaled, pseudodist_numeric,
    NumericPlaneDistance, TangentFrame, DEFAULT_BUDGET,
};
pub use trainer::{demo_fit, mlr_fit_fd, synthetic_clusters, DemoConfig, FitConfig, FitReport, MAX_CLASSES, MAX_ORDER, MAX_SAMPLES};

use crate::error::{GyroError, Result};
use crate::matker::{
    block_diag, cholesky, congruence, frechet_dlog, half_lower, mat_log_spd,
    spd_inv_sqrt, strict_lower, LowerTriPos, Mat, SpdMatrix, SymMatrix,
};
use crate::spd_gyro::{spd_log, spd_tangent_inner, spd_tangent_norm, SpdMetric, SymTangent};

/// Normals whose metric norm falls below this are rejected.
pub const PLANE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Hypergyroplane {
    metric: SpdMetric,
    normal: SymTangent,
}

impl Hypergyroplane {
    pub fn new(metric: SpdMetric, base: SpdMatrix, normal: SymMatrix) -> Result<Self> {
        let normal = SymTangent::new(base, normal)?;
        if spd_tangent_norm(metric, &normal)? < PLANE_EPS {
            return Err(GyroError::DegeneratePlane);
        }
        Ok(Hypergyroplane { metric, normal })
    }

    pub fn metric(&self) -> SpdMetric {
        self.metric
    }

    pub fn base(&self) -> &SpdMatrix {
        self.normal.base()
    }

    pub fn normal(&self) -> &SymMatrix {
        self.normal.value()
    }

    pub fn normal_tangent(&self) -> &SymTangent {
        &self.normal
    }

    pub fn order(&self) -> usize {
        self.base().order()
    }

    /// `‖W‖_P`
    pub fn normal_norm(&self) -> f64 {
        spd_tangent_norm(self.metric, &self.normal).expect("validated on construction")
    }
}

/// `⟨Log_P(Q), W⟩_P`, through the generic logarithm and tangent metric.
pub fn plane_residual(h: &Hypergyroplane, q: &SpdMatrix) -> Result<f64> {
    let log = spd_log(h.metric(), h.base(), q)?;
    spd_tangent_inner(h.metric(), &log, h.normal_tangent())
}

/// Plane-side data for the closed-form distance of one metric.
///
/// Every numerator factors as `⟨A, B⟩_F`, with `A` depending on `(P, X)` and
/// `B` on `(P, W)`:
///
/// | metric | `A` | `B` |
/// |---|---|---|
/// | LE | `log X − log P` | `Dlog_P(W)` |
/// | LC | `⌊φ(X)⌋ − ⌊φ(P)⌋ + log(D(φ(P))⁻¹D(φ(X)))` | `⌊W̃⌋ + D(φ(P))⁻¹D(W̃)` |
/// | AI | `log(P^{-1/2}XP^{-1/2})` | `P^{-1/2}WP^{-1/2}` |
///
/// and `‖W‖_P = ‖B‖_F`.
#[derive(Debug, Clone)]
pub struct PlaneScorer {
    metric: SpdMetric,
    base: BaseSide,
    b: Mat,
    den: f64,
}

#[derive(Debug, Clone)]
enum BaseSide {
    Le { p: SpdMatrix, log_p: Mat },
    Lc { l: LowerTriPos },
    Ai { hi: Mat },
}

/// The part of a point the `A` factor needs, cached across planes.
#[derive(Debug, Clone)]
pub enum PointFeatures {
    Log(Mat),
    Chol(Mat),
    Raw(SpdMatrix),
}

impl PointFeatures {
    pub fn new(metric: SpdMetric, x: &SpdMatrix) -> Result<Self> {
        Ok(match metric {
            SpdMetric::Le => PointFeatures::Log(mat_log_spd(x).into_mat()),
            SpdMetric::Lc => PointFeatures::Chol(cholesky(x)?.into_mat()),
            SpdMetric::Ai => PointFeatures::Raw(x.clone()),
        })
    }

    fn order(&self) -> usize {
        match self {
            PointFeatures::Log(m) | PointFeatures::Chol(m) => m.nrows(),
            PointFeatures::Raw(x) => x.order(),
        }
    }
}

impl BaseSide {
    fn new(metric: SpdMetric, p: &SpdMatrix) -> Result<Self> {
        Ok(match metric {
            SpdMetric::Le => BaseSide::Le {
                p: p.clone(),
                log_p: mat_log_spd(p).into_mat(),
            },
            SpdMetric::Lc => BaseSide::Lc { l: cholesky(p)? },
            SpdMetric::Ai => BaseSide::Ai {
                hi: spd_inv_sqrt(p).into_mat(),
            },
        })
    }

    fn order(&self) -> usize {
        match self {
            BaseSide::Le { log_p, .. } => log_p.nrows(),
            BaseSide::Lc { l } => l.order(),
            BaseSide::Ai { hi } => hi.nrows(),
        }
    }

    fn normal_image(&self, w: &SymMatrix) -> Result<Mat> {
        Ok(match self {
            BaseSide::Le { p, .. } => frechet_dlog(p, w)?.into_mat(),
            BaseSide::Lc { l } => {
                let lm = l.as_mat();
                let white = lm
                    .solve_lower_triangular(w.as_mat())
                    .and_then(|a| lm.solve_lower_triangular(&a.transpose()))
                    .expect("positive diagonal makes φ(P) invertible");
                let w_tilde = lm * half_lower(&white);
                let mut b = strict_lower(&w_tilde);
                for i in 0..lm.nrows() {
                    b[(i, i)] = w_tilde[(i, i)] / lm[(i, i)];
                }
                b
            }
            BaseSide::Ai { hi } => congruence(hi, w.as_mat()),
        })
    }

    fn point_image(&self, f: &PointFeatures) -> Result<Mat> {
        Ok(match (self, f) {
            (BaseSide::Le { log_p, .. }, PointFeatures::Log(log_x)) => log_x - log_p,
            (BaseSide::Lc { l }, PointFeatures::Chol(lx)) => {
                let lp = l.as_mat();
                let mut a = strict_lower(lx) - strict_lower(lp);
                for i in 0..lp.nrows() {
                    a[(i, i)] = (lx[(i, i)] / lp[(i, i)]).ln();
                }
                a
            }
            (BaseSide::Ai { hi }, PointFeatures::Raw(x)) => {
                let inner = SpdMatrix::from_closed_form(&congruence(hi, x.as_mat()))?;
                mat_log_spd(&inner).into_mat()
            }
            _ => {
                return Err(GyroError::InvalidConfig(
                    "point features were prepared for another metric".into(),
                ))
            }
        })
    }
}

impl PlaneScorer {
    pub fn new(h: &Hypergyroplane) -> Result<Self> {
        Self::from_parts(h.metric(), h.base(), h.normal())
    }

    pub fn from_parts(metric: SpdMetric, p: &SpdMatrix, w: &SymMatrix) -> Result<Self> {
        if p.order() != w.order() {
            return Err(GyroError::DimMismatch(format!(
                "base of order {} and normal of order {}",
                p.order(),
                w.order()
            )));
        }
        let base = BaseSide::new(metric, p)?;
        let b = base.normal_image(w)?;
        let den = b.norm();
        if den < PLANE_EPS {
            return Err(GyroError::DegeneratePlane);
        }
        Ok(PlaneScorer { metric, base, b, den })
    }

    /// Same base point, different normal.
    pub fn with_normal(&self, w: &SymMatrix) -> Result<Self> {
        let b = self.base.normal_image(w)?;
        let den = b.norm();
        if den < PLANE_EPS {
            return Err(GyroError::DegeneratePlane);
        }
        Ok(PlaneScorer {
            metric: self.metric,
            base: self.base.clone(),
            b,
            den,
        })
    }

    pub fn metric(&self) -> SpdMetric {
        self.metric
    }

    /// `‖W‖_P` as read off the closed form.
    pub fn den(&self) -> f64 {
        self.den
    }

    /// The `B` factor.
    pub fn normal_image(&self) -> &Mat {
        &self.b
    }

    /// The `A` factor for a point.
    pub fn point_image(&self, f: &PointFeatures) -> Result<Mat> {
        if f.order() != self.base.order() {
            return Err(GyroError::DimMismatch(format!(
                "plane of order {} and point of order {}",
                self.base.order(),
                f.order()
            )));
        }
        self.base.point_image(f)
    }

    /// Signed numerator `⟨A, B⟩_F` of the closed form.
    pub fn num(&self, x: &SpdMatrix) -> Result<f64> {
        let f = PointFeatures::new(self.metric, x)?;
        Ok(self.point_image(&f)?.dot(&self.b))
    }

    /// `|num| / den`
    pub fn dist(&self, x: &SpdMatrix) -> Result<f64> {
        Ok(self.num(x)?.abs() / self.den)
    }
}

fn require_metric(h: &Hypergyroplane, m: SpdMetric) -> Result<()> {
    if h.metric() != m {
        return Err(GyroError::InvalidConfig(format!(
            "plane carries the {} metric, expected {m}",
            h.metric()
        )));
    }
    Ok(())
}

/// `|⟨log X − log P, Dlog_P(W)⟩_F| / ‖Dlog_P(W)‖_F`
pub fn dist_le(h: &Hypergyroplane, x: &SpdMatrix) -> Result<f64> {
    require_metric(h, SpdMetric::Le)?;
    PlaneScorer::new(h)?.dist(x)
}

/// `|⟨A, B⟩_F| / ‖B‖_F` with `A = −⌊φ(P)⌋ + ⌊φ(X)⌋ + log(D(φ(P))⁻¹D(φ(X)))` and
/// `B = ⌊W̃⌋ + D(φ(P))⁻¹D(W̃)`, `W̃ = φ(P)(φ(P)⁻¹Wφ(P)⁻ᵀ)_{1/2}`.
pub fn dist_lc(h: &Hypergyroplane, x: &SpdMatrix) -> Result<f64> {
    require_metric(h, SpdMetric::Lc)?;
    PlaneScorer::new(h)?.dist(x)
}

/// `|⟨log(P^{-1/2}XP^{-1/2}), P^{-1/2}WP^{-1/2}⟩_F| / ‖P^{-1/2}WP^{-1/2}‖_F`
pub fn pseudodist_ai(h: &Hypergyroplane, x: &SpdMatrix) -> Result<f64> {
    require_metric(h, SpdMetric::Ai)?;
    PlaneScorer::new(h)?.dist(x)
}

/// The metric's closed-form distance (a pseudo-distance for AI).
pub fn plane_dist(h: &Hypergyroplane, x: &SpdMatrix) -> Result<f64> {
    PlaneScorer::new(h)?.dist(x)
}

/// An ordered list of equally sized SPD blocks, read as `diag(X₁, …, X_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagSet {
    blocks: Vec<SpdMatrix>,
}

impl BlockDiagSet {
    pub fn new(blocks: Vec<SpdMatrix>) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| GyroError::DimMismatch("a block set needs at least one block".into()))?
            .order();
        if let Some(b) = blocks.iter().find(|b| b.order() != first) {
            return Err(GyroError::DimMismatch(format!(
                "block orders {first} and {} differ",
                b.order()
            )));
        }
        Ok(BlockDiagSet { blocks })
    }

    pub fn single(x: SpdMatrix) -> Self {
        BlockDiagSet { blocks: vec![x] }
    }

    pub fn blocks(&self) -> &[SpdMatrix] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_order(&self) -> usize {
        self.blocks[0].order()
    }

    /// The assembled `Nn × Nn` block-diagonal matrix.
    pub fn assemble(&self) -> SpdMatrix {
        let mats: Vec<&Mat> = self.blocks.iter().map(|b| b.as_mat()).collect();
        SpdMatrix::from_closed_form(&block_diag(&mats)).expect("blocks are SPD")
    }
}

fn block_terms(planes: &[Hypergyroplane], x: &BlockDiagSet) -> Result<(f64, f64)> {
    if planes.len() != x.len() {
        return Err(GyroError::DimMismatch(format!(
            "{} planes for {} blocks",
            planes.len(),
            x.len()
        )));
    }
    let metric = planes[0].metric();
    let (mut num, mut den2) = (0.0, 0.0);
    for (h, xi) in planes.iter().zip(x.blocks()) {
        if h.metric() != metric {
            return Err(GyroError::InvalidConfig("block planes mix metrics".into()));
        }
        let s = PlaneScorer::new(h)?;
        num += s.num(xi)?;
        den2 += s.den() * s.den();
    }
    Ok((num, den2.sqrt()))
}

/// Distance from `diag(X₁, …, X_N)` to the plane with base `diag(P₁, …, P_N)`
/// and normal `diag(W₁, …, W_N)`: per-block numerators summed, per-block
/// normal norms combined in quadrature.
pub fn blockdiag_dist(planes: &[Hypergyroplane], x: &BlockDiagSet) -> Result<f64> {
    let (num, den) = block_terms(planes, x)?;
    Ok(num.abs() / den)
}

/// One class of an MLR model: one plane per block.
#[derive(Debug, Clone, PartialEq)]
pub struct MlrClass {
    pub planes: Vec<Hypergyroplane>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlrModel {
    metric: SpdMetric,
    classes: Vec<MlrClass>,
}

impl MlrModel {
    pub fn new(metric: SpdMetric, classes: Vec<MlrClass>) -> Result<Self> {
        if classes.len() < 2 {
            return Err(GyroError::InvalidConfig(format!(
                "an MLR model needs at least 2 classes, got {}",
                classes.len()
            )));
        }
        let blocks = classes[0].planes.len();
        let order = classes[0]
            .planes
            .first()
            .ok_or_else(|| GyroError::InvalidConfig("a class needs at least one plane".into()))?
            .order();
        for c in &classes {
            if c.planes.len() != blocks {
                return Err(GyroError::DimMismatch("classes differ in block count".into()));
            }
            for h in &c.planes {
                if h.metric() != metric {
                    return Err(GyroError::InvalidConfig("class planes mix metrics".into()));
                }
                if h.order() != order {
                    return Err(GyroError::DimMismatch("class planes differ in order".into()));
                }
            }
        }
        Ok(MlrModel { metric, classes })
    }

    /// Single-block model from `(P_k, W_k)` pairs.
    pub fn from_planes(metric: SpdMetric, planes: Vec<Hypergyroplane>) -> Result<Self> {
        Self::new(
            metric,
            planes.into_iter().map(|h| MlrClass { planes: vec![h] }).collect(),
        )
    }

    pub fn metric(&self) -> SpdMetric {
        self.metric
    }

    pub fn classes(&self) -> &[MlrClass] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.classes[0].planes.len()
    }
}

/// `sign(⟨Log_P(X), W⟩_P) · ‖W‖_P · d(X, H_k)` for each class.
pub fn mlr_logits(model: &MlrModel, x: &BlockDiagSet) -> Result<Vec<f64>> {
    model
        .classes()
        .iter()
        .map(|c| {
            let (num, den) = block_terms(&c.planes, x)?;
            Ok(num.signum() * den * (num.abs() / den))
        })
        .collect()
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn mlr_probs(model: &MlrModel, x: &BlockDiagSet) -> Result<Vec<f64>> {
    Ok(softmax(&mlr_logits(model, x)?))
}

pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Evaluates the single-matrix closed form on the assembled block-diagonal data.
pub fn blockdiag_dist_assembled(planes: &[Hypergyroplane], x: &BlockDiagSet) -> Result<f64> {
    let bases: Vec<&Mat> = planes.iter().map(|h| h.base().as_mat()).collect();
    let normals: Vec<&Mat> = planes.iter().map(|h| h.normal().as_mat()).collect();
    let big = Hypergyroplane::new(
        planes[0].metric(),
        SpdMatrix::from_closed_form(&block_diag(&bases))?,
        SymMatrix::from_symmetric_part(&block_diag(&normals)),
    )?;
    plane_dist(&big, &x.assemble())
}
