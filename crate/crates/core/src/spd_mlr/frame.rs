//! Orthonormal coordinates on a tangent space, on-plane sampling, and the
//! search-based distance oracles that the closed forms are checked against.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matker::{
    cholesky, congruence, frechet_dexp, frechet_dlog, mat_log_spd, spd_inv_sqrt, spd_sqrt,
    strict_lower, LowerTriPos, Mat, SpdMatrix, SymMatrix,
};
use crate::spd_gyro::{
    angle_between, identity_coords, lower_to_tangent, spd_add, spd_exp, spd_gyrodistance,
    spd_inverse, tangent_to_lower, SpdMetric, SymTangent,
};

use super::Hypergyroplane;

/// Number of random directions `pseudodist_numeric` starts from.
pub const DEFAULT_BUDGET: usize = 10_000;

const TOP_CANDIDATES: usize = 10;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Linear isometry between `(T_P, ⟨·,·⟩_P)` and Euclidean `R^{n(n+1)/2}`.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    n: usize,
    kind: FrameKind,
}

#[derive(Debug, Clone)]
enum FrameKind {
    Le { p: SpdMatrix, log_p: SymMatrix },
    Ai { h: Mat, hi: Mat },
    Lc { l: LowerTriPos },
}

fn vec_sym(y: &Mat) -> DVector<f64> {
    let n = y.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..i {
            out.push(std::f64::consts::SQRT_2 * y[(i, j)]);
        }
        out.push(y[(i, i)]);
    }
    DVector::from_vec(out)
}

fn unvec_sym(n: usize, v: &DVector<f64>) -> Mat {
    let mut y = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..i {
            let e = v[k] / std::f64::consts::SQRT_2;
            y[(i, j)] = e;
            y[(j, i)] = e;
            k += 1;
        }
        y[(i, i)] = v[k];
        k += 1;
    }
    y
}

fn vec_lower(y: &Mat) -> DVector<f64> {
    let n = y.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in 0..=i {
            out.push(y[(i, j)]);
        }
    }
    DVector::from_vec(out)
}

fn unvec_lower(n: usize, v: &DVector<f64>) -> Mat {
    let mut y = Mat::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in 0..=i {
            y[(i, j)] = v[k];
            k += 1;
        }
    }
    y
}

impl TangentFrame {
    pub fn new(metric: SpdMetric, p: &SpdMatrix) -> Result<Self> {
        let kind = match metric {
            SpdMetric::Le => FrameKind::Le {
                p: p.clone(),
                log_p: mat_log_spd(p),
            },
            SpdMetric::Ai => FrameKind::Ai {
                h: spd_sqrt(p).into_mat(),
                hi: spd_inv_sqrt(p).into_mat(),
            },
            SpdMetric::Lc => FrameKind::Lc { l: cholesky(p)? },
        };
        Ok(TangentFrame { n: p.order(), kind })
    }

    pub fn dim(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Coordinates whose Euclidean inner product is the metric at `P`.
    pub fn to_coords(&self, u: &Mat) -> DVector<f64> {
        match &self.kind {
            FrameKind::Le { p, .. } => {
                let y = frechet_dlog(p, &SymMatrix::from_symmetric_part(u)).expect("orders match");
                vec_sym(y.as_mat())
            }
            FrameKind::Ai { hi, .. } => vec_sym(&congruence(hi, u)),
            FrameKind::Lc { l } => {
                let x = tangent_to_lower(l, u);
                let mut y = strict_lower(&x);
                for i in 0..self.n {
                    y[(i, i)] = x[(i, i)] / l.as_mat()[(i, i)];
                }
                vec_lower(&y)
            }
        }
    }

    pub fn from_coords(&self, v: &DVector<f64>) -> SymMatrix {
        match &self.kind {
            FrameKind::Le { log_p, .. } => {
                let y = SymMatrix::from_symmetric_part(&unvec_sym(self.n, v));
                frechet_dexp(log_p, &y).expect("orders match")
            }
            FrameKind::Ai { h, .. } => SymMatrix::from_symmetric_part(&congruence(h, &unvec_sym(self.n, v))),
            FrameKind::Lc { l } => {
                let y = unvec_lower(self.n, v);
                let mut x = strict_lower(&y);
                for i in 0..self.n {
                    x[(i, i)] = y[(i, i)] * l.as_mat()[(i, i)];
                }
                SymMatrix::from_symmetric_part(&lower_to_tangent(l, &x))
            }
        }
    }
}

/// Orthonormal basis of the complement of `w`, from the Householder reflector
/// that maps `e₀` onto `±ŵ`.
fn complement_basis(w: &DVector<f64>) -> Vec<DVector<f64>> {
    let d = w.len();
    let u = w / w.norm();
    let mut v = u.clone();
    v[0] += if u[0] >= 0.0 { 1.0 } else { -1.0 };
    let vv = v.dot(&v);
    (1..d)
        .map(|j| {
            let mut col = &v * (-2.0 * v[j] / vv);
            col[j] += 1.0;
            col
        })
        .collect()
}

/// Tangent directions at `P` that are metric-orthogonal to the normal.
struct PlaneChart {
    metric: SpdMetric,
    base: SpdMatrix,
    frame: TangentFrame,
    basis: Vec<DVector<f64>>,
}

impl PlaneChart {
    fn new(h: &Hypergyroplane) -> Result<Self> {
        let frame = TangentFrame::new(h.metric(), h.base())?;
        let basis = complement_basis(&frame.to_coords(h.normal().as_mat()));
        Ok(PlaneChart {
            metric: h.metric(),
            base: h.base().clone(),
            frame,
            basis,
        })
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn point(&self, c: &[f64]) -> Result<SpdMatrix> {
        let mut v = DVector::zeros(self.frame.dim());
        for (ci, b) in c.iter().zip(&self.basis) {
            v.axpy(*ci, b, 1.0);
        }
        let w = SymTangent::new(self.base.clone(), self.frame.from_coords(&v))?;
        spd_exp(self.metric, &w)
    }
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// A point of `H`: `Exp_P(V)` for a Gaussian tangent `V ⊥ W` with unit spread.
pub fn plane_sample<R: Rng + ?Sized>(h: &Hypergyroplane, rng: &mut R) -> Result<SpdMatrix> {
    plane_sample_scaled(h, rng, 1.0)
}

/// As [`plane_sample`], with coordinates of standard deviation `scale` in an
/// orthonormal basis of the plane's tangent directions.
pub fn plane_sample_scaled<R: Rng + ?Sized>(
    h: &Hypergyroplane,
    rng: &mut R,
    scale: f64,
) -> Result<SpdMatrix> {
    let chart = PlaneChart::new(h)?;
    let c = gaussian(rng, chart.dim(), scale);
    chart.point(&c)
}

/// Golden-section minimization of `f` on `[lo, hi]`, stopping at width `tol`.
fn golden_min(mut lo: f64, mut hi: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate-wise golden-section descent from `start`. Each coordinate is
/// searched on `[lo, hi]`, computed from the current point; a step is only
/// taken if it improves the objective. Stops after `sweeps` sweeps or once a
/// sweep improves by less than `stop` relative.
fn coordinate_descent(
    start: Vec<f64>,
    start_value: f64,
    sweeps: usize,
    tol: f64,
    stop: f64,
    bracket: impl Fn(&[f64], usize) -> (f64, f64),
    mut f: impl FnMut(&[f64]) -> f64,
) -> (Vec<f64>, f64) {
    let (mut c, mut best) = (start, start_value);
    for _ in 0..sweeps {
        let before = best;
        for i in 0..c.len() {
            let (lo, hi) = bracket(&c, i);
            let mut probe = c.clone();
            let (xi, fi) = golden_min(lo, hi, tol, |t| {
                probe[i] = t;
                f(&probe)
            });
            if fi < best {
                c[i] = xi;
                best = fi;
            }
        }
        if before - best <= stop * best.abs() {
            break;
        }
    }
    (c, best)
}

/// Sampled and refined minimum of `d(X, Q)` over `Q ∈ H`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericPlaneDistance {
    pub sampled_min: f64,
    pub refined_min: f64,
}

/// Draws `samples` points of `H` around the base point and records the
/// smallest gyrodistance to `X`, then refines the best draw by coordinate-wise
/// golden-section search over the plane's tangent coordinates.
pub fn plane_distance_numeric<R: Rng + ?Sized>(
    h: &Hypergyroplane,
    x: &SpdMatrix,
    samples: usize,
    rng: &mut R,
) -> Result<NumericPlaneDistance> {
    let m = h.metric();
    let chart = PlaneChart::new(h)?;
    let reach = spd_gyrodistance(m, x, h.base())?;
    let spread = reach.max(0.1) / (chart.dim().max(1) as f64).sqrt();
    let dist = |c: &[f64]| -> f64 {
        chart
            .point(c)
            .and_then(|q| spd_gyrodistance(m, x, &q))
            .unwrap_or(f64::INFINITY)
    };

    let mut best = (vec![0.0; chart.dim()], reach);
    let mut sampled_min = f64::INFINITY;
    for _ in 0..samples {
        let c = gaussian(rng, chart.dim(), spread);
        let d = dist(&c);
        sampled_min = sampled_min.min(d);
        if d < best.1 {
            best = (c, d);
        }
    }

    let r = reach + 1.0;
    let (_, refined_min) = coordinate_descent(best.0, best.1, 4, 1e-10 * r, 1e-12, |_, _| (-r, r), dist);
    Ok(NumericPlaneDistance {
        sampled_min,
        refined_min,
    })
}

/// `sin(∠XPQ̄)·d(X, P)`, where `Q̄` maximizes the gyrocosine of the angle at `P`
/// over on-plane points. The maximization samples `budget` unit tangent
/// directions orthogonal to the normal and refines the best few by
/// coordinate-wise golden-section search. Returns 0 when `X` is `P`.
pub fn pseudodist_numeric<R: Rng + ?Sized>(
    h: &Hypergyroplane,
    x: &SpdMatrix,
    budget: usize,
    rng: &mut R,
) -> Result<f64> {
    let m = h.metric();
    let chart = PlaneChart::new(h)?;
    let inv_p = spd_inverse(m, h.base())?;
    let u = identity_coords(m, &spd_add(m, &inv_p, x)?)?;
    let d_xp = u.norm();
    if d_xp < 1e-14 || chart.dim() == 0 {
        return Ok(0.0);
    }
    let angle = |c: &[f64]| -> f64 {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        let unit: Vec<f64> = c.iter().map(|v| v / norm).collect();
        chart
            .point(&unit)
            .and_then(|q| identity_coords(m, &spd_add(m, &inv_p, &q)?))
            .and_then(|v| angle_between(&u, &v))
            .unwrap_or(f64::INFINITY)
    };

    let mut pool: Vec<(f64, Vec<f64>)> = (0..budget.max(1))
        .map(|_| {
            let c = gaussian(rng, chart.dim(), 1.0);
            (angle(&c), c)
        })
        .collect();
    pool.sort_by(|a, b| a.0.total_cmp(&b.0));
    pool.truncate(TOP_CANDIDATES);

    let mut best = f64::INFINITY;
    for (a0, c0) in pool {
        let norm = c0.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = c0.iter().map(|v| v / norm).collect();
        let bracket = |c: &[f64], i: usize| {
            let scale = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            (c[i] - 2.0 * scale, c[i] + 2.0 * scale)
        };
        let (_, a) = coordinate_descent(unit, a0, 50, 1e-7, 1e-10, bracket, angle);
        best = best.min(a);
    }
    Ok(best.sin() * d_xp)
}
