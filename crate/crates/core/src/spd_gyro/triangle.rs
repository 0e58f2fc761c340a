use crate::error::{GyroError, Result};
use crate::matker::{Mat, SpdMatrix};

use super::{angle_between, identity_coords, spd_add, spd_inverse, SpdMetric};

/// Sides, angles and law residuals of the gyrotriangle `PQR`.
///
/// Side `p` is opposite vertex `P`, i.e. `p = ‖⊖Q ⊕ R‖`; angle `alpha` sits at
/// `P`, and likewise for the other two.
#[derive(Debug, Clone, PartialEq)]
pub struct GyroTriangleReport {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// `|a² − (b² + c² − 2bc·cos θ)| / (1 + a²)` for each side `a` in `(p, q, r)`.
    pub cosine_residuals: [f64; 3],
    /// Largest pairwise gap between `sin α/p`, `sin β/q` and `sin γ/r`,
    /// relative to `1 +` the largest ratio.
    pub sine_residual: f64,
}

impl GyroTriangleReport {
    pub fn max_residual(&self) -> f64 {
        self.cosine_residuals
            .iter()
            .copied()
            .fold(self.sine_residual, f64::max)
    }
}

fn gyrovector(m: SpdMetric, from: &SpdMatrix, to: &SpdMatrix) -> Result<Mat> {
    identity_coords(m, &spd_add(m, &spd_inverse(m, from)?, to)?)
}

/// Evaluates the laws of gyrocosines and gyrosines on the triangle `PQR`.
/// Only the flat metrics (LE, LC) are accepted.
pub fn gyrotriangle_laws(
    m: SpdMetric,
    p: &SpdMatrix,
    q: &SpdMatrix,
    r: &SpdMatrix,
) -> Result<GyroTriangleReport> {
    if !m.is_flat() {
        return Err(GyroError::InvalidConfig(format!(
            "triangle laws are stated for the le and lc metrics, not {m}"
        )));
    }
    let (pq, pr) = (gyrovector(m, p, q)?, gyrovector(m, p, r)?);
    let (qp, qr) = (gyrovector(m, q, p)?, gyrovector(m, q, r)?);
    let (rp, rq) = (gyrovector(m, r, p)?, gyrovector(m, r, q)?);

    let side_p = qr.norm();
    let side_q = pr.norm();
    let side_r = pq.norm();
    let alpha = angle_between(&pq, &pr)?;
    let beta = angle_between(&qp, &qr)?;
    let gamma = angle_between(&rp, &rq)?;

    let cosine = |a: f64, b: f64, c: f64, theta: f64| {
        (a * a - (b * b + c * c - 2.0 * b * c * theta.cos())).abs() / (1.0 + a * a)
    };
    let cosine_residuals = [
        cosine(side_p, side_q, side_r, alpha),
        cosine(side_q, side_p, side_r, beta),
        cosine(side_r, side_p, side_q, gamma),
    ];

    let ratios = [
        alpha.sin() / side_p,
        beta.sin() / side_q,
        gamma.sin() / side_r,
    ];
    let top = ratios.iter().copied().fold(0.0, f64::max);
    let mut gap: f64 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            gap = gap.max((ratios[i] - ratios[j]).abs());
        }
    }

    Ok(GyroTriangleReport {
        p: side_p,
        q: side_q,
        r: side_r,
        alpha,
        beta,
        gamma,
        cosine_residuals,
        sine_residual: gap / (1.0 + top),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spd_gyro::spd_scale;
    use crate::testkit::spd_strategy;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn diag(d: &[f64]) -> SpdMatrix {
        SpdMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn commuting_diagonal_triangle() {
        // log-coordinates (0,0,0), (1,0,0), (½, √3/2, 0): an equilateral triangle
        let p = SpdMatrix::identity(3);
        let q = diag(&[E, 1.0, 1.0]);
        let r = diag(&[E.sqrt(), (3f64.sqrt() / 2.0).exp(), 1.0]);
        for m in [SpdMetric::Le, SpdMetric::Lc] {
            let rep = gyrotriangle_laws(m, &p, &q, &r).unwrap();
            assert!(rep.max_residual() < 1e-10, "{m}: {rep:?}");
        }
        let rep = gyrotriangle_laws(SpdMetric::Le, &p, &q, &r).unwrap();
        for side in [rep.p, rep.q, rep.r] {
            assert!((side - 1.0).abs() < 1e-12);
        }
        for angle in [rep.alpha, rep.beta, rep.gamma] {
            assert!((angle - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn collinear_triangle_is_flat() {
        let q = SpdMatrix::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap();
        for m in [SpdMetric::Le, SpdMetric::Lc] {
            let p = spd_scale(m, -1.0, &q).unwrap();
            let r = spd_scale(m, 2.0, &q).unwrap();
            // Q sits between P and R
            let rep = gyrotriangle_laws(m, &p, &r, &q).unwrap();
            assert!((rep.gamma - PI).abs() < 1e-6, "{m}: {}", rep.gamma);
            assert!(rep.max_residual() < 1e-10, "{m}: {rep:?}");
        }
    }

    #[test]
    fn affine_invariant_is_rejected() {
        let i = SpdMatrix::identity(2);
        assert!(matches!(
            gyrotriangle_laws(SpdMetric::Ai, &i, &i, &i),
            Err(GyroError::InvalidConfig(_))
        ));
    }

    #[test]
    fn coincident_vertices_are_degenerate() {
        let i = SpdMatrix::identity(2);
        let q = diag(&[2.0, 1.0]);
        assert_eq!(
            gyrotriangle_laws(SpdMetric::Le, &i, &i, &q).unwrap_err(),
            GyroError::DegenerateAngle
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn random_triangles_satisfy_both_laws(p in spd_strategy(3), q in spd_strategy(3), r in spd_strategy(3)) {
            for m in [SpdMetric::Le, SpdMetric::Lc] {
                let rep = gyrotriangle_laws(m, &p, &q, &r).unwrap();
                prop_assert!(rep.max_residual() < 1e-8, "{}: {:?}", m, rep);
            }
        }
    }
}
