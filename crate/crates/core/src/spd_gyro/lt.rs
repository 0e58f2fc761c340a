//! Gyro-operations on lower-triangular matrices with positive diagonal, and the
//! maps that carry Log-Cholesky geometry through the Cholesky factor.

use crate::error::Result;
use crate::matker::{diag_part, half_lower, strict_lower, LowerTriPos, Mat};

fn map_diag(m: &Mat, f: impl Fn(f64) -> f64) -> Mat {
    Mat::from_diagonal(&m.diagonal().map(f))
}

/// `⌊U⌋ + ⌊V⌋ + D(U)·D(V)`
pub fn lt_add(u: &LowerTriPos, v: &LowerTriPos) -> Result<LowerTriPos> {
    let (u, v) = (u.as_mat(), v.as_mat());
    let out = strict_lower(u) + strict_lower(v) + diag_part(u) * diag_part(v);
    LowerTriPos::new(out)
}

/// `t·⌊U⌋ + D(U)ᵗ`
pub fn lt_scale(t: f64, u: &LowerTriPos) -> Result<LowerTriPos> {
    let u = u.as_mat();
    LowerTriPos::new(strict_lower(u) * t + map_diag(u, |d| d.powf(t)))
}

/// `−⌊U⌋ + D(U)⁻¹`
pub fn lt_inverse(u: &LowerTriPos) -> LowerTriPos {
    let u = u.as_mat();
    LowerTriPos::from_raw(-strict_lower(u) + map_diag(u, |d| 1.0 / d))
}

/// Coordinates of `L` at the identity: `⌊L⌋ + log D(L)`.
pub fn lt_coords(l: &LowerTriPos) -> Mat {
    let l = l.as_mat();
    strict_lower(l) + map_diag(l, f64::ln)
}

/// Logarithm on the triangular factor space: `⌊K⌋ − ⌊L⌋ + D(L)·log(D(L)⁻¹D(K))`.
pub fn lt_log(l: &LowerTriPos, k: &LowerTriPos) -> Mat {
    let (l, k) = (l.as_mat(), k.as_mat());
    let n = l.nrows();
    let mut out = strict_lower(k) - strict_lower(l);
    for i in 0..n {
        out[(i, i)] = l[(i, i)] * (k[(i, i)] / l[(i, i)]).ln();
    }
    out
}

/// Exponential on the triangular factor space: `⌊L⌋ + ⌊X⌋ + D(L)·exp(D(X)D(L)⁻¹)`.
pub fn lt_exp(l: &LowerTriPos, x: &Mat) -> Result<LowerTriPos> {
    let l = l.as_mat();
    let n = l.nrows();
    let mut out = strict_lower(l) + strict_lower(x);
    for i in 0..n {
        out[(i, i)] = l[(i, i)] * (x[(i, i)] / l[(i, i)]).exp();
    }
    LowerTriPos::new(out)
}

/// `L⁻¹·W·L⁻ᵀ` for symmetric `W`.
fn whiten(l: &Mat, w: &Mat) -> Mat {
    let a = l
        .solve_lower_triangular(w)
        .expect("positive diagonal makes L invertible");
    let at = a.transpose();
    l.solve_lower_triangular(&at)
        .expect("positive diagonal makes L invertible")
}

/// Differential of the Cholesky map at `P = L·Lᵀ`: `W ↦ L·(L⁻¹WL⁻ᵀ)_{1/2}`.
pub fn tangent_to_lower(l: &LowerTriPos, w: &Mat) -> Mat {
    let l = l.as_mat();
    l * half_lower(&whiten(l, w))
}

/// Inverse of [`tangent_to_lower`]: `X ↦ L·Xᵀ + X·Lᵀ`.
pub fn lower_to_tangent(l: &LowerTriPos, x: &Mat) -> Mat {
    let l = l.as_mat();
    let lx = l * x.transpose();
    &lx + lx.transpose()
}

/// Log-Cholesky metric on triangular tangents at `L`:
/// `⟨⌊X⌋,⌊Y⌋⟩ + ⟨D(L)⁻¹D(X), D(L)⁻¹D(Y)⟩`.
pub fn lt_metric(l: &LowerTriPos, x: &Mat, y: &Mat) -> f64 {
    let l = l.as_mat();
    let mut s = strict_lower(x).dot(&strict_lower(y));
    for i in 0..l.nrows() {
        let d = l[(i, i)];
        s += x[(i, i)] * y[(i, i)] / (d * d);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matker::cholesky;
    use crate::testkit::{lower_pos_strategy, spd_strategy, sym_strategy};
    use proptest::prelude::*;

    fn lt(n: usize, data: &[f64]) -> LowerTriPos {
        LowerTriPos::new(Mat::from_row_slice(n, n, data)).unwrap()
    }

    #[test]
    fn identity_and_zero_scale() {
        let v = lt(2, &[2.0, 0.0, -0.5, 0.3]);
        assert_eq!(lt_add(&LowerTriPos::identity(2), &v).unwrap(), v);
        assert_eq!(lt_scale(0.0, &v).unwrap(), LowerTriPos::identity(2));
        assert_eq!(lt_scale(1.0, &v).unwrap(), v);
    }

    #[test]
    fn inverse_is_left_inverse() {
        let v = lt(3, &[2.0, 0.0, 0.0, -0.5, 0.3, 0.0, 1.0, 4.0, 7.0]);
        let back = lt_add(&lt_inverse(&v), &v).unwrap();
        assert!((back.as_mat() - Mat::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn log_exp_examples() {
        let l = lt(2, &[2.0, 0.0, 1.0, 3.0]);
        assert!(lt_log(&l, &l).norm() < 1e-15);
        let x = lt_log(&LowerTriPos::identity(2), &l);
        assert!((x - lt_coords(&l)).norm() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn triangular_log_exp_roundtrip(l in lower_pos_strategy(4), k in lower_pos_strategy(4)) {
            let back = lt_exp(&l, &lt_log(&l, &k)).unwrap();
            prop_assert!((back.as_mat() - k.as_mat()).norm() < 1e-10 * (1.0 + k.as_mat().norm()));
        }

        #[test]
        fn tangent_correspondence_roundtrip(p in spd_strategy(4), w in sym_strategy(4)) {
            let l = cholesky(&p).unwrap();
            let x = tangent_to_lower(&l, w.as_mat());
            prop_assert_eq!(strict_lower(&x.transpose()), Mat::zeros(4, 4));
            let back = lower_to_tangent(&l, &x);
            prop_assert!((back - w.as_mat()).norm() < 1e-9 * (1.0 + w.norm()));
        }

        #[test]
        fn scalar_distributivity(u in lower_pos_strategy(3), s in -2.0f64..2.0, t in -2.0f64..2.0) {
            let lhs = lt_scale(s + t, &u).unwrap();
            let rhs = lt_add(&lt_scale(s, &u).unwrap(), &lt_scale(t, &u).unwrap()).unwrap();
            prop_assert!((lhs.as_mat() - rhs.as_mat()).norm() < 1e-10 * (1.0 + lhs.as_mat().norm()));
        }
    }
}
