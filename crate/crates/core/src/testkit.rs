//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::matker::{LowerTriPos, Mat, SpdMatrix, SymMatrix};

fn entries(len: usize, lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(lo..hi, len)
}

/// `A·Aᵀ + 0.1·I` with entries of `A` in `[−1, 1]`.
pub fn spd_strategy(n: usize) -> impl Strategy<Value = SpdMatrix> {
    entries(n * n, -1.0, 1.0).prop_map(move |v| {
        let a = Mat::from_row_slice(n, n, &v);
        SpdMatrix::new(&a * a.transpose() + Mat::identity(n, n) * 0.1).unwrap()
    })
}

pub fn sym_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    entries(n * n, -1.0, 1.0)
        .prop_map(move |v| SymMatrix::from_symmetric_part(&Mat::from_row_slice(n, n, &v)))
}

pub fn lower_pos_strategy(n: usize) -> impl Strategy<Value = LowerTriPos> {
    (entries(n * n, -1.0, 1.0), entries(n, 0.2, 3.0)).prop_map(move |(v, d)| {
        let mut m = Mat::from_row_slice(n, n, &v);
        for i in 0..n {
            m[(i, i)] = d[i];
            for j in (i + 1)..n {
                m[(i, j)] = 0.0;
            }
        }
        LowerTriPos::new(m).unwrap()
    })
}
