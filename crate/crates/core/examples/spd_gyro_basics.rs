//! Gyroaddition, inverse, scaling and gyration on SPD matrices under the
//! Log-Euclidean, Log-Cholesky and affine-invariant metrics.

use gyromat::matker::SpdMatrix;
use gyromat::spd_gyro::{spd_add, spd_gyr, spd_gyrodistance, spd_inverse, spd_norm, spd_scale, SpdMetric};

fn main() -> gyromat::Result<()> {
    let p = SpdMatrix::from_row_slice(2, &[2.0, 0.4, 0.4, 1.0])?;
    let q = SpdMatrix::from_row_slice(2, &[1.0, -0.3, -0.3, 3.0])?;
    let r = SpdMatrix::from_diagonal(&[0.5, 2.0])?;

    for m in SpdMetric::ALL {
        println!("== {m} ==");
        let sum = spd_add(m, &p, &q)?;
        println!("P ⊕ Q = {}", sum.as_mat());
        let cancel = spd_add(m, &spd_inverse(m, &p)?, &sum)?;
        println!("‖⊖P ⊕ (P ⊕ Q) − Q‖ = {:.2e}", (cancel.as_mat() - q.as_mat()).norm());
        println!("0.5 ⊙ P = {}", spd_scale(m, 0.5, &p)?.as_mat());
        let g = spd_gyr(m, &p, &q, &r)?;
        println!("‖gyr[P, Q]R − R‖ = {:.2e}", (g.as_mat() - r.as_mat()).norm());
        println!("‖P‖ = {:.6}, d(P, Q) = {:.6}", spd_norm(m, &p)?, spd_gyrodistance(m, &p, &q)?);
    }
    Ok(())
}
