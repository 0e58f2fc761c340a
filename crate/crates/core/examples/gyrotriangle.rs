//! Sides, angles and the laws of gyrocosines and gyrosines for an SPD triangle.

use gyromat::matker::SpdMatrix;
use gyromat::spd_gyro::{gyrotriangle_laws, spd_gyroangle, SpdMetric};

fn main() -> gyromat::Result<()> {
    let p = SpdMatrix::from_row_slice(2, &[2.0, 0.4, 0.4, 1.0])?;
    let q = SpdMatrix::from_row_slice(2, &[1.0, -0.3, -0.3, 3.0])?;
    let r = SpdMatrix::from_diagonal(&[0.5, 2.0])?;
    for m in [SpdMetric::Le, SpdMetric::Lc] {
        let t = gyrotriangle_laws(m, &p, &q, &r)?;
        println!("{m}: sides ({:.6}, {:.6}, {:.6})", t.p, t.q, t.r);
        println!("{m}: angles ({:.6}, {:.6}, {:.6}), sum {:.6}", t.alpha, t.beta, t.gamma, t.alpha + t.beta + t.gamma);
        println!("{m}: law residuals {:.2e}", t.max_residual());
    }
    // Under the curved AI metric the angles are still defined but sum below π.
    let ai = [(&p, &q, &r), (&q, &r, &p), (&r, &p, &q)]
        .iter()
        .map(|(a, b, c)| spd_gyroangle(SpdMetric::Ai, a, b, c))
        .collect::<gyromat::Result<Vec<_>>>()?;
    println!("ai: angle sum {:.6}", ai.iter().sum::<f64>());
    Ok(())
}
