//! Closed-form point-to-hypergyroplane distances against numeric minimization.

use gyromat::matker::{SpdMatrix, SymMatrix};
use gyromat::spd_gyro::SpdMetric;
use gyromat::spd_mlr::{
    blockdiag_dist, plane_dist, plane_distance_numeric, pseudodist_numeric, BlockDiagSet, Hypergyroplane,
    DEFAULT_BUDGET,
};
use gyromat::verify::trial_rng;

fn main() -> gyromat::Result<()> {
    let base = SpdMatrix::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0])?;
    let normal = SymMatrix::from_row_slice(2, &[1.0, 0.5, 0.5, -1.0])?;
    let x = SpdMatrix::from_diagonal(&[0.5, 3.0])?;
    let mut rng = trial_rng(3, 0, 0);

    for m in [SpdMetric::Le, SpdMetric::Lc] {
        let h = Hypergyroplane::new(m, base.clone(), normal.clone())?;
        let numeric = plane_distance_numeric(&h, &x, 1000, &mut rng)?;
        println!(
            "{m}: formula {:.8}, sampled {:.8}, refined {:.8}",
            plane_dist(&h, &x)?,
            numeric.sampled_min,
            numeric.refined_min
        );
    }
    let h = Hypergyroplane::new(SpdMetric::Ai, base.clone(), normal.clone())?;
    println!(
        "ai: pseudodistance {:.8}, numeric {:.8}",
        plane_dist(&h, &x)?,
        pseudodist_numeric(&h, &x, DEFAULT_BUDGET, &mut rng)?
    );

    let h2 = Hypergyroplane::new(SpdMetric::Ai, SpdMatrix::identity(2), SymMatrix::from_diagonal(&[1.0, 0.0]))?;
    let blocks = BlockDiagSet::new(vec![x.clone(), base])?;
    println!("ai: two-block distance {:.8}", blockdiag_dist(&[h, h2], &blocks)?);
    Ok(())
}
