//! Spectral kernels on SPD matrices: log/exp, powers, Cholesky, Fréchet derivatives.

use gyromat::matker::{
    cholesky, frechet_dexp, frechet_dlog, mat_exp, mat_log_spd, spd_pow, spd_sqrt, svd, sym_exp, Mat, SpdMatrix,
    SymMatrix,
};

fn main() -> gyromat::Result<()> {
    let p = SpdMatrix::from_row_slice(3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0])?;
    println!("P = {}", p.as_mat());
    println!("eigenvalues: {}", p.eig().values.transpose());

    let log = mat_log_spd(&p);
    let back = sym_exp(&log)?;
    println!("log P = {}", log.as_mat());
    println!("‖exp(log P) − P‖ = {:.2e}", (back.as_mat() - p.as_mat()).norm());

    let root = spd_sqrt(&p);
    println!("‖√P·√P − P‖ = {:.2e}", (root.as_mat() * root.as_mat() - p.as_mat()).norm());
    let cube = spd_pow(&p, 1.0 / 3.0)?;
    println!("‖(P^⅓)³ − P‖ = {:.2e}", (cube.as_mat().pow(3) - p.as_mat()).norm());

    let l = cholesky(&p)?;
    println!("‖L·Lᵀ − P‖ = {:.2e}", (l.as_mat() * l.as_mat().transpose() - p.as_mat()).norm());

    let a = Mat::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
    println!("exp of a rotation generator: {}", mat_exp(&a)?);

    let w = SymMatrix::from_row_slice(3, &[1.0, 0.3, 0.0, 0.3, -0.5, 0.1, 0.0, 0.1, 0.2])?;
    let dlog = frechet_dlog(&p, &w)?;
    let roundtrip = frechet_dexp(&log, &dlog)?;
    println!("‖Dexp(Dlog W) − W‖ = {:.2e}", (roundtrip.as_mat() - w.as_mat()).norm());

    let m = Mat::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    let d = svd(&m);
    println!("singular values of a 3×2 matrix: {}", d.s.transpose());
    Ok(())
}
