//! Gyrovector operations on the Grassmann manifold in the projector view.

use gyromat::grassmann::{
    gr_add, gr_exp_identity, gr_gyr, gr_gyrodistance, gr_inverse, gr_log_identity, gr_norm, gr_scale, OnbFrame,
    Projector, tau,
};

fn main() -> gyromat::Result<()> {
    let frame = |theta: f64, phi: f64| {
        OnbFrame::from_row_slice(4, 2, &[theta.cos(), 0.0, 0.0, phi.cos(), theta.sin(), 0.0, 0.0, phi.sin()])
    };
    let p = tau(&frame(0.3, 0.1)?);
    let q = tau(&frame(-0.2, 0.4)?);
    let r = tau(&frame(0.5, -0.3)?);
    let id = Projector::identity(4, 2)?;

    let sum = gr_add(&p, &q)?;
    println!("P ⊕ Q = {}", sum.as_mat());
    println!("‖⊖P ⊕ P − I‖ = {:.2e}", (gr_add(&gr_inverse(&p)?, &p)?.as_mat() - id.as_mat()).norm());
    println!("‖P‖ = {:.6}, ‖2 ⊙ P‖ = {:.6}", gr_norm(&p)?, gr_norm(&gr_scale(2.0, &p)?)?);
    println!("d(P, Q) = {:.6}", gr_gyrodistance(&p, &q)?);
    println!("‖gyr[P, Q]R − R‖ = {:.2e}", (gr_gyr(&p, &q, &r)?.as_mat() - r.as_mat()).norm());

    let x = gr_log_identity(&p)?;
    println!("Log_I P has block {}", x.block());
    println!("‖Exp_I(Log_I P) − P‖ = {:.2e}", (gr_exp_identity(&x)?.as_mat() - p.as_mat()).norm());
    Ok(())
}
