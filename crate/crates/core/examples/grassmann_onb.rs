//! The orthonormal-frame view of the Grassmann manifold, principal angles and
//! the cut locus of the identity subspace.

use gyromat::grassmann::{onb_add, onb_gyr, onb_scale, principal_angle_distance, principal_angles, tau, gr_add, OnbFrame};

fn main() -> gyromat::Result<()> {
    let u = OnbFrame::from_row_slice(3, 1, &[0.8f64.cos(), 0.8f64.sin(), 0.0])?;
    let v = OnbFrame::from_row_slice(3, 1, &[0.9, 0.0, (1.0f64 - 0.81).sqrt()])?;

    let w = onb_add(&u, &v)?;
    println!("U ⊕ V = {}", w.as_mat().transpose());
    println!(
        "frame and projector sums agree to {:.2e}",
        (tau(&w).as_mat() - gr_add(&tau(&u), &tau(&v))?.as_mat()).norm()
    );
    println!("0.5 ⊙ U = {}", onb_scale(0.5, &u)?.as_mat().transpose());
    println!("gyr[U, V]U = {}", onb_gyr(&u, &v, &u)?.as_mat().transpose());
    println!("principal angles {:?}, distance {:.6}", principal_angles(&u, &v)?, principal_angle_distance(&u, &v)?);

    let orthogonal = OnbFrame::from_row_slice(3, 1, &[0.0, 1.0, 0.0])?;
    match onb_add(&orthogonal, &v) {
        Err(e) => println!("a frame orthogonal to the identity subspace: {}", e.name()),
        Ok(_) => println!("unexpectedly defined"),
    }
    Ok(())
}
