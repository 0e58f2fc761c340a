//! Left gyrotranslation, gyration and inversion preserve the SPD gyrodistance.

use gyromat::spd_gyro::{spd_add, spd_gyr, spd_gyrodistance, spd_inverse, SpdMetric};
use gyromat::verify::{gen_spd, trial_rng};

fn main() -> gyromat::Result<()> {
    let mut rng = trial_rng(1, 0, 0);
    for m in SpdMetric::ALL {
        let [a, b, x, y] = [(); 4].map(|_| gen_spd(&mut rng, 3).map(|s| s.point));
        let (a, b, x, y) = (a?, b?, x?, y?);
        let d = spd_gyrodistance(m, &x, &y)?;
        let translated = spd_gyrodistance(m, &spd_add(m, &a, &x)?, &spd_add(m, &a, &y)?)?;
        let gyrated = spd_gyrodistance(m, &spd_gyr(m, &a, &b, &x)?, &spd_gyr(m, &a, &b, &y)?)?;
        let inverted = spd_gyrodistance(m, &spd_inverse(m, &x)?, &spd_inverse(m, &y)?)?;
        println!(
            "{m}: d = {d:.12}, after A⊕· {translated:.12}, after gyr {gyrated:.12}, after ⊖ {inverted:.12}"
        );
    }
    Ok(())
}
