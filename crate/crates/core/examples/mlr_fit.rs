//! Multinomial logistic regression on synthetic SPD clusters for each metric.

use gyromat::spd_gyro::SpdMetric;
use gyromat::spd_mlr::{demo_fit, mlr_probs, synthetic_clusters, BlockDiagSet, DemoConfig};

fn main() -> gyromat::Result<()> {
    let cfg = DemoConfig { samples: 150, ..DemoConfig::default() };
    let data = synthetic_clusters(cfg.n, cfg.classes, cfg.samples, cfg.noise, cfg.seed)?;
    for m in SpdMetric::ALL {
        let report = demo_fit(&cfg, m)?;
        println!(
            "{m}: loss {:.4} -> {:.6}, train accuracy {:.3}",
            report.initial_loss(),
            report.final_loss(),
            report.train_accuracy
        );
        let (x, y) = &data[0];
        let probs = mlr_probs(&report.model, &BlockDiagSet::single(x.clone()))?;
        println!("{m}: first sample, class {y}, probabilities {probs:.3?}");
    }
    Ok(())
}
