//! Knowledge-graph link prediction with Grassmann embeddings: scoring,
//! ranking metrics and a small random-search fit.

use gyromat::kgc::{random_model, toy_fit};

fn main() -> gyromat::Result<()> {
    let mut model = random_model(4, 2, 8, 2, 0.5, 5)?;
    let triples: Vec<(usize, usize, usize)> = (0..8).map(|i| (i, i % 2, (i + 1 + i % 2) % 8)).collect();

    println!("score(e0, r0, e1) = {:.6}", model.score(0, 0, 1)?);
    println!("before fitting: {:?}", model.evaluate(&triples)?);
    let report = toy_fit(&mut model, &triples, 400, 0.2, 5)?;
    println!("loss {:.4} -> {:.4}", report.initial_loss, report.final_loss);
    println!("after fitting: {:?}", report.metrics);
    Ok(())
}
