//! Writes and reads the kind-tagged matrix documents used by the command-line tool.

use gyromat::cli::docs::{load_matrix, store_matrix, MatrixDocument};
use gyromat::grassmann::OnbFrame;
use gyromat::matker::SpdMatrix;

fn main() -> gyromat::Result<()> {
    let dir = std::env::temp_dir().join("gyromat-documents-example");
    std::fs::create_dir_all(&dir)?;
    let p = SpdMatrix::from_row_slice(2, &[2.0, 0.1, 0.1, std::f64::consts::PI])?;
    let path = dir.join("p.json");
    store_matrix(&MatrixDocument::from_spd(&p), &path)?;
    println!("{}", std::fs::read_to_string(&path)?);
    let back = load_matrix(&path)?.to_spd()?;
    println!("bitwise roundtrip: {}", back == p);

    let u = OnbFrame::from_row_slice(3, 1, &[0.6, 0.8, 0.0])?;
    let doc = MatrixDocument::from_onb(&u);
    println!("an onb document used as spd: {}", doc.to_spd().unwrap_err().name());
    Ok(())
}
