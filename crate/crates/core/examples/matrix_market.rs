//! Writing and reading dense arrays in Matrix Market text form.

use l1homotopy::linalg::{mmio, DenseMatrix};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = DenseMatrix::from_rows(&[vec![1.0, -2.5, 0.0], vec![1e-300, 3.25, 7.0]])?;
    let text = mmio::to_string(&a);
    print!("{text}");

    let dir = std::env::temp_dir().join(format!("l1h-mm-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("a.mtx");
    mmio::write_matrix(&path, &a)?;
    let back = mmio::read_matrix(&path)?;
    assert_eq!(back, a);
    println!("round trip through {} is exact", path.display());

    // a malformed file reports its line
    let bad = dir.join("bad.mtx");
    std::fs::write(&bad, "%%MatrixMarket matrix array real general\n2 1\n1.0\nnope\n")?;
    if let Err(e) = mmio::read_matrix(&bad) {
        println!("rejected: {e}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
