//! Growing and shrinking a factored Gram matrix one column at a time, and
//! how far the updated factor drifts from a fresh one.

use l1homotopy::linalg::{refactorize, FactorMode, GramFactor};
use l1homotopy::signal::gen_gaussian_matrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = gen_gaussian_matrix(60, 200, 1);
    for mode in [FactorMode::Cholesky, FactorMode::Inverse] {
        let mut f = GramFactor::new(mode, a.rows());
        let mut next = 0;
        for round in 0..400usize {
            if f.order() < 30 || round % 3 != 0 {
                f.insert(&a, next % a.cols())?;
                next += 7;
            }
            if f.order() > 20 {
                f.remove(round % f.order())?;
            }
        }
        let fresh = refactorize(&a, f.columns(), mode)?;
        let rhs: Vec<f64> = (0..f.order()).map(|k| 1.0 / (k + 1) as f64).collect();
        let (u, v) = (f.solve(&rhs)?, fresh.solve(&rhs)?);
        let drift = u.iter().zip(&v).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        println!("{mode:?}: order {}, solve drift after 400 updates {drift:.2e}", f.order());
    }
    Ok(())
}
