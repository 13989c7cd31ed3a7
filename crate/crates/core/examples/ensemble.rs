//! A small seeded ensemble, written as `trials.csv` and `summary.csv`.
//!
//! ```text
//! cargo run --release --example ensemble -- out-dir
//! ```

use l1homotopy::bench::{run_experiment, summarize, write_outputs, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "ensemble-out".into());
    let cfg = ExperimentConfig::from_toml_str(
        r#"
        kind = "blocks"
        n = [128]
        m_divisors = [2.0, 4.0]
        trials = 10
        reweight_iters = 5
        solvers = ["lasso", "irw", "arw"]
        seed = 2024
        "#,
    )?;
    let results = run_experiment(&cfg)?;
    write_outputs(dir.as_ref(), &results)?;

    for row in summarize(&results) {
        if row.metric == "ser_db" && row.iter + 1 == cfg.iterations_of(row.solver) {
            println!(
                "{:<6} M = {:>3}: SER {:6.2} ± {:5.2} dB over {} trials",
                row.solver, row.m, row.mean, row.stddev, row.count
            );
        }
    }
    println!("tables written to {dir}/");
    Ok(())
}
