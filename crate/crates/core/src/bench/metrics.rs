//! Recovery quality and summary statistics.

use crate::error::{Error, Result};
use crate::linalg::norm2;

/// Value reported when the estimate is exact.
pub const SER_CAP_DB: f64 = 300.0;

/// Signal-to-error ratio `20·log10(‖x̄‖ / ‖x̄ − x̂‖)`, capped at [`SER_CAP_DB`].
pub fn ser_db(x_true: &[f64], x_hat: &[f64]) -> Result<f64> {
    if x_true.len() != x_hat.len() {
        return Err(Error::contract(format!(
            "signal lengths differ: {} vs {}",
            x_true.len(),
            x_hat.len()
        )));
    }
    let signal = norm2(x_true);
    if signal == 0.0 {
        return Err(Error::contract("reference signal is zero"));
    }
    let err: Vec<f64> = x_true.iter().zip(x_hat).map(|(a, b)| a - b).collect();
    let error = norm2(&err);
    if error == 0.0 {
        return Ok(SER_CAP_DB);
    }
    Ok((20.0 * (signal / error).log10()).min(SER_CAP_DB))
}

/// Mean and sample standard deviation of a set of observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub stddev: f64,
    pub count: usize,
}

impl Stats {
    /// Single-pass accumulation; the deviation of a single value is zero and
    /// an empty input gives NaN for both moments.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stats {
        let (mut count, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in values {
            count += 1;
            let delta = v - mean;
            mean += delta / count as f64;
            m2 += delta * (v - mean);
        }
        match count {
            0 => Stats {
                mean: f64::NAN,
                stddev: f64::NAN,
                count,
            },
            1 => Stats {
                mean,
                stddev: 0.0,
                count,
            },
            _ => Stats {
                mean,
                stddev: (m2 / (count - 1) as f64).sqrt(),
                count,
            },
        }
    }
}
