//! Gaussian sensing, noise at a target SNR, and full problem instances.

use super::generators::{gen_signal, to_coefficients, SignalKind, SignalSpec};
use super::rng::{derive_seed, Rng};
use crate::error::{Error, Result};
use crate::linalg::{norm2, DenseMatrix};

/// `m × n` matrix with i.i.d. `N(0, 1/m)` entries (standard deviation `1/√m`).
pub fn gen_gaussian_matrix(m: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = Rng::new(seed);
    let sd = 1.0 / (m as f64).sqrt();
    let data = (0..m * n).map(|_| sd * rng.gaussian()).collect();
    DenseMatrix::new(m, n, data).expect("gaussian entries are finite")
}

/// Adds white noise with `σ = ‖clean‖ / (√M · 10^(snr/20))`.
///
/// An infinite `snr_db` adds nothing and reports `σ = 0`.
pub fn add_noise_at_snr(clean: &[f64], snr_db: f64, seed: u64) -> Result<(Vec<f64>, f64)> {
    let energy = norm2(clean);
    if energy == 0.0 {
        return Err(Error::contract("cannot set an SNR relative to a zero signal"));
    }
    if snr_db.is_nan() {
        return Err(Error::InvalidInput("SNR is not a number".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok((clean.to_vec(), 0.0));
    }
    let sigma = energy / ((clean.len() as f64).sqrt() * 10f64.powf(snr_db / 20.0));
    let mut rng = Rng::new(seed);
    let noisy = clean.iter().map(|c| c + sigma * rng.gaussian()).collect();
    Ok((noisy, sigma))
}

/// `τ = σ√(ln N)`.
pub fn default_tau(sigma: f64, n: usize) -> f64 {
    sigma * (n as f64).ln().sqrt()
}

/// A generated recovery problem: sparse coefficients, sensing matrix and
/// noisy measurements.
#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: SignalKind,
    pub n: usize,
    pub m: usize,
    pub snr_db: f64,
    pub seed: u64,
    pub a: DenseMatrix,
    pub y: Vec<f64>,
    pub xbar: Vec<f64>,
    pub sigma: f64,
    pub tau: f64,
}

impl Instance {
    /// Draws the signal, matrix and noise from streams derived from `seed`.
    ///
    /// Without noise the threshold falls back to `10⁻⁴‖Aᵀy‖∞`.
    pub fn generate(kind: SignalKind, n: usize, m: usize, snr_db: f64, seed: u64) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidInput(format!(
                "measurement count {m} must lie in 1..={n}"
            )));
        }
        let spec = SignalSpec::new(kind, n, derive_seed(seed, "signal", &[]))?;
        let xbar = to_coefficients(kind, &gen_signal(&spec))?;
        let a = gen_gaussian_matrix(m, n, derive_seed(seed, "matrix", &[]));
        let clean = a.matvec(&xbar)?;
        let (y, sigma) = add_noise_at_snr(&clean, snr_db, derive_seed(seed, "noise", &[]))?;
        let tau = if sigma > 0.0 {
            default_tau(sigma, n)
        } else {
            1e-4 * crate::homotopy::correlation_scale(&a, &y)
        };
        Ok(Instance {
            kind,
            n,
            m,
            snr_db,
            seed,
            a,
            y,
            xbar,
            sigma,
            tau,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_is_replayable() {
        assert_eq!(gen_gaussian_matrix(4, 6, 3), gen_gaussian_matrix(4, 6, 3));
        assert_ne!(gen_gaussian_matrix(4, 6, 3), gen_gaussian_matrix(4, 6, 4));
    }

    #[test]
    fn noiseless_sentinel() {
        let (y, s) = add_noise_at_snr(&[1.0, 2.0], f64::INFINITY, 0).unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
        assert_eq!(s, 0.0);
        assert!(add_noise_at_snr(&[0.0, 0.0], 40.0, 0).is_err());
    }

    #[test]
    fn instance_threshold() {
        let inst = Instance::generate(SignalKind::Blocks, 64, 32, 40.0, 1).unwrap();
        assert!((inst.tau - inst.sigma * (64f64).ln().sqrt()).abs() < 1e-15);
        assert_eq!(inst.y.len(), 32);
        assert!(Instance::generate(SignalKind::Blocks, 64, 65, 40.0, 1).is_err());
    }
}
