//! Piecewise-constant and piecewise-smooth test signals.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rng::Rng;
use super::wavelet::{daub4_forward, haar_forward};
use crate::error::{Error, Result};

pub const BLOCKS_REGIONS: usize = 11;
pub const HEAVISINE_REGIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    Blocks,
    HeaviSine,
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignalKind::Blocks => "blocks",
            SignalKind::HeaviSine => "heavisine",
        })
    }
}

impl FromStr for SignalKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "blocks" => Ok(SignalKind::Blocks),
            "heavisine" => Ok(SignalKind::HeaviSine),
            other => Err(format!("unknown signal kind `{other}` (expected blocks or heavisine)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub n: usize,
    pub seed: u64,
}

impl SignalSpec {
    pub fn new(kind: SignalKind, n: usize, seed: u64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidInput(format!(
                "signal length must be a power of two of at least 16, got {n}"
            )));
        }
        Ok(SignalSpec { kind, n, seed })
    }
}

/// `count` distinct sorted boundaries drawn from `1..n`.
fn boundaries(rng: &mut Rng, n: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (1..n).collect();
    for k in 0..count {
        let j = k + rng.below(pool.len() - k);
        pool.swap(k, j);
    }
    let mut cuts = pool[..count].to_vec();
    cuts.sort_unstable();
    cuts
}

fn fill_regions(n: usize, cuts: &[usize], values: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut region = 0;
    for (t, v) in out.iter_mut().enumerate() {
        while region < cuts.len() && t >= cuts[region] {
            region += 1;
        }
        *v = values[region];
    }
    out
}

/// Eleven constant regions; the first is zero and each later one steps by a
/// uniform integer in `[−5, 5]`.
pub fn gen_blocks(spec: &SignalSpec) -> Vec<f64> {
    let mut rng = Rng::new(spec.seed);
    let cuts = boundaries(&mut rng, spec.n, BLOCKS_REGIONS - 1);
    let mut values = vec![0.0; BLOCKS_REGIONS];
    for r in 1..BLOCKS_REGIONS {
        values[r] = values[r - 1] + rng.int_inclusive(-5, 5) as f64;
    }
    fill_regions(spec.n, &cuts, &values)
}

fn heavisine(spec: &SignalSpec, offsets: bool) -> Vec<f64> {
    let mut rng = Rng::new(spec.seed);
    let amplitude = rng.uniform_range(4.0, 6.0);
    let cycles = rng.uniform_range(2.0, 2.5);
    let cuts = boundaries(&mut rng, spec.n, HEAVISINE_REGIONS - 1);
    let shifts: Vec<f64> = (0..HEAVISINE_REGIONS)
        .map(|_| if offsets { rng.gaussian() } else { 0.0 })
        .collect();
    let steps = fill_regions(spec.n, &cuts, &shifts);
    let n = spec.n as f64;
    steps
        .iter()
        .enumerate()
        .map(|(t, s)| amplitude * (std::f64::consts::TAU * cycles * t as f64 / n).sin() + s)
        .collect()
}

/// A sinusoid of 2 to 2.5 cycles with a Gaussian offset added on each of
/// three regions.
pub fn gen_heavisine(spec: &SignalSpec) -> Vec<f64> {
    heavisine(spec, true)
}

/// [`gen_heavisine`] without the regional offsets.
pub fn gen_heavisine_smooth(spec: &SignalSpec) -> Vec<f64> {
    heavisine(spec, false)
}

pub fn gen_signal(spec: &SignalSpec) -> Vec<f64> {
    match spec.kind {
        SignalKind::Blocks => gen_blocks(spec),
        SignalKind::HeaviSine => gen_heavisine(spec),
    }
}

/// Forward transform matched to the signal kind: Haar for blocks,
/// four-tap Daubechies for the sinusoid.
pub fn to_coefficients(kind: SignalKind, signal: &[f64]) -> Result<Vec<f64>> {
    match kind {
        SignalKind::Blocks => haar_forward(signal),
        SignalKind::HeaviSine => daub4_forward(signal),
    }
}

pub fn from_coefficients(kind: SignalKind, coeffs: &[f64]) -> Result<Vec<f64>> {
    match kind {
        SignalKind::Blocks => super::wavelet::haar_inverse(coeffs),
        SignalKind::HeaviSine => super::wavelet::daub4_inverse(coeffs),
    }
}
