//! Synthetic sparse signals and simulated measurements.
//!
//! Signals are generated in the sample domain and mapped to wavelet
//! coefficients, which are the unknowns the solvers recover.

mod generators;
mod measure;
mod rng;
mod wavelet;

pub use generators::{
    from_coefficients, gen_blocks, gen_heavisine, gen_heavisine_smooth, gen_signal,
    to_coefficients, SignalKind, SignalSpec, BLOCKS_REGIONS, HEAVISINE_REGIONS,
};
pub use measure::{add_noise_at_snr, default_tau, gen_gaussian_matrix, Instance};
pub use rng::{derive_seed, Rng};
pub use wavelet::{daub4_forward, daub4_inverse, haar_forward, haar_inverse};
