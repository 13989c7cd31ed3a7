//! Orthonormal full-depth wavelet transforms with periodic boundaries.
//!
//! Coefficients are laid out as `[scaling, coarsest detail, ..., finest detail]`.

use crate::error::{Error, Result};

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn daub4_lowpass() -> [f64; 4] {
    let s = 4.0 * std::f64::consts::SQRT_2;
    [(1.0 + SQRT3) / s, (3.0 + SQRT3) / s, (3.0 - SQRT3) / s, (1.0 - SQRT3) / s]
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::contract(format!("transform length {n} is not a power of two")));
    }
    Ok(())
}

fn forward(x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len())?;
    let taps = h.len();
    let g: Vec<f64> = (0..taps)
        .map(|k| if k % 2 == 0 { h[taps - 1 - k] } else { -h[taps - 1 - k] })
        .collect();
    let mut out = x.to_vec();
    let mut len = x.len();
    let mut tmp = vec![0.0; len];
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (mut a, mut d) = (0.0, 0.0);
            for k in 0..taps {
                let v = out[(2 * i + k) % len];
                a += h[k] * v;
                d += g[k] * v;
            }
            tmp[i] = a;
            tmp[half + i] = d;
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len = half;
    }
    Ok(out)
}

fn inverse(c: &[f64], h: &[f64]) -> Result<Vec<f64>> {
    check_len(c.len())?;
    let taps = h.len();
    let g: Vec<f64> = (0..taps)
        .map(|k| if k % 2 == 0 { h[taps - 1 - k] } else { -h[taps - 1 - k] })
        .collect();
    let n = c.len();
    let mut out = c.to_vec();
    let mut tmp = vec![0.0; n];
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        tmp[..len].iter_mut().for_each(|v| *v = 0.0);
        for i in 0..half {
            let (a, d) = (out[i], out[half + i]);
            for k in 0..taps {
                tmp[(2 * i + k) % len] += h[k] * a + g[k] * d;
            }
        }
        out[..len].copy_from_slice(&tmp[..len]);
        len *= 2;
    }
    Ok(out)
}

pub fn haar_forward(x: &[f64]) -> Result<Vec<f64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    forward(x, &[r, r])
}

pub fn haar_inverse(c: &[f64]) -> Result<Vec<f64>> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    inverse(c, &[r, r])
}

/// Four-tap Daubechies analysis (two vanishing moments).
pub fn daub4_forward(x: &[f64]) -> Result<Vec<f64>> {
    forward(x, &daub4_lowpass())
}

pub fn daub4_inverse(c: &[f64]) -> Result<Vec<f64>> {
    inverse(c, &daub4_lowpass())
}
