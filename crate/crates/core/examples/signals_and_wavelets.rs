//! The two synthetic test signals and how sparse they are in their wavelet
//! bases.

use l1homotopy::signal::{
    daub4_forward, daub4_inverse, gen_signal, haar_forward, haar_inverse, to_coefficients,
    SignalKind, SignalSpec,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for kind in [SignalKind::Blocks, SignalKind::HeaviSine] {
        let spec = SignalSpec::new(kind, 256, 42)?;
        let signal = gen_signal(&spec);
        let coeffs = to_coefficients(kind, &signal)?;

        let mut mags: Vec<f64> = coeffs.iter().map(|c| c.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let energy: f64 = mags.iter().map(|m| m * m).sum();
        let mut acc = 0.0;
        let k99 = mags
            .iter()
            .position(|m| {
                acc += m * m;
                acc >= 0.99 * energy
            })
            .map_or(mags.len(), |p| p + 1);
        let exact_zeros = coeffs.iter().filter(|c| c.abs() < 1e-12).count();
        println!("{kind}: {k99} coefficients carry 99% of the energy, {exact_zeros} are zero");
    }

    let x: Vec<f64> = (0..64).map(|i| ((i * i) % 17) as f64 - 8.0).collect();
    let h = haar_inverse(&haar_forward(&x)?)?;
    let d = daub4_inverse(&daub4_forward(&x)?)?;
    let err = |y: &[f64]| x.iter().zip(y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    println!("round trip error: haar {:.1e}, daub4 {:.1e}", err(&h), err(&d));
    Ok(())
}
