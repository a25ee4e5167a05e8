//! Fixed inputs shared by the benchmarks.

use localdisc::SchmidtSpectrum;

/// `(1 - (d-1)t, t, …, t)` at `t = 1/(2d)`, a generic full-rank spectrum.
pub fn sample_spectrum(d: usize) -> SchmidtSpectrum {
    let t = 1.0 / (2 * d) as f64;
    let mut values = vec![t; d];
    values[0] = 1.0 - (d - 1) as f64 * t;
    SchmidtSpectrum::new(values).expect("valid by construction")
}
