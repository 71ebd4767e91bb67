//! Band-limited rate reduction with a Kaiser-windowed sinc kernel.

use std::f64::consts::PI;

/// Kernel half-width in output-rate periods.
const HALF_WIDTH_PERIODS: f64 = 32.0;
const KAISER_BETA: f64 = 8.0;
/// Cutoff as a fraction of the output Nyquist frequency.
const CUTOFF_FRACTION: f64 = 0.95;

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Resamples `x` from `from_hz` to the lower rate `to_hz`.
/// Output sample `m` sits at input position `m * from_hz / to_hz`.
pub fn downsample(x: &[f64], from_hz: f64, to_hz: f64) -> Vec<f64> {
    assert!(
        to_hz > 0.0 && from_hz >= to_hz,
        "downsample only reduces the rate"
    );
    let step = from_hz / to_hz;
    let n_out = ((x.len() as f64) / step).floor() as usize;
    let cutoff = CUTOFF_FRACTION * to_hz / 2.0 / from_hz; // cycles per input sample
    let half = HALF_WIDTH_PERIODS * step;
    let norm = bessel_i0(KAISER_BETA);

    (0..n_out)
        .map(|m| {
            let centre = m as f64 * step;
            let lo = (centre - half).ceil().max(0.0) as usize;
            let hi = ((centre + half).floor() as usize).min(x.len() - 1);
            let mut acc = 0.0;
            for (n, &v) in x.iter().enumerate().take(hi + 1).skip(lo) {
                let d = n as f64 - centre;
                let u = d / half;
                let w = bessel_i0(KAISER_BETA * (1.0 - u * u).max(0.0).sqrt()) / norm;
                acc += v * 2.0 * cutoff * sinc(2.0 * cutoff * d) * w;
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(freq: f64, rate: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / rate).sin())
            .collect()
    }

    fn mid_energy(x: &[f64], skip: usize) -> f64 {
        let body = &x[skip..x.len() - skip];
        body.iter().map(|v| v * v).sum::<f64>() / body.len() as f64
    }

    #[test]
    fn passband_tone_keeps_its_power() {
        let y = downsample(&tone(1000.0, 44100.0, 8820), 44100.0, 11000.0);
        assert!((mid_energy(&y, 200) - 0.5).abs() < 0.01);
    }

    #[test]
    fn tone_above_new_nyquist_is_rejected() {
        let y = downsample(&tone(6000.0, 44100.0, 8820), 44100.0, 11000.0);
        assert!(mid_energy(&y, 200) < 0.005);
    }

    #[test]
    fn output_length_follows_ratio() {
        assert_eq!(downsample(&vec![0.0; 4410], 44100.0, 11000.0).len(), 1100);
    }
}
