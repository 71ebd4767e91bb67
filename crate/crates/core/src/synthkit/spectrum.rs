use serde::{Deserialize, Serialize};

use crate::spectrum::AveragedSpectrum;

/// Analytic spectral envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    /// Unit power on every bin inside `[lo_hz, hi_hz]`.
    Flat { lo_hz: f64, hi_hz: f64 },
    /// Gaussian power envelope truncated at ±3 sd.
    Gaussian { mean_hz: f64, sd_hz: f64 },
    /// Unit power on the bin nearest `hz`.
    Point { hz: f64 },
}

/// Frequency axis `k * bin_hz` for `k = 0..n_bins`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_bins: usize,
    pub bin_hz: f64,
}

impl Grid {
    pub fn nyquist_hz(&self) -> f64 {
        (self.n_bins - 1) as f64 * self.bin_hz
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("envelope {envelope:?} extends outside [0, {nyquist_hz}] Hz")]
pub struct OutOfBand {
    pub envelope: Envelope,
    pub nyquist_hz: f64,
}

pub fn synth_spectrum(envelope: Envelope, grid: Grid) -> Result<AveragedSpectrum, OutOfBand> {
    let nyq = grid.nyquist_hz();
    let (lo, hi) = match envelope {
        Envelope::Flat { lo_hz, hi_hz } => (lo_hz, hi_hz),
        Envelope::Gaussian { mean_hz, sd_hz } => (mean_hz - 3.0 * sd_hz, mean_hz + 3.0 * sd_hz),
        Envelope::Point { hz } => (hz, hz),
    };
    if !(lo >= 0.0 && hi <= nyq && lo <= hi) {
        return Err(OutOfBand {
            envelope,
            nyquist_hz: nyq,
        });
    }
    // tiny slack so that edges placed exactly on bins survive rounding
    let eps = 1e-9 * grid.bin_hz;
    let power = (0..grid.n_bins)
        .map(|k| {
            let f = k as f64 * grid.bin_hz;
            match envelope {
                Envelope::Flat { lo_hz, hi_hz } => {
                    if f >= lo_hz - eps && f <= hi_hz + eps {
                        1.0
                    } else {
                        0.0
                    }
                }
                Envelope::Gaussian { mean_hz, sd_hz } => {
                    let z = (f - mean_hz) / sd_hz;
                    if z.abs() <= 3.0 + 1e-12 {
                        (-0.5 * z * z).exp()
                    } else {
                        0.0
                    }
                }
                Envelope::Point { hz } => {
                    if k == (hz / grid.bin_hz).round() as usize {
                        1.0
                    } else {
                        0.0
                    }
                }
            }
        })
        .collect();
    Ok(AveragedSpectrum {
        power,
        bin_hz: grid.bin_hz,
        n_frames_averaged: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthkit::oracle::{direct_moments, discrete_uniform_moments};

    #[test]
    fn point_has_one_bin() {
        let s = synth_spectrum(
            Envelope::Point { hz: 1000.0 },
            Grid {
                n_bins: 513,
                bin_hz: 10.0,
            },
        )
        .unwrap();
        assert_eq!(s.power.iter().filter(|&&p| p != 0.0).count(), 1);
        assert_eq!(s.power[100], 1.0);
    }

    #[test]
    fn flat_matches_closed_form() {
        let grid = Grid {
            n_bins: 1025,
            bin_hz: 4000.0 / 511.0,
        };
        let s = synth_spectrum(
            Envelope::Flat {
                lo_hz: 0.0,
                hi_hz: 4000.0,
            },
            grid,
        )
        .unwrap();
        assert_eq!(s.power.iter().filter(|&&p| p > 0.0).count(), 512);
        let freqs: Vec<f64> = (0..s.power.len()).map(|k| k as f64 * s.bin_hz).collect();
        let got = direct_moments(&freqs, &s.power);
        let want = discrete_uniform_moments(0.0, grid.bin_hz, 512);
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 1e-12 * w.abs().max(1.0), "{g} vs {w}");
        }
    }

    #[test]
    fn gaussian_is_symmetric() {
        let s = synth_spectrum(
            Envelope::Gaussian {
                mean_hz: 800.0,
                sd_hz: 200.0,
            },
            Grid {
                n_bins: 513,
                bin_hz: 10.0,
            },
        )
        .unwrap();
        let freqs: Vec<f64> = (0..s.power.len()).map(|k| k as f64 * 10.0).collect();
        let m = direct_moments(&freqs, &s.power);
        assert!((m[0] - 800.0).abs() < 1e-9);
        assert!(m[2].abs() < 1e-10);
    }

    #[test]
    fn out_of_band() {
        let g = Grid {
            n_bins: 101,
            bin_hz: 10.0,
        };
        assert!(synth_spectrum(
            Envelope::Flat {
                lo_hz: 0.0,
                hi_hz: 1001.0
            },
            g
        )
        .is_err());
        assert!(synth_spectrum(
            Envelope::Gaussian {
                mean_hz: 100.0,
                sd_hz: 50.0
            },
            g
        )
        .is_err());
        assert!(synth_spectrum(Envelope::Point { hz: -1.0 }, g).is_err());
    }
}
