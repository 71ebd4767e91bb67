//! Time-averaged sonorant spectra and their first four moments.
//!
//! Frames are drawn from the central portion of the segment (10–90% by
//! default), Hamming-windowed, zero-padded to a power of two and averaged
//! bin-wise. The result is a one-sided power spectrum whose bins sum to the
//! mean windowed-frame energy.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::annotation::{time_to_index, AudioClip, Segment};

/// Shortest central span (in samples) that still yields a spectrum.
pub const MIN_SPAN_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectrumError {
    #[error(
        "segment too short: central span has {samples} samples (need at least {MIN_SPAN_SAMPLES})"
    )]
    SegmentTooShort { samples: usize },
    #[error("segment {start_s}..{end_s} s is invalid or outside the clip")]
    InvalidSegment { start_s: f64, end_s: f64 },
    #[error("invalid spectrum configuration: {0}")]
    InvalidConfig(String),
    #[error("spectrum has no power")]
    EmptySpectrum,
    #[error("spectrum is a point mass at {cog_hz} Hz; skewness and kurtosis are undefined")]
    DegenerateSpectrum { cog_hz: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub window_ms: f64,
    pub overlap: f64,
    /// Relative start and end of the analysed span inside the segment.
    pub span: (f64, f64),
    pub exclude_dc: bool,
    /// Upper frequency bound for moment computation; `None` uses the full axis.
    pub ceiling_hz: Option<f64>,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            window_ms: 20.0,
            overlap: 0.5,
            span: (0.10, 0.90),
            exclude_dc: false,
            ceiling_hz: None,
        }
    }
}

impl SpectrumConfig {
    fn validate(&self) -> Result<(), SpectrumError> {
        let bad = |m: &str| Err(SpectrumError::InvalidConfig(m.to_string()));
        if !(self.window_ms > 0.0 && self.window_ms.is_finite()) {
            return bad("window_ms must be positive");
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return bad("overlap must lie in [0, 1)");
        }
        let (lo, hi) = self.span;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return bad("span must satisfy 0 <= start < end <= 1");
        }
        if let Some(c) = self.ceiling_hz {
            if !(c > 0.0) {
                return bad("ceiling_hz must be positive");
            }
        }
        Ok(())
    }
}

/// One-sided power spectrum on the axis `k * bin_hz`, `k = 0..=N/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedSpectrum {
    pub power: Vec<f64>,
    pub bin_hz: f64,
    pub n_frames_averaged: usize,
}

impl AveragedSpectrum {
    pub fn frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_hz
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.frequency(self.power.len().saturating_sub(1))
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().sum()
    }
}

/// Center of gravity, spread, skewness and excess kurtosis of a spectrum,
/// plus the duration of the segment it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMoments {
    pub m1_cog: f64,
    pub m2_sd: f64,
    pub m3_skewness: f64,
    pub m4_kurtosis: f64,
    pub duration_ms: f64,
}

/// The four moments without duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

pub fn hamming(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * PI * n as f64 / denom).cos())
        .collect()
}

/// Frame layout over a central span: `(window length, hop, frame count)`.
pub fn frame_layout(
    span_len: usize,
    window_len: usize,
    hop: usize,
) -> Option<(usize, usize, usize)> {
    if span_len < MIN_SPAN_SAMPLES {
        return None;
    }
    if span_len < window_len {
        return Some((span_len, hop, 1));
    }
    Some((window_len, hop, (span_len - window_len) / hop + 1))
}

/// Welch-averaged power spectrum over the central span of `seg`.
pub fn averaged_spectrum(
    clip: &AudioClip,
    seg: &Segment,
    cfg: &SpectrumConfig,
) -> Result<AveragedSpectrum, SpectrumError> {
    cfg.validate()?;
    if !seg.is_valid() || seg.end_s > clip.duration_s() + 1e-9 {
        return Err(SpectrumError::InvalidSegment {
            start_s: seg.start_s,
            end_s: seg.end_s,
        });
    }
    let rate = clip.sample_rate();
    let dur = seg.duration_s();
    let lo = time_to_index(seg.start_s + cfg.span.0 * dur, rate);
    let hi = time_to_index(seg.start_s + cfg.span.1 * dur, rate).min(clip.samples().len());
    let span = &clip.samples()[lo.min(hi)..hi];
    spectrum_of_span(span, rate, cfg)
}

/// Welch average over an already-extracted span of samples.
pub fn spectrum_of_span(
    span: &[f64],
    sample_rate: u32,
    cfg: &SpectrumConfig,
) -> Result<AveragedSpectrum, SpectrumError> {
    cfg.validate()?;
    let window_len = ((cfg.window_ms * sample_rate as f64 / 1000.0).round() as usize).max(1);
    let hop = (((1.0 - cfg.overlap) * window_len as f64).round() as usize).max(1);
    let (window_len, hop, n_frames) =
        frame_layout(span.len(), window_len, hop).ok_or(SpectrumError::SegmentTooShort {
            samples: span.len(),
        })?;

    let n_fft = window_len.next_power_of_two();
    let window = hamming(window_len);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_fft);
    let n_bins = n_fft / 2 + 1;
    let mut power = vec![0.0; n_bins];
    let mut buf = vec![Complex::new(0.0, 0.0); n_fft];

    for f in 0..n_frames {
        let frame = &span[f * hop..f * hop + window_len];
        for (slot, (x, w)) in buf.iter_mut().zip(frame.iter().zip(&window)) {
            *slot = Complex::new(x * w, 0.0);
        }
        for slot in &mut buf[window_len..] {
            *slot = Complex::new(0.0, 0.0);
        }
        fft.process(&mut buf);
        for (k, p) in power.iter_mut().enumerate() {
            // interior bins carry both the positive and the negative frequency
            let fold = if k == 0 || k == n_fft / 2 { 1.0 } else { 2.0 };
            *p += fold * buf[k].norm_sqr();
        }
    }
    let scale = 1.0 / (n_fft as f64 * n_frames as f64);
    for p in &mut power {
        *p *= scale;
    }
    Ok(AveragedSpectrum {
        power,
        bin_hz: sample_rate as f64 / n_fft as f64,
        n_frames_averaged: n_frames,
    })
}

/// Power-weighted mean and standard deviation over all bins.
pub fn centroid_and_spread(spec: &AveragedSpectrum) -> Result<(f64, f64), SpectrumError> {
    band_centroid_and_spread(spec, 0, spec.power.len())
}

fn band_centroid_and_spread(
    spec: &AveragedSpectrum,
    lo: usize,
    hi: usize,
) -> Result<(f64, f64), SpectrumError> {
    let band = &spec.power[lo..hi];
    let total: f64 = band.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(SpectrumError::EmptySpectrum);
    }
    let mean = band
        .iter()
        .enumerate()
        .map(|(i, p)| spec.frequency(lo + i) * p)
        .sum::<f64>()
        / total;
    let var = band
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let d = spec.frequency(lo + i) - mean;
            d * d * p
        })
        .sum::<f64>()
        / total;
    Ok((mean, var.max(0.0).sqrt()))
}

/// Moments of the normalized power over the full 0–Nyquist axis.
pub fn spectral_moments(spec: &AveragedSpectrum) -> Result<Moments, SpectrumError> {
    moments_in_band(spec, false, None)
}

/// Moments restricted to a band: optionally without the DC bin and below `ceiling_hz`.
pub fn moments_in_band(
    spec: &AveragedSpectrum,
    exclude_dc: bool,
    ceiling_hz: Option<f64>,
) -> Result<Moments, SpectrumError> {
    let lo = usize::from(exclude_dc).min(spec.power.len());
    let hi = match ceiling_hz {
        Some(c) => spec
            .power
            .iter()
            .enumerate()
            .take_while(|(k, _)| spec.frequency(*k) <= c)
            .count(),
        None => spec.power.len(),
    }
    .max(lo);
    let (m1, m2) = band_centroid_and_spread(spec, lo, hi)?;
    if m2 <= 1e-9 * spec.bin_hz {
        return Err(SpectrumError::DegenerateSpectrum { cog_hz: m1 });
    }
    let band = &spec.power[lo..hi];
    let total: f64 = band.iter().sum();
    let (mut c3, mut c4) = (0.0, 0.0);
    for (i, p) in band.iter().enumerate() {
        let z = (spec.frequency(lo + i) - m1) / m2;
        let z2 = z * z;
        c3 += z2 * z * p;
        c4 += z2 * z2 * p;
    }
    Ok(Moments {
        m1,
        m2,
        m3: c3 / total,
        m4: c4 / total - 3.0,
    })
}

/// Segment duration in milliseconds.
pub fn duration_ms(seg: &Segment) -> f64 {
    (seg.end_s - seg.start_s) * 1000.0
}

/// Averaged spectrum, moments and duration of one sonorant.
pub fn analyze_sonorant(
    clip: &AudioClip,
    seg: &Segment,
    cfg: &SpectrumConfig,
) -> Result<(SpectralMoments, AveragedSpectrum), SpectrumError> {
    let spec = averaged_spectrum(clip, seg, cfg)?;
    let m = moments_in_band(&spec, cfg.exclude_dc, cfg.ceiling_hz)?;
    Ok((
        SpectralMoments {
            m1_cog: m.m1,
            m2_sd: m.m2,
            m3_skewness: m.m3,
            m4_kurtosis: m.m4,
            duration_ms: duration_ms(seg),
        },
        spec,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spectrum(power: Vec<f64>, bin_hz: f64) -> AveragedSpectrum {
        AveragedSpectrum {
            power,
            bin_hz,
            n_frames_averaged: 1,
        }
    }

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn point_mass_is_degenerate() {
        let mut p = vec![0.0; 513];
        p[100] = 3.0;
        let spec = spectrum(p, 10.0);
        assert_eq!(centroid_and_spread(&spec).unwrap(), (1000.0, 0.0));
        assert_eq!(
            spectral_moments(&spec),
            Err(SpectrumError::DegenerateSpectrum { cog_hz: 1000.0 })
        );
    }

    #[test]
    fn all_zero_power_is_empty() {
        assert_eq!(
            spectral_moments(&spectrum(vec![0.0; 10], 10.0)),
            Err(SpectrumError::EmptySpectrum)
        );
    }

    #[test]
    fn flat_spectrum_matches_discrete_uniform() {
        // 401 bins at 10 Hz: discrete uniform on {0, 10, ..., 4000}
        let spec = spectrum(vec![1.0; 401], 10.0);
        let m = spectral_moments(&spec).unwrap();
        let k = 401.0f64;
        let sd = 10.0 * ((k * k - 1.0) / 12.0).sqrt();
        let kurt = -6.0 * (k * k + 1.0) / (5.0 * (k * k - 1.0));
        assert!((m.m1 - 2000.0).abs() < 1e-9);
        assert!((m.m2 - sd).abs() < 1e-9);
        assert!(m.m3.abs() < 1e-12);
        assert!((m.m4 - kurt).abs() < 1e-9);
    }

    #[test]
    fn band_limits_drop_dc_and_high_bins() {
        let mut p = vec![1.0; 11];
        p[0] = 100.0;
        let spec = spectrum(p, 100.0);
        let m = moments_in_band(&spec, true, Some(500.0)).unwrap();
        // bins 1..=5 remain
        assert!((m.m1 - 300.0).abs() < 1e-12);
    }

    #[test]
    fn frame_count_for_eighty_ms_segment() {
        let clip = AudioClip::new(noise(44100, 1), 44100).unwrap();
        let seg = Segment::new("p", "m", 0.2, 0.28);
        let spec = averaged_spectrum(&clip, &seg, &SpectrumConfig::default()).unwrap();
        // span 64 ms = 2822 samples, window 882, hop 441: floor((2822 - 882) / 441) + 1
        assert_eq!(spec.n_frames_averaged, 5);
        assert_eq!(spec.power.len(), 513);
        assert!((spec.bin_hz - 44100.0 / 1024.0).abs() < 1e-12);
    }

    #[test]
    fn identical_frames_average_to_single_frame() {
        // period of 441 samples = hop, so every frame sees the same samples
        let rate = 44100;
        let x: Vec<f64> = (0..rate)
            .map(|n| (2.0 * PI * 100.0 * n as f64 / rate as f64).sin())
            .collect();
        let cfg = SpectrumConfig::default();
        let many = spectrum_of_span(&x[..882 + 4 * 441], rate as u32, &cfg).unwrap();
        let one = spectrum_of_span(&x[..882], rate as u32, &cfg).unwrap();
        assert_eq!(many.n_frames_averaged, 5);
        for (a, b) in many.power.iter().zip(&one.power) {
            assert!((a - b).abs() <= 1e-9 * one.total_power());
        }
    }

    #[test]
    fn parseval_against_time_domain_energy() {
        let x = noise(5000, 7);
        let cfg = SpectrumConfig::default();
        let spec = spectrum_of_span(&x, 44100, &cfg).unwrap();
        let w = hamming(882);
        let n = spec.n_frames_averaged;
        let oracle: f64 = (0..n)
            .map(|f| {
                x[f * 441..f * 441 + 882]
                    .iter()
                    .zip(&w)
                    .map(|(a, b)| (a * b).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / n as f64;
        assert!((spec.total_power() - oracle).abs() / oracle < 1e-9);
    }

    #[test]
    fn short_spans_fall_back_then_fail() {
        let cfg = SpectrumConfig::default();
        let short = spectrum_of_span(&noise(500, 3), 44100, &cfg).unwrap();
        assert_eq!(short.n_frames_averaged, 1);
        assert_eq!(short.power.len(), 257);
        assert_eq!(
            spectrum_of_span(&noise(63, 3), 44100, &cfg),
            Err(SpectrumError::SegmentTooShort { samples: 63 })
        );
    }

    #[test]
    fn duration_is_exact_difference() {
        assert!((duration_ms(&Segment::new("p", "m", 0.100, 0.184)) - 84.0).abs() < 1e-9);
        assert!((duration_ms(&Segment::new("p", "r", 0.0, 0.02477)) - 24.77).abs() < 1e-9);
        let (a, b, c) = (0.125, 0.25, 0.5);
        let ab = duration_ms(&Segment::new("p", "x", a, b));
        let bc = duration_ms(&Segment::new("p", "x", b, c));
        assert_eq!(ab + bc, duration_ms(&Segment::new("p", "x", a, c)));
    }

    proptest! {
        #[test]
        fn shift_moves_only_the_centroid(shift in 0usize..200, width in 5usize..100) {
            let n = 1024;
            let envelope: Vec<f64> = (0..width).map(|i| 1.0 + ((i * 7) % 5) as f64).collect();
            let place = |offset: usize| {
                let mut p = vec![0.0; n];
                p[offset..offset + width].copy_from_slice(&envelope);
                spectrum(p, 10.0)
            };
            let a = spectral_moments(&place(100)).unwrap();
            let b = spectral_moments(&place(100 + shift)).unwrap();
            prop_assert!((b.m1 - a.m1 - shift as f64 * 10.0).abs() < 1e-8);
            prop_assert!((b.m2 - a.m2).abs() < 1e-8);
            prop_assert!((b.m3 - a.m3).abs() < 1e-8);
            prop_assert!((b.m4 - a.m4).abs() < 1e-8);
        }

        #[test]
        fn kurtosis_bounded_by_skewness(power in proptest::collection::vec(0.0f64..10.0, 3..300)) {
            let spec = spectrum(power, 25.0);
            if let Ok(m) = spectral_moments(&spec) {
                prop_assert!(m.m4 >= m.m3 * m.m3 - 2.0 - 1e-9);
                prop_assert!(m.m4 >= -2.0 - 1e-9);
                prop_assert!(m.m1 >= 0.0 && m.m1 <= spec.nyquist_hz() + 1e-9);
            }
        }

        #[test]
        fn amplitude_scale_leaves_moments_unchanged(c in 1e-3f64..1e3, seed in 0u64..50) {
            let clip = AudioClip::new(noise(8000, seed), 16000).unwrap();
            let seg = Segment::new("p", "n", 0.05, 0.45);
            let cfg = SpectrumConfig::default();
            let (a, _) = analyze_sonorant(&clip, &seg, &cfg).unwrap();
            let (b, _) = analyze_sonorant(&clip.scaled(c), &seg, &cfg).unwrap();
            for (x, y) in [(a.m1_cog, b.m1_cog), (a.m2_sd, b.m2_sd), (a.m3_skewness, b.m3_skewness), (a.m4_kurtosis, b.m4_kurtosis)] {
                prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
            }
        }
    }
}
