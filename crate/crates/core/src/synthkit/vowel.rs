use serde::{Deserialize, Serialize};

use crate::annotation::AudioClip;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SynthError {
    #[error("resonator {index} has pole radius {radius} (bandwidth must be positive)")]
    UnstableResonator { index: usize, radius: f64 },
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
}

/// A source-filter vowel: impulse train through a resonator cascade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VowelSpec {
    pub f0: f64,
    /// `(frequency_hz, bandwidth_hz)` per resonator, ascending frequency.
    pub formants: Vec<(f64, f64)>,
    /// Optional quadratic frequency trajectory per formant, `(a0, a1, a2)` in
    /// grid-step units: `t = 0` at 5% of the duration, `t = 18` at 95%.
    pub trajectory: Option<Vec<Option<[f64; 3]>>>,
    pub duration_s: f64,
    pub sample_rate: u32,
}

impl VowelSpec {
    pub fn steady(f0: f64, formants: &[(f64, f64)], duration_s: f64, sample_rate: u32) -> Self {
        Self {
            f0,
            formants: formants.to_vec(),
            trajectory: None,
            duration_s,
            sample_rate,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let nyquist = self.sample_rate as f64 / 2.0;
        if !(self.f0 > 0.0 && self.f0 < nyquist) {
            return Err(SynthError::InvalidSpec(format!(
                "f0 {} out of range",
                self.f0
            )));
        }
        if !(self.duration_s > 0.0) || self.sample_rate == 0 {
            return Err(SynthError::InvalidSpec(
                "duration and sample rate must be positive".into(),
            ));
        }
        for (i, &(f, b)) in self.formants.iter().enumerate() {
            if !(f > 0.0 && f < nyquist) {
                return Err(SynthError::InvalidSpec(format!(
                    "formant {} at {f} Hz is outside (0, {nyquist})",
                    i + 1
                )));
            }
            if i > 0 && f <= self.formants[i - 1].0 {
                return Err(SynthError::InvalidSpec(
                    "formant frequencies must ascend".into(),
                ));
            }
            let radius = (-std::f64::consts::PI * b / self.sample_rate as f64).exp();
            if !(radius < 1.0) {
                return Err(SynthError::UnstableResonator { index: i, radius });
            }
        }
        if let Some(tr) = &self.trajectory {
            if tr.len() != self.formants.len() {
                return Err(SynthError::InvalidSpec(
                    "one trajectory entry per formant expected".into(),
                ));
            }
        }
        Ok(())
    }

    /// Frequency of formant `i` at relative position `u` in [0, 1).
    pub fn frequency_at(&self, i: usize, u: f64) -> f64 {
        match self.trajectory.as_ref().and_then(|t| t[i]) {
            Some([a0, a1, a2]) => {
                let t = (u - 0.05) / 0.05;
                a0 + a1 * t + a2 * t * t
            }
            None => self.formants[i].0,
        }
    }
}

/// Unit impulses at multiples of the pitch period, starting at sample 0.
pub fn impulse_train(f0: f64, n: usize, sample_rate: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut last_period = None;
    for (i, v) in x.iter_mut().enumerate() {
        let period = (i as f64 * f0 / sample_rate).floor() as i64;
        if last_period != Some(period) {
            *v = 1.0;
            last_period = Some(period);
        }
    }
    x
}

fn peak_normalize(x: &mut [f64], peak: f64) {
    let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        x.iter_mut().for_each(|v| *v *= peak / m);
    }
}

pub fn synth_vowel(spec: &VowelSpec) -> Result<AudioClip, SynthError> {
    spec.validate()?;
    let rate = spec.sample_rate as f64;
    let n = (spec.duration_s * rate).round() as usize;
    if n == 0 {
        return Err(SynthError::InvalidSpec(
            "duration is shorter than one sample".into(),
        ));
    }
    let mut signal = impulse_train(spec.f0, n, rate);
    let nyquist = rate / 2.0;
    for (i, &(_, b)) in spec.formants.iter().enumerate() {
        let r = (-std::f64::consts::PI * b / rate).exp();
        let (mut y1, mut y2) = (0.0, 0.0);
        for (k, v) in signal.iter_mut().enumerate() {
            let f = spec.frequency_at(i, k as f64 / n as f64);
            if !(f > 0.0 && f < nyquist) {
                return Err(SynthError::InvalidSpec(format!(
                    "trajectory of formant {} leaves (0, {nyquist}) Hz",
                    i + 1
                )));
            }
            let theta = 2.0 * std::f64::consts::PI * f / rate;
            let y = 2.0 * r * theta.cos() * y1 - r * r * y2 + *v;
            y2 = y1;
            y1 = y;
            *v = y;
        }
    }
    peak_normalize(&mut signal, 0.9);
    Ok(AudioClip::new(signal, spec.sample_rate).expect("non-empty signal at positive rate"))
}

/// Sum of sinusoids `(frequency_hz, amplitude)`, phases spread deterministically.
pub fn synth_tones(partials: &[(f64, f64)], duration_s: f64, sample_rate: u32) -> Vec<f64> {
    let rate = sample_rate as f64;
    let n = (duration_s * rate).round() as usize;
    (0..n)
        .map(|k| {
            partials
                .iter()
                .enumerate()
                .map(|(j, &(f, a))| {
                    a * (2.0 * std::f64::consts::PI * f * k as f64 / rate + 0.7 * j as f64).sin()
                })
                .sum()
        })
        .collect()
}
