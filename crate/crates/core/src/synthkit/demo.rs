//! Synthetic recordings of sonorant + vowel tokens with known acoustic truth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::oracle::line_spectrum_moments;
use super::vowel::{synth_tones, synth_vowel, SynthError, VowelSpec};
use super::RNG_ALGORITHM;
use crate::annotation::{AudioClip, Segment};
use crate::factor::{Sonorant, Stress, Variety, Vowel};

/// Silence before and after each token.
const PAD_S: f64 = 0.05;
const SONORANT_PEAK: f64 = 0.3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoToken {
    pub speaker: String,
    pub variety: Variety,
    pub stress: Stress,
    pub segment: Sonorant,
    pub vowel_quality: Vowel,
    /// `(frequency_hz, amplitude)` of the sonorant's tone complex.
    pub partials: Vec<(f64, f64)>,
    pub sonorant_s: f64,
    pub vowel: VowelSpec,
}

impl DemoToken {
    pub fn sonorant_label(&self) -> String {
        match self.stress {
            Stress::Stressed => format!("'{}", self.segment),
            Stress::Unstressed => self.segment.to_string(),
        }
    }

    pub fn keyword(&self) -> String {
        format!("{}{}", self.sonorant_label(), self.vowel_quality)
    }

    /// Token file stem, e.g. `AG01_000_la_stressed`.
    pub fn stem(&self, index: usize) -> String {
        format!(
            "{}_{:03}_{}{}_{}",
            self.speaker, index, self.segment, self.vowel_quality, self.stress
        )
    }
}

/// Values the analysis pipeline should recover from a token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTruth {
    pub speaker: String,
    pub keyword: String,
    pub duration_ms: f64,
    /// Moments of the sonorant's line spectrum (power-weighted partials).
    pub moments: [f64; 4],
    /// `(a0, a1, a2)` of F1..F4 in grid-step units.
    pub contour: [[f64; 3]; 4],
    pub rng: String,
    pub seed: u64,
}

pub struct Rendered {
    pub clip: AudioClip,
    pub segments: Vec<Segment>,
    pub truth: TokenTruth,
}

fn base_partials(segment: Sonorant) -> Vec<(f64, f64)> {
    match segment {
        Sonorant::L => vec![(350.0, 1.0), (800.0, 0.5), (1400.0, 0.35), (2600.0, 0.2)],
        Sonorant::M => vec![(250.0, 1.0), (700.0, 0.3), (1250.0, 0.25), (2300.0, 0.12)],
        Sonorant::N => vec![(280.0, 1.0), (750.0, 0.3), (1500.0, 0.2), (2500.0, 0.15)],
        Sonorant::R => vec![(450.0, 0.8), (1100.0, 0.7), (1700.0, 0.6), (2900.0, 0.35)],
    }
}

fn base_formants(vowel: Vowel) -> [(f64, f64); 4] {
    match vowel {
        Vowel::A => [
            (850.0, 80.0),
            (1220.0, 90.0),
            (2810.0, 120.0),
            (3600.0, 150.0),
        ],
        Vowel::I => [
            (320.0, 60.0),
            (2200.0, 100.0),
            (2950.0, 120.0),
            (3700.0, 150.0),
        ],
    }
}

/// One token per (variety, speaker, stress, segment, vowel), with seeded jitter.
pub fn demo_tokens(speakers_per_variety: usize, sample_rate: u32, seed: u64) -> Vec<DemoToken> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for &variety in Variety::ALL {
        for s in 0..speakers_per_variety {
            let speaker = format!("{variety}{:02}", s + 1);
            for &stress in Stress::ALL {
                for &segment in Sonorant::ALL {
                    for &vowel_quality in Vowel::ALL {
                        let scale: f64 = 1.0 + rng.random_range(-0.03..0.03);
                        let partials = base_partials(segment)
                            .iter()
                            .map(|&(f, a)| (f * scale, a))
                            .collect();
                        let sonorant_s = match (segment, stress) {
                            (Sonorant::R, _) => 0.03,
                            (_, Stress::Stressed) => 0.08,
                            (_, Stress::Unstressed) => 0.07,
                        } + rng.random_range(0.0..0.01);
                        let formants: Vec<(f64, f64)> = base_formants(vowel_quality)
                            .iter()
                            .map(|&(f, b)| (f * (1.0 + rng.random_range(-0.03..0.03)), b))
                            .collect();
                        let duration_s = 0.13 + rng.random_range(0.0..0.04);
                        out.push(DemoToken {
                            speaker: speaker.clone(),
                            variety,
                            stress,
                            segment,
                            vowel_quality,
                            partials,
                            sonorant_s,
                            vowel: VowelSpec {
                                f0: 200.0,
                                formants,
                                trajectory: None,
                                duration_s,
                                sample_rate,
                            },
                        });
                    }
                }
            }
        }
    }
    out
}

fn round_to_samples(t: f64, rate: f64) -> f64 {
    (t * rate).round() / rate
}

/// Renders a token as `[silence, sonorant, vowel, silence]` with a phone tier.
pub fn render_token(token: &DemoToken, seed: u64) -> Result<Rendered, SynthError> {
    let rate = token.vowel.sample_rate as f64;
    let mut sonorant = synth_tones(&token.partials, token.sonorant_s, token.vowel.sample_rate);
    let peak = sonorant.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        sonorant.iter_mut().for_each(|v| *v *= SONORANT_PEAK / peak);
    }
    let vowel = synth_vowel(&token.vowel)?;
    let pad = vec![0.0; (PAD_S * rate).round() as usize];

    let mut samples = pad.clone();
    samples.extend_from_slice(&sonorant);
    samples.extend_from_slice(vowel.samples());
    samples.extend_from_slice(&pad);

    // boundaries sit on sample instants so floor-based slicing recovers each part
    let t1 = round_to_samples(pad.len() as f64 / rate, rate);
    let t2 = (pad.len() + sonorant.len()) as f64 / rate;
    let t3 = (pad.len() + sonorant.len() + vowel.samples().len()) as f64 / rate;
    let t4 = samples.len() as f64 / rate;
    let segments = vec![
        Segment::new("phones", "sil", 0.0, t1),
        Segment::new("phones", token.sonorant_label(), t1, t2),
        Segment::new("phones", token.vowel_quality.as_str(), t2, t3),
        Segment::new("phones", "sil", t3, t4),
    ];

    let mut contour = [[0.0; 3]; 4];
    for (i, c) in contour.iter_mut().enumerate() {
        *c = match token
            .vowel
            .trajectory
            .as_ref()
            .and_then(|t| t.get(i).copied().flatten())
        {
            Some(q) => q,
            None => [token.vowel.formants.get(i).map_or(0.0, |f| f.0), 0.0, 0.0],
        };
    }
    let truth = TokenTruth {
        speaker: token.speaker.clone(),
        keyword: token.keyword(),
        duration_ms: (t2 - t1) * 1000.0,
        moments: line_spectrum_moments(&token.partials),
        contour,
        rng: RNG_ALGORITHM.to_string(),
        seed,
    };
    let clip =
        AudioClip::new(samples, token.vowel.sample_rate).expect("rendered token is non-empty");
    Ok(Rendered {
        clip,
        segments,
        truth,
    })
}
