//! Audio and interval-annotation input.
//!
//! Audio arrives as RIFF/WAVE (PCM16 or float32) and is reduced to channel 0.
//! Annotations arrive as TextGrid documents (long or short text form) or as a
//! four-column TSV. Sonorant intervals are then paired with the vowel interval
//! that immediately follows them.

mod pairing;
mod textgrid;
mod tsv;
mod wav;

pub use pairing::{pair_tokens, PairingOutcome, SkipReport, SpeakerMeta, TokenPair};
pub use textgrid::{
    parse_textgrid, serialize_textgrid, TextGrid, TextGridError, TextGridFormat, Tier,
};
pub use tsv::{parse_tsv_annotations, serialize_tsv, TsvError};
pub use wav::{parse_wav, read_wav, wav_bytes, write_wav, WavEncoding, WavError};

use serde::{Deserialize, Serialize};

/// Mono audio, samples nominally in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip {
    samples: Vec<f64>,
    sample_rate: u32,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClipError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("audio clip has no samples")]
    Empty,
    #[error("segment {start_s}..{end_s} s lies outside the clip (duration {duration_s} s)")]
    OutOfRange {
        start_s: f64,
        end_s: f64,
        duration_s: f64,
    },
}

impl AudioClip {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, ClipError> {
        if sample_rate == 0 {
            return Err(ClipError::ZeroSampleRate);
        }
        if samples.is_empty() {
            return Err(ClipError::Empty);
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Sample index of time `t` (floor convention).
    pub fn index_at(&self, t: f64) -> usize {
        time_to_index(t, self.sample_rate)
    }

    /// Sample range covered by `[start_s, end_s)`, floor-based at both edges.
    pub fn span(&self, start_s: f64, end_s: f64) -> Result<std::ops::Range<usize>, ClipError> {
        let lo = self.index_at(start_s);
        let hi = self.index_at(end_s);
        if start_s < 0.0 || hi > self.samples.len() || lo > hi {
            return Err(ClipError::OutOfRange {
                start_s,
                end_s,
                duration_s: self.duration_s(),
            });
        }
        Ok(lo..hi)
    }

    /// Samples of a segment. Adjacent segments tile the clip without gaps or overlap.
    pub fn slice(&self, seg: &Segment) -> Result<&[f64], ClipError> {
        let range = self.span(seg.start_s, seg.end_s)?;
        Ok(&self.samples[range])
    }

    /// Same clip with every sample multiplied by `gain`.
    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|x| x * gain).collect(),
            sample_rate: self.sample_rate,
        }
    }
}

pub(crate) fn time_to_index(t: f64, rate: u32) -> usize {
    let x = (t * rate as f64).floor();
    if x <= 0.0 {
        0
    } else {
        x as usize
    }
}

/// A labeled time interval on one annotation tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub start_s: f64,
    pub end_s: f64,
    pub tier: String,
}

impl Segment {
    pub fn new(
        tier: impl Into<String>,
        label: impl Into<String>,
        start_s: f64,
        end_s: f64,
    ) -> Self {
        Self {
            label: label.into(),
            start_s,
            end_s,
            tier: tier.into(),
        }
    }

    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }

    pub fn midpoint_s(&self) -> f64 {
        0.5 * (self.start_s + self.end_s)
    }

    /// `0 <= start < end`, both finite.
    pub fn is_valid(&self) -> bool {
        self.start_s.is_finite()
            && self.end_s.is_finite()
            && self.start_s >= 0.0
            && self.start_s < self.end_s
    }
}
