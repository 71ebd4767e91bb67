//! Acoustic feature extraction for sonorant consonants and their following vowels.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`annotation`] loads WAV audio and interval annotations and pairs each
//!    sonorant with the vowel that follows it.
//! 2. [`spectrum`] time-averages the sonorant's power spectrum and reduces it
//!    to four spectral moments plus duration.
//! 3. [`formants`] tracks F1–F4 through the vowel on a 19-point relative grid,
//!    and [`contour`] reduces each track to quadratic coefficients.
//! 4. [`stats`] and [`classify`] compare the resulting feature records across
//!    variety, stress, segment and vowel factors.
//!
//! [`synthkit`] produces signals, spectra and corpora with known ground truth
//! for testing every stage.

pub mod annotation;
pub mod classify;
pub mod contour;
pub mod factor;
pub mod formants;
pub mod linalg;
pub mod spectrum;
pub mod stats;
pub mod synthkit;

pub use annotation::{AudioClip, Segment, TokenPair};
pub use contour::PolyCoeffs;
pub use formants::FormantTrack;
pub use spectrum::{AveragedSpectrum, SpectralMoments};
pub use stats::record::FeatureRecord;
