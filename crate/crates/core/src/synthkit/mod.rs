//! Ground truth for tests: synthetic vowels and tones, analytic spectra,
//! planted-effect corpora and reference formulas that share no code with the
//! analysis modules.

pub mod corpus;
pub mod demo;
pub mod oracle;
pub mod spectrum;
pub mod vowel;

pub use corpus::{synth_corpus, Cell, CorpusDesign, PlantedDv, PlantedTruth, SyntheticCorpus};
pub use spectrum::{synth_spectrum, Envelope, Grid, OutOfBand};
pub use vowel::{impulse_train, synth_tones, synth_vowel, SynthError, VowelSpec};

/// Name of the random generator behind every seeded artifact.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9)";
