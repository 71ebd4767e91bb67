//! Feature-record corpora with planted factorial effects.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::RNG_ALGORITHM;
use crate::factor::{Sonorant, Stress, Variety, Vowel};
use crate::stats::describe::{Scale, ScalePolicy};
use crate::stats::record::{Dv, FeatureRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub variety: Variety,
    pub stress: Stress,
    pub segment: Sonorant,
    pub vowel: Vowel,
}

impl Cell {
    /// All 32 combinations in canonical order.
    pub fn all() -> Vec<Cell> {
        let mut out = Vec::new();
        for &variety in Variety::ALL {
            for &stress in Stress::ALL {
                for &segment in Sonorant::ALL {
                    for &vowel in Vowel::ALL {
                        out.push(Cell {
                            variety,
                            stress,
                            segment,
                            vowel,
                        });
                    }
                }
            }
        }
        out
    }

    /// True if every part of a model term name (`CG:n:i`, `Unstressed`) matches this cell.
    pub fn has_term(&self, term: &str) -> bool {
        if term == "Intercept" {
            return true;
        }
        term.split(':').all(|part| match part {
            "CG" => self.variety == Variety::Cg,
            "AG" => self.variety == Variety::Ag,
            "Unstressed" => self.stress == Stress::Unstressed,
            "Stressed" => self.stress == Stress::Stressed,
            "i" => self.vowel == Vowel::I,
            "a" => self.vowel == Vowel::A,
            seg => seg.parse::<Sonorant>().is_ok_and(|s| s == self.segment),
        })
    }

    pub fn keyword(&self) -> String {
        let mark = if self.stress == Stress::Stressed {
            "'"
        } else {
            ""
        };
        format!("{mark}{}{}", self.segment, self.vowel)
    }
}

/// Planted structure of one dependent variable, on its model scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedDv {
    pub scale: Scale,
    /// `(term, coefficient)` under treatment coding with the default references.
    pub effects: Vec<(String, f64)>,
    pub noise_sd: f64,
    pub speaker_sd: f64,
}

impl PlantedDv {
    pub fn cell_mean(&self, cell: &Cell) -> f64 {
        self.effects
            .iter()
            .filter(|(t, _)| cell.has_term(t))
            .map(|(_, c)| c)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusDesign {
    pub cells: Vec<Cell>,
    pub n_per_cell: usize,
    pub speakers_per_variety: usize,
    pub dvs: BTreeMap<Dv, PlantedDv>,
}

fn effects(list: &[(&str, f64)]) -> Vec<(String, f64)> {
    list.iter().map(|&(t, c)| (t.to_string(), c)).collect()
}

impl CorpusDesign {
    /// All cells, every DV planted with the published coefficient magnitudes,
    /// noise of a tenth of a typical cell SD and no speaker offsets.
    pub fn paper_defaults(n_per_cell: usize) -> Self {
        let policy = ScalePolicy::default();
        let mut dvs = BTreeMap::new();
        let mut put = |dv: Dv, list: &[(&str, f64)], noise_sd: f64| {
            dvs.insert(
                dv,
                PlantedDv {
                    scale: policy.scale_for(dv),
                    effects: effects(list),
                    noise_sd,
                    speaker_sd: 0.0,
                },
            );
        };
        put(
            Dv::Cog,
            &[
                ("Intercept", 6.63),
                ("n", -0.12),
                ("r", 0.41),
                ("CG:m", 0.06),
                ("CG:n", 0.08),
            ],
            0.05,
        );
        put(
            Dv::Sd,
            &[
                ("Intercept", 6.56),
                ("m", -0.14),
                ("n", -0.11),
                ("r", 0.46),
                ("CG:m", 0.25),
                ("CG:n", 0.23),
            ],
            0.05,
        );
        put(
            Dv::Skewness,
            &[
                ("Intercept", 11.42),
                ("m", 3.57),
                ("n", 4.14),
                ("r", -3.01),
                ("CG:m", -2.67),
            ],
            1.0,
        );
        put(
            Dv::Kurtosis,
            &[
                ("Intercept", 288.10),
                ("m", 227.90),
                ("n", 218.80),
                ("r", -154.20),
            ],
            30.0,
        );
        put(
            Dv::Duration,
            &[
                ("Intercept", 4.38),
                ("r", -1.11),
                ("CG:m", 0.09),
                ("CG:r", 0.09),
                ("CG:Unstressed", -0.10),
            ],
            0.05,
        );

        let c = |formant, coef| Dv::Contour { formant, coef };
        put(
            c(1, 0),
            &[
                ("Intercept", 479.63),
                ("m", -85.19),
                ("n", -59.23),
                ("r", 160.89),
                ("CG", 113.43),
                ("i", -53.53),
                ("CG:n", -90.75),
                ("CG:r", -88.13),
                ("CG:i", -50.09),
            ],
            10.0,
        );
        put(
            c(1, 1),
            &[
                ("Intercept", -10.28),
                ("r", 6.71),
                ("i", 8.99),
                ("CG:r:i", 11.20),
            ],
            1.0,
        );
        put(
            c(1, 2),
            &[
                ("Intercept", 0.59),
                ("r", -0.54),
                ("i", -0.64),
                ("m:i", 0.42),
            ],
            0.05,
        );
        put(
            c(2, 0),
            &[
                ("Intercept", 1564.21),
                ("m", -253.94),
                ("r", 144.75),
                ("i", 253.90),
                ("CG:m", 107.56),
                ("m:i", -180.79),
                ("n:i", -144.90),
            ],
            20.0,
        );
        put(
            c(2, 1),
            &[
                ("Intercept", -0.09),
                ("i", 37.22),
                ("m:i", -43.92),
                ("n:i", -70.74),
                ("r:i", -42.42),
                ("CG:i", -25.35),
                ("CG:n:i", 47.75),
                ("CG:r:i", 34.24),
            ],
            2.0,
        );
        put(
            c(2, 2),
            &[
                ("Intercept", -0.07),
                ("i", -0.77),
                ("m:i", 1.18),
                ("n:i", 2.64),
                ("r:i", 1.38),
                ("CG:i", 1.91),
                ("CG:m:i", -1.74),
                ("CG:n:i", -3.26),
                ("CG:r:i", -2.29),
                ("CG:Unstressed:n:i", 2.87),
            ],
            0.1,
        );
        put(
            c(3, 0),
            &[
                ("Intercept", 2844.90),
                ("m", -279.50),
                ("n", -244.91),
                ("n:i", 132.89),
                ("r:i", 161.98),
                ("CG:r:i", -188.05),
            ],
            25.0,
        );
        put(
            c(3, 1),
            &[
                ("Intercept", 7.79),
                ("m", -12.31),
                ("n:i", -23.06),
                ("CG:n:i", 28.82),
                ("CG:Unstressed:m:i", 53.65),
            ],
            2.0,
        );
        put(
            c(3, 2),
            &[
                ("Intercept", -0.46),
                ("m", 0.69),
                ("r", -0.66),
                ("n:i", 1.04),
                ("CG:Unstressed:m:i", -3.01),
            ],
            0.1,
        );
        put(
            c(4, 0),
            &[
                ("Intercept", 3814.76),
                ("m", -346.87),
                ("m:i", 408.67),
                ("n:i", 335.36),
                ("r:i", 403.95),
            ],
            40.0,
        );
        put(
            c(4, 1),
            &[
                ("Intercept", -9.55),
                ("n", 23.71),
                ("r", 31.77),
                ("i", 22.01),
                ("CG:n", -33.57),
                ("n:i", -38.71),
                ("CG:Unstressed:m", -60.65),
                ("CG:n:i", 49.56),
            ],
            3.0,
        );
        put(
            c(4, 2),
            &[
                ("Intercept", 0.38),
                ("n", -1.39),
                ("r", -2.07),
                ("CG:n", 2.02),
                ("CG:Unstressed", -2.13),
                ("n:i", 1.98),
                ("CG:Unstressed:m", 3.37),
                ("CG:n:i", -2.99),
            ],
            0.2,
        );

        Self {
            cells: Cell::all(),
            n_per_cell,
            speakers_per_variety: 4,
            dvs,
        }
    }

    pub fn set_noise(&mut self, noise_sd: f64, speaker_sd: f64) {
        for p in self.dvs.values_mut() {
            p.noise_sd = noise_sd;
            p.speaker_sd = speaker_sd;
        }
    }
}

/// Generating parameters, recorded next to every generated corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub seed: u64,
    pub rng: String,
    pub design: CorpusDesign,
    /// Per speaker and DV, the offset added on the model scale.
    pub speaker_offsets: BTreeMap<String, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub records: Vec<FeatureRecord>,
    pub truth: PlantedTruth,
}

fn speaker_id(variety: Variety, k: usize) -> String {
    format!("{variety}{:02}", k + 1)
}

fn on_record_scale(scale: Scale, v: f64) -> f64 {
    match scale {
        Scale::Raw => v,
        Scale::Log => v.exp(),
    }
}

/// Draws `n_per_cell` records for every design cell: planted cell mean plus
/// speaker offset plus Gaussian noise, on each DV's model scale.
pub fn synth_corpus(design: &CorpusDesign, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || -> f64 { StandardNormal.sample(&mut rng) };

    let mut speaker_offsets: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
    for &variety in Variety::ALL {
        for k in 0..design.speakers_per_variety.max(1) {
            let offsets = design
                .dvs
                .iter()
                .map(|(dv, p)| (dv.column(), p.speaker_sd * normal()))
                .collect();
            speaker_offsets.insert(speaker_id(variety, k), offsets);
        }
    }

    let mut records = Vec::with_capacity(design.cells.len() * design.n_per_cell);
    for cell in &design.cells {
        for j in 0..design.n_per_cell {
            let speaker = speaker_id(cell.variety, j % design.speakers_per_variety.max(1));
            let mut r = FeatureRecord {
                speaker: speaker.clone(),
                keyword: cell.keyword(),
                variety: cell.variety,
                stress: cell.stress,
                segment: cell.segment,
                vowel: cell.vowel,
                duration_ms: 1.0,
                m1_cog_hz: 1.0,
                m2_sd_hz: 1.0,
                m3_skew: 0.0,
                m4_kurt: 0.0,
                contour: [[0.0; 3]; 4],
                contour_rmse: [0.0; 4],
                n_frames_averaged: 1,
            };
            for (dv, p) in &design.dvs {
                let offset = speaker_offsets[&speaker][&dv.column()];
                let v = p.cell_mean(cell) + offset + p.noise_sd * normal();
                r.set_value(*dv, on_record_scale(p.scale, v));
            }
            records.push(r);
        }
    }
    SyntheticCorpus {
        records,
        truth: PlantedTruth {
            seed,
            rng: RNG_ALGORITHM.to_string(),
            design: design.clone(),
            speaker_offsets,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::model::{fit_factorial, FactorialSpec};

    #[test]
    fn term_matching() {
        let c = Cell {
            variety: Variety::Cg,
            stress: Stress::Unstressed,
            segment: Sonorant::N,
            vowel: Vowel::I,
        };
        assert!(c.has_term("CG:n:i"));
        assert!(c.has_term("CG:Unstressed"));
        assert!(!c.has_term("r"));
        assert!(!c.has_term("CG:m"));
        assert_eq!(c.keyword(), "ni");
    }

    #[test]
    fn noiseless_records_equal_cell_means() {
        let mut d = CorpusDesign::paper_defaults(3);
        d.set_noise(0.0, 0.0);
        let corpus = synth_corpus(&d, 1);
        assert_eq!(corpus.records.len(), 96);
        for r in &corpus.records {
            let cell = Cell {
                variety: r.variety,
                stress: r.stress,
                segment: r.segment,
                vowel: r.vowel,
            };
            let cog = &d.dvs[&Dv::Cog];
            assert_eq!(r.m1_cog_hz, cog.cell_mean(&cell).exp());
            let f1 = &d.dvs[&Dv::Contour {
                formant: 1,
                coef: 0,
            }];
            assert_eq!(r.contour[0][0], f1.cell_mean(&cell));
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let d = CorpusDesign::paper_defaults(2);
        assert_eq!(synth_corpus(&d, 5), synth_corpus(&d, 5));
        assert_ne!(synth_corpus(&d, 5).records, synth_corpus(&d, 6).records);
        assert_eq!(synth_corpus(&d, 5).truth.rng, RNG_ALGORITHM);
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let mut d = CorpusDesign::paper_defaults(2);
        d.set_noise(0.0, 0.0);
        let corpus = synth_corpus(&d, 0);
        for dv in [
            Dv::Sd,
            Dv::Contour {
                formant: 2,
                coef: 2,
            },
        ] {
            let fit = fit_factorial(
                &corpus.records,
                &FactorialSpec::new(dv, &ScalePolicy::default()),
            )
            .unwrap();
            let planted = &d.dvs[&dv].effects;
            for t in &fit.terms {
                let want = planted
                    .iter()
                    .find(|(n, _)| *n == t.term)
                    .map_or(0.0, |p| p.1);
                assert!(
                    (t.estimate - want).abs() < 1e-9,
                    "{dv} {}: {} vs {want}",
                    t.term,
                    t.estimate
                );
            }
        }
    }

    #[test]
    fn cell_means_converge() {
        let mut d = CorpusDesign::paper_defaults(10_000);
        d.cells.truncate(2);
        let corpus = synth_corpus(&d, 3);
        let p = &d.dvs[&Dv::Skewness];
        let cell = d.cells[0];
        let vals: Vec<f64> = corpus.records[..10_000].iter().map(|r| r.m3_skew).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        assert!((mean - p.cell_mean(&cell)).abs() < 3.0 * p.noise_sd / 100.0);
    }
}
