use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::factor::{Factor, Sonorant, Stress, Variety, Vowel};

/// One analysed token: factors, spectral moments and contour coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRecord {
    pub speaker: String,
    pub keyword: String,
    pub variety: Variety,
    pub stress: Stress,
    pub segment: Sonorant,
    pub vowel: Vowel,
    pub duration_ms: f64,
    pub m1_cog_hz: f64,
    pub m2_sd_hz: f64,
    pub m3_skew: f64,
    pub m4_kurt: f64,
    /// `contour[f][j]` is coefficient `a_j` of formant `f + 1`.
    pub contour: [[f64; 3]; 4],
    pub contour_rmse: [f64; 4],
    pub n_frames_averaged: usize,
}

impl FeatureRecord {
    pub fn level(&self, factor: Factor) -> usize {
        match factor {
            Factor::Variety => self.variety.index(),
            Factor::Stress => self.stress.index(),
            Factor::Segment => self.segment.index(),
            Factor::Vowel => self.vowel.index(),
        }
    }

    pub fn value(&self, dv: Dv) -> f64 {
        match dv {
            Dv::Duration => self.duration_ms,
            Dv::Cog => self.m1_cog_hz,
            Dv::Sd => self.m2_sd_hz,
            Dv::Skewness => self.m3_skew,
            Dv::Kurtosis => self.m4_kurt,
            Dv::Contour { formant, coef } => self.contour[formant as usize - 1][coef as usize],
        }
    }

    pub fn set_value(&mut self, dv: Dv, v: f64) {
        match dv {
            Dv::Duration => self.duration_ms = v,
            Dv::Cog => self.m1_cog_hz = v,
            Dv::Sd => self.m2_sd_hz = v,
            Dv::Skewness => self.m3_skew = v,
            Dv::Kurtosis => self.m4_kurt = v,
            Dv::Contour { formant, coef } => self.contour[formant as usize - 1][coef as usize] = v,
        }
    }

    /// Factor values are closed sets by construction; this checks the numeric fields.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.duration_ms > 0.0 && self.duration_ms.is_finite()) {
            return Err(format!(
                "duration_ms {} must be positive and finite",
                self.duration_ms
            ));
        }
        for dv in Dv::all() {
            if !self.value(dv).is_finite() {
                return Err(format!("{} is not finite", dv.column()));
            }
        }
        if let Some(r) = self
            .contour_rmse
            .iter()
            .find(|r| !(r.is_finite() && **r >= 0.0))
        {
            return Err(format!("contour rmse {r} must be finite and non-negative"));
        }
        Ok(())
    }
}

/// A dependent variable of the statistical models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dv {
    Duration,
    Cog,
    Sd,
    Skewness,
    Kurtosis,
    /// `formant` in 1..=4, `coef` in 0..=2.
    Contour {
        formant: u8,
        coef: u8,
    },
}

impl Dv {
    pub const MOMENTS: [Dv; 5] = [Dv::Duration, Dv::Cog, Dv::Sd, Dv::Skewness, Dv::Kurtosis];

    pub fn contours() -> impl Iterator<Item = Dv> {
        (1..=4u8).flat_map(|formant| (0..3u8).map(move |coef| Dv::Contour { formant, coef }))
    }

    pub fn all() -> impl Iterator<Item = Dv> {
        Self::MOMENTS.into_iter().chain(Self::contours())
    }

    /// Column name in `features.csv`.
    pub fn column(self) -> String {
        match self {
            Dv::Duration => "duration_ms".into(),
            Dv::Cog => "m1_cog_hz".into(),
            Dv::Sd => "m2_sd_hz".into(),
            Dv::Skewness => "m3_skew".into(),
            Dv::Kurtosis => "m4_kurt".into(),
            Dv::Contour { formant, coef } => format!("f{formant}_a{coef}"),
        }
    }

    /// Short label for tables (`CoG`, `F2a1`).
    pub fn label(self) -> String {
        match self {
            Dv::Duration => "Duration".into(),
            Dv::Cog => "CoG".into(),
            Dv::Sd => "SD".into(),
            Dv::Skewness => "Skewness".into(),
            Dv::Kurtosis => "Kurtosis".into(),
            Dv::Contour { formant, coef } => format!("F{formant}a{coef}"),
        }
    }

    pub fn is_contour(self) -> bool {
        matches!(self, Dv::Contour { .. })
    }

    /// Factors of the default model: contour coefficients add Vowel.
    pub fn default_factors(self) -> Vec<Factor> {
        if self.is_contour() {
            vec![
                Factor::Variety,
                Factor::Stress,
                Factor::Segment,
                Factor::Vowel,
            ]
        } else {
            vec![Factor::Variety, Factor::Stress, Factor::Segment]
        }
    }
}

impl fmt::Display for Dv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Dv {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dv::all()
            .find(|d| d.column() == s || d.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown dependent variable {s:?}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dv_names_parse_back() {
        for dv in Dv::all() {
            assert_eq!(dv.column().parse::<Dv>().unwrap(), dv);
            assert_eq!(dv.label().parse::<Dv>().unwrap(), dv);
        }
        assert_eq!(Dv::all().count(), 17);
        assert!("f5_a0".parse::<Dv>().is_err());
    }
}
