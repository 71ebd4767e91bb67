//! Closed factor sets shared by annotation, statistics and classification.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {factor} level {value:?}")]
pub struct UnknownLevel {
    pub factor: &'static str,
    pub value: String,
}

macro_rules! factor_enum {
    ($(#[$meta:meta])* $name:ident, $factor:literal, [$($variant:ident => $text:literal),+ $(,)?]) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(
                #[serde(rename = $text)]
                $variant,
            )+
        }

        impl $name {
            /// All levels in canonical order; the first is the default reference level.
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => $text,)+
                }
            }

            /// Zero-based position in [`Self::ALL`].
            pub fn index(self) -> usize {
                Self::ALL.iter().position(|&v| v == self).unwrap_or(0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = UnknownLevel;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(UnknownLevel { factor: $factor, value: s.to_string() }),
                }
            }
        }
    };
}

factor_enum!(
    /// Language variety of the speaker.
    Variety, "variety", [Ag => "AG", Cg => "CG"]
);
factor_enum!(
    /// Lexical stress of the syllable the sonorant opens.
    Stress, "stress", [Stressed => "stressed", Unstressed => "unstressed"]
);
factor_enum!(
    /// Sonorant phoneme. `[l]` comes first so it is the default reference level.
    Sonorant, "segment", [L => "l", M => "m", N => "n", R => "r"]
);
factor_enum!(
    /// Vowel following the sonorant.
    Vowel, "vowel", [A => "a", I => "i"]
);

impl Stress {
    /// Label used in model term names, e.g. `CG:Unstressed`.
    pub fn term_label(self) -> &'static str {
        match self {
            Stress::Stressed => "Stressed",
            Stress::Unstressed => "Unstressed",
        }
    }
}

/// A design factor of the factorial models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Factor {
    Variety,
    Stress,
    Segment,
    Vowel,
}

impl Factor {
    pub const ALL: &'static [Factor] = &[
        Factor::Variety,
        Factor::Stress,
        Factor::Segment,
        Factor::Vowel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Factor::Variety => "variety",
            Factor::Stress => "stress",
            Factor::Segment => "segment",
            Factor::Vowel => "vowel",
        }
    }

    pub fn n_levels(self) -> usize {
        match self {
            Factor::Variety => Variety::ALL.len(),
            Factor::Stress => Stress::ALL.len(),
            Factor::Segment => Sonorant::ALL.len(),
            Factor::Vowel => Vowel::ALL.len(),
        }
    }

    /// Name of a level as it appears in model terms (`CG`, `Unstressed`, `r`, `i`).
    pub fn term_label(self, level: usize) -> &'static str {
        match self {
            Factor::Variety => Variety::ALL[level].as_str(),
            Factor::Stress => Stress::ALL[level].term_label(),
            Factor::Segment => Sonorant::ALL[level].as_str(),
            Factor::Vowel => Vowel::ALL[level].as_str(),
        }
    }

    /// Name of a level as it appears in data files.
    pub fn level_name(self, level: usize) -> &'static str {
        match self {
            Factor::Variety => Variety::ALL[level].as_str(),
            Factor::Stress => Stress::ALL[level].as_str(),
            Factor::Segment => Sonorant::ALL[level].as_str(),
            Factor::Vowel => Vowel::ALL[level].as_str(),
        }
    }

    pub fn parse_level(self, text: &str) -> Result<usize, UnknownLevel> {
        Ok(match self {
            Factor::Variety => text.parse::<Variety>()?.index(),
            Factor::Stress => text.parse::<Stress>()?.index(),
            Factor::Segment => text.parse::<Sonorant>()?.index(),
            Factor::Vowel => text.parse::<Vowel>()?.index(),
        })
    }
}

impl FromStr for Factor {
    type Err = UnknownLevel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "variety" => Ok(Factor::Variety),
            "stress" => Ok(Factor::Stress),
            "segment" => Ok(Factor::Segment),
            "vowel" => Ok(Factor::Vowel),
            _ => Err(UnknownLevel {
                factor: "factor",
                value: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_round_trip_through_text() {
        for &v in Variety::ALL {
            assert_eq!(v.as_str().parse::<Variety>().unwrap(), v);
        }
        for &s in Sonorant::ALL {
            assert_eq!(s.as_str().parse::<Sonorant>().unwrap(), s);
        }
        assert!("x".parse::<Vowel>().is_err());
    }

    #[test]
    fn lateral_is_reference_segment() {
        assert_eq!(Sonorant::ALL[0], Sonorant::L);
        assert_eq!(Factor::Stress.term_label(1), "Unstressed");
    }
}
