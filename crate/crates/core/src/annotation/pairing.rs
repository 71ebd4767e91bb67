use serde::{Deserialize, Serialize};

use super::Segment;
use crate::factor::{Sonorant, Stress, Variety, Vowel};

/// Per-recording metadata attached to every token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeakerMeta {
    pub speaker: String,
    pub variety: Variety,
}

/// A sonorant interval and the vowel interval that follows it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenPair {
    pub sonorant: Segment,
    pub vowel: Segment,
    pub segment: Sonorant,
    pub vowel_quality: Vowel,
    pub stress: Stress,
    pub keyword: String,
    pub speaker: String,
    pub variety: Variety,
}

/// A sonorant that could not be turned into a token.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipReport {
    pub label: String,
    pub start_s: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PairingOutcome {
    pub pairs: Vec<TokenPair>,
    pub skipped: Vec<SkipReport>,
}

fn is_stress_mark(c: char) -> bool {
    matches!(c, '\'' | 'ˈ' | '´')
}

/// Phone label without stress marks or surrounding whitespace, and whether a mark was present.
fn normalize_label(label: &str) -> (String, bool) {
    let marked = label.chars().any(is_stress_mark);
    let bare: String = label
        .trim()
        .chars()
        .filter(|&c| !is_stress_mark(c))
        .collect::<String>()
        .to_lowercase();
    (bare, marked)
}

/// Stress of the syllable opened by `sonorant` before `vowel` inside a keyword
/// written with a leading stress mark, e.g. `sa'mi` (stressed) or `'sami` (unstressed).
fn stress_from_keyword(keyword: &str, sonorant: Sonorant, vowel: Vowel) -> Option<Stress> {
    if !keyword.chars().any(is_stress_mark) {
        return None;
    }
    let chars: Vec<char> = keyword.to_lowercase().chars().collect();
    let son = sonorant.as_str().chars().next()?;
    let vow = vowel.as_str().chars().next()?;
    for i in 0..chars.len() {
        if chars[i] != son {
            continue;
        }
        let next = chars[i + 1..].iter().find(|c| !is_stress_mark(**c));
        if next == Some(&vow) {
            let marked = i > 0 && is_stress_mark(chars[i - 1]);
            return Some(if marked {
                Stress::Stressed
            } else {
                Stress::Unstressed
            });
        }
    }
    None
}

/// Pairs each sonorant (`m n l r`) with the immediately following vowel (`a i`).
///
/// Keyword and stress come from the word-tier interval containing the
/// sonorant's midpoint when one exists; otherwise a stress mark on the
/// sonorant label (`'m`) marks it stressed and the keyword is the bare
/// sonorant–vowel string. Labels outside both sets are ignored.
pub fn pair_tokens(segments: &[Segment], words: &[Segment], meta: &SpeakerMeta) -> PairingOutcome {
    let mut sorted: Vec<&Segment> = segments.iter().collect();
    sorted.sort_by(|a, b| a.start_s.total_cmp(&b.start_s));

    let mut outcome = PairingOutcome::default();
    for (i, seg) in sorted.iter().enumerate() {
        let (bare, marked) = normalize_label(&seg.label);
        let Ok(sonorant) = bare.parse::<Sonorant>() else {
            continue;
        };
        let skip = |reason: &str| SkipReport {
            label: seg.label.clone(),
            start_s: seg.start_s,
            reason: reason.to_string(),
        };

        let Some(next) = sorted.get(i + 1) else {
            outcome.skipped.push(skip("no following segment"));
            continue;
        };
        let Ok(vowel) = normalize_label(&next.label).0.parse::<Vowel>() else {
            outcome.skipped.push(skip(&format!(
                "following segment {:?} is not a vowel",
                next.label
            )));
            continue;
        };
        if next.start_s < seg.end_s {
            outcome
                .skipped
                .push(skip("following vowel overlaps the sonorant"));
            continue;
        }

        let mid = seg.midpoint_s();
        let word = words
            .iter()
            .find(|w| w.start_s <= mid && mid < w.end_s && !w.label.trim().is_empty());
        let (keyword, stress) = match word {
            Some(w) => match stress_from_keyword(&w.label, sonorant, vowel) {
                Some(stress) => (w.label.trim().to_string(), stress),
                None => {
                    outcome.skipped.push(skip(&format!(
                        "cannot read stress of {sonorant}{vowel} from keyword {:?}",
                        w.label
                    )));
                    continue;
                }
            },
            None => {
                let stress = if marked {
                    Stress::Stressed
                } else {
                    Stress::Unstressed
                };
                let mark = if marked { "'" } else { "" };
                (format!("{mark}{sonorant}{vowel}"), stress)
            }
        };

        outcome.pairs.push(TokenPair {
            sonorant: (*seg).clone(),
            vowel: (*next).clone(),
            segment: sonorant,
            vowel_quality: vowel,
            stress,
            keyword,
            speaker: meta.speaker.clone(),
            variety: meta.variety,
        });
    }
    outcome
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> SpeakerMeta {
        SpeakerMeta {
            speaker: "s01".into(),
            variety: Variety::Cg,
        }
    }

    fn phones(labels: &[&str]) -> Vec<Segment> {
        labels
            .iter()
            .enumerate()
            .map(|(i, l)| Segment::new("phones", *l, i as f64 * 0.1, (i + 1) as f64 * 0.1))
            .collect()
    }

    #[test]
    fn single_adjacency() {
        let out = pair_tokens(&phones(&["s", "a", "m", "i"]), &[], &meta());
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].segment, Sonorant::M);
        assert_eq!(out.pairs[0].vowel_quality, Vowel::I);
        assert_eq!(out.pairs[0].variety, Variety::Cg);
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn non_sonorants_are_ignored() {
        let out = pair_tokens(&phones(&["m", "i", "s", "a"]), &[], &meta());
        assert_eq!(out.pairs.len(), 1);
        assert_eq!(out.pairs[0].sonorant.label, "m");
    }

    #[test]
    fn trailing_sonorant_is_reported() {
        let out = pair_tokens(&phones(&["r"]), &[], &meta());
        assert!(out.pairs.is_empty());
        assert_eq!(out.skipped.len(), 1);
    }

    #[test]
    fn stress_follows_keyword_mark() {
        let segs = phones(&["s", "a", "m", "i", "m", "i", "s", "a"]);
        let words = vec![
            Segment::new("words", "sa'mi", 0.0, 0.4),
            Segment::new("words", "mi'sa", 0.4, 0.8),
        ];
        let out = pair_tokens(&segs, &words, &meta());
        assert_eq!(out.pairs.len(), 2);
        assert_eq!(out.pairs[0].stress, Stress::Stressed);
        assert_eq!(out.pairs[0].keyword, "sa'mi");
        assert_eq!(out.pairs[1].stress, Stress::Unstressed);
    }

    #[test]
    fn label_mark_without_word_tier() {
        let out = pair_tokens(&phones(&["'l", "a", "r", "i"]), &[], &meta());
        assert_eq!(out.pairs[0].stress, Stress::Stressed);
        assert_eq!(out.pairs[0].keyword, "'la");
        assert_eq!(out.pairs[1].stress, Stress::Unstressed);
    }

    #[test]
    fn unmarked_keyword_is_skipped() {
        let segs = phones(&["n", "a"]);
        let words = vec![Segment::new("words", "nasa", 0.0, 0.2)];
        let out = pair_tokens(&segs, &words, &meta());
        assert!(out.pairs.is_empty());
        assert_eq!(out.skipped.len(), 1);
    }

    #[test]
    fn output_never_exceeds_sonorant_count() {
        let segs = phones(&["m", "n", "a", "l", "r", "i", "x", "r"]);
        let out = pair_tokens(&segs, &[], &meta());
        assert!(out.pairs.len() <= 5);
        assert_eq!(out.pairs.len() + out.skipped.len(), 5);
        for p in &out.pairs {
            assert!(p.sonorant.end_s <= p.vowel.start_s);
        }
    }
}
