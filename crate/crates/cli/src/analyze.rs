//! Batch feature extraction over a manifest.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sonolab::annotation::{
    pair_tokens, parse_textgrid, parse_tsv_annotations, read_wav, Segment, SkipReport, SpeakerMeta,
    TokenPair,
};
use sonolab::contour::fit_formant;
use sonolab::formants::track;
use sonolab::spectrum::analyze_sonorant;
use sonolab::{AudioClip, FeatureRecord};

use crate::config::RunConfig;
use crate::manifest::{Manifest, ManifestEntry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryStatus {
    Analyzed,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TokenFailure {
    pub label: String,
    pub start_s: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryReport {
    pub index: usize,
    pub wav: String,
    pub annotation: String,
    pub speaker: String,
    pub status: EntryStatus,
    pub rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub skipped_tokens: Vec<SkipReport>,
    pub failed_tokens: Vec<TokenFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Totals {
    pub entries: usize,
    pub analyzed: usize,
    pub skipped: usize,
    pub failed: usize,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub totals: Totals,
    pub entries: Vec<EntryReport>,
}

impl RunReport {
    /// 0 when rows were written and no file failed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.totals.rows > 0 && self.totals.failed == 0 {
            0
        } else {
            1
        }
    }
}

/// Phone segments and optional word segments of one annotation file.
pub fn load_annotation(
    path: &Path,
    cfg: &RunConfig,
) -> Result<(Vec<Segment>, Vec<Segment>), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read annotation {}: {e}", path.display()))?;
    let is_textgrid = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("textgrid"))
        || text
            .trim_start_matches('\u{feff}')
            .trim_start()
            .starts_with("File type");
    if is_textgrid {
        let grid = parse_textgrid(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let phones = match grid.tier(&cfg.phone_tier) {
            Some(t) => t.segments.clone(),
            None if grid.tiers.len() == 1 => grid.tiers[0].segments.clone(),
            None => {
                return Err(format!(
                    "{}: no tier named {:?}",
                    path.display(),
                    cfg.phone_tier
                ))
            }
        };
        let words = grid
            .tier(&cfg.word_tier)
            .map(|t| t.segments.clone())
            .unwrap_or_default();
        Ok((phones, words))
    } else {
        let segs = parse_tsv_annotations(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let (words, rest): (Vec<Segment>, Vec<Segment>) =
            segs.into_iter().partition(|s| s.tier == cfg.word_tier);
        let phones: Vec<Segment> = if rest.iter().any(|s| s.tier == cfg.phone_tier) {
            rest.into_iter()
                .filter(|s| s.tier == cfg.phone_tier)
                .collect()
        } else {
            rest
        };
        Ok((phones, words))
    }
}

/// Moments of the sonorant and contour coefficients of the vowel of one token.
pub fn analyze_pair(
    clip: &AudioClip,
    pair: &TokenPair,
    cfg: &RunConfig,
) -> Result<FeatureRecord, String> {
    let (moments, spectrum) = analyze_sonorant(clip, &pair.sonorant, &cfg.spectrum)
        .map_err(|e| format!("sonorant: {e}"))?;
    let mut formants = cfg.formants.clone();
    formants.n_tracked = 4;
    let track = track(clip, &pair.vowel, &formants).map_err(|e| format!("vowel: {e}"))?;
    let mut contour = [[0.0; 3]; 4];
    let mut contour_rmse = [0.0; 4];
    for f in 0..4 {
        let c = fit_formant(&track.formant(f), f as u8 + 1)
            .map_err(|e| format!("contour F{}: {e}", f + 1))?;
        contour[f] = [c.a0, c.a1, c.a2];
        contour_rmse[f] = c.rmse;
    }
    let record = FeatureRecord {
        speaker: pair.speaker.clone(),
        keyword: pair.keyword.clone(),
        variety: pair.variety,
        stress: pair.stress,
        segment: pair.segment,
        vowel: pair.vowel_quality,
        duration_ms: moments.duration_ms,
        m1_cog_hz: moments.m1_cog,
        m2_sd_hz: moments.m2_sd,
        m3_skew: moments.m3_skewness,
        m4_kurt: moments.m4_kurtosis,
        contour,
        contour_rmse,
        n_frames_averaged: spectrum.n_frames_averaged,
    };
    record.validate()?;
    Ok(record)
}

fn analyze_entry(
    index: usize,
    entry: &ManifestEntry,
    cfg: &RunConfig,
) -> (EntryReport, Vec<FeatureRecord>) {
    let mut report = EntryReport {
        index,
        wav: entry.wav.display().to_string(),
        annotation: entry.annotation.display().to_string(),
        speaker: entry.speaker.clone(),
        status: EntryStatus::Failed,
        rows: 0,
        error: None,
        skipped_tokens: Vec::new(),
        failed_tokens: Vec::new(),
    };
    let loaded = read_wav(&entry.wav)
        .map_err(|e| format!("{}: {e}", entry.wav.display()))
        .and_then(|clip| load_annotation(&entry.annotation, cfg).map(|a| (clip, a)));
    let (clip, (phones, words)) = match loaded {
        Ok(v) => v,
        Err(e) => {
            report.error = Some(e);
            return (report, Vec::new());
        }
    };

    let meta = SpeakerMeta {
        speaker: entry.speaker.clone(),
        variety: entry.variety,
    };
    let outcome = pair_tokens(&phones, &words, &meta);
    report.skipped_tokens = outcome.skipped;
    let mut rows = Vec::new();
    for pair in &outcome.pairs {
        match analyze_pair(&clip, pair, cfg) {
            Ok(r) => rows.push(r),
            Err(error) => report.failed_tokens.push(TokenFailure {
                label: pair.sonorant.label.clone(),
                start_s: pair.sonorant.start_s,
                error,
            }),
        }
    }
    report.rows = rows.len();
    report.status = if !rows.is_empty() {
        EntryStatus::Analyzed
    } else if outcome.pairs.is_empty() {
        EntryStatus::Skipped
    } else {
        report.error = Some("no token could be analysed".into());
        EntryStatus::Failed
    };
    (report, rows)
}

/// Analyses every manifest entry in parallel; rows and report follow manifest order.
pub fn run_analyze(manifest: &Manifest, cfg: &RunConfig) -> (Vec<FeatureRecord>, RunReport) {
    let results: Vec<(EntryReport, Vec<FeatureRecord>)> = manifest
        .entries
        .par_iter()
        .enumerate()
        .map(|(i, e)| analyze_entry(i, e, cfg))
        .collect();
    let mut records = Vec::new();
    let mut entries = Vec::with_capacity(results.len());
    for (report, rows) in results {
        records.extend(rows);
        entries.push(report);
    }
    let count = |s: EntryStatus| entries.iter().filter(|e| e.status == s).count();
    let totals = Totals {
        entries: entries.len(),
        analyzed: count(EntryStatus::Analyzed),
        skipped: count(EntryStatus::Skipped),
        failed: count(EntryStatus::Failed),
        rows: records.len(),
    };
    (records, RunReport { totals, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_manifest_gives_no_rows_and_exit_one() {
        let (rows, report) = run_analyze(&Manifest::default(), &RunConfig::default());
        assert!(rows.is_empty());
        assert_eq!(report.totals.entries, 0);
        assert_eq!(report.exit_code(), 1);
    }

    #[test]
    fn missing_files_fail_without_aborting() {
        let m = Manifest::parse(
            "wav,annotation,speaker,variety,notes\nnope.wav,nope.tsv,AG01,AG,\n",
            Path::new("/nonexistent"),
        )
        .unwrap();
        let (rows, report) = run_analyze(&m, &RunConfig::default());
        assert!(rows.is_empty());
        assert_eq!(report.entries[0].status, EntryStatus::Failed);
        assert!(report.entries[0]
            .error
            .as_deref()
            .unwrap()
            .contains("nope.wav"));
    }
}
