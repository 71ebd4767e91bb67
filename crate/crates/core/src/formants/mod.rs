//! Vowel formant tracking on a 19-point relative time grid.
//!
//! Front end: slice with context, band-limit and resample to twice the
//! formant ceiling, pre-emphasize. Each Gaussian-windowed frame gets a Burg
//! predictor whose pole angles and radii give formant frequencies and
//! bandwidths. Per-formant median smoothing precedes grid sampling.

pub mod lpc;
mod resample;
pub mod roots;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::annotation::{time_to_index, AudioClip, Segment};
pub use lpc::{burg_lpc, LpcError, LpcFit};
pub use resample::downsample;
pub use roots::{aberth_roots, RootError, MAX_ROOT_ITERATIONS, ROOT_TOLERANCE};

/// Number of relative sampling positions (5%, 10%, ..., 95%).
pub const GRID_POINTS: usize = 19;
/// Formants carried into feature records.
pub const TRACKED_FORMANTS: usize = 4;
const MAX_CANDIDATES: usize = 5;

/// Relative position of grid row `k` (0-based): `0.05 * (k + 1)`.
pub fn grid_position(k: usize) -> f64 {
    (k + 1) as f64 * 5.0 / 100.0
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormantError {
    #[error(
        "segment too short: {samples} samples after conditioning, analysis window needs {needed}"
    )]
    SegmentTooShort { samples: usize, needed: usize },
    #[error("segment {start_s}..{end_s} s is invalid or outside the clip")]
    InvalidSegment { start_s: f64, end_s: f64 },
    #[error(transparent)]
    Lpc(#[from] LpcError),
    #[error(transparent)]
    Roots(#[from] RootError),
    #[error("only {found} formant candidates survived, {needed} needed")]
    TooFewFormants { found: usize, needed: usize },
    #[error("tracking failed: {0}")]
    TrackingFailed(String),
    #[error("invalid formant configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantConfig {
    pub ceiling_hz: f64,
    pub order: usize,
    pub frame_ms: f64,
    pub hop_ms: f64,
    pub max_bandwidth_hz: f64,
    /// Candidates must lie in `(edge_margin_hz, ceiling_hz - edge_margin_hz)`.
    pub edge_margin_hz: f64,
    pub context_ms: f64,
    pub pre_emphasis_from_hz: f64,
    /// Number of formants each frame must yield.
    pub n_tracked: usize,
}

impl Default for FormantConfig {
    fn default() -> Self {
        Self {
            ceiling_hz: 5500.0,
            order: 10,
            frame_ms: 25.0,
            hop_ms: 6.25,
            max_bandwidth_hz: 400.0,
            edge_margin_hz: 50.0,
            context_ms: 25.0,
            pre_emphasis_from_hz: 50.0,
            n_tracked: TRACKED_FORMANTS,
        }
    }
}

impl FormantConfig {
    fn validate(&self) -> Result<(), FormantError> {
        let bad = |m: &str| Err(FormantError::InvalidConfig(m.to_string()));
        if !(self.ceiling_hz > 2.0 * self.edge_margin_hz) {
            return bad("ceiling_hz must exceed twice the edge margin");
        }
        if self.order == 0 || self.order % 2 == 1 {
            return bad("order must be a positive even number");
        }
        if !(self.frame_ms > 0.0 && self.hop_ms > 0.0) {
            return bad("frame_ms and hop_ms must be positive");
        }
        if self.n_tracked == 0 || self.n_tracked > MAX_CANDIDATES || 2 * self.n_tracked > self.order
        {
            return bad("n_tracked must be between 1 and min(5, order / 2)");
        }
        if !(self.max_bandwidth_hz > 0.0) {
            return bad("max_bandwidth_hz must be positive");
        }
        Ok(())
    }
}

/// Conditioned samples ready for LPC analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioned {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    /// Clip time of `samples[0]`, in seconds.
    pub start_time_s: f64,
}

impl Conditioned {
    pub fn time_of(&self, index: f64) -> f64 {
        self.start_time_s + index / self.sample_rate
    }
}

/// First-order pre-emphasis `y[n] = x[n] - alpha x[n-1]`, `alpha = exp(-2π f / rate)`.
pub fn pre_emphasize(x: &[f64], sample_rate: f64, from_hz: f64) -> Vec<f64> {
    let alpha = (-2.0 * PI * from_hz / sample_rate).exp();
    let mut out = Vec::with_capacity(x.len());
    let mut prev = 0.0;
    for &v in x {
        out.push(v - alpha * prev);
        prev = v;
    }
    out
}

/// Slices the segment with context, resamples to `2 * ceiling_hz` and pre-emphasizes.
pub fn preprocess(
    clip: &AudioClip,
    seg: &Segment,
    cfg: &FormantConfig,
) -> Result<Conditioned, FormantError> {
    cfg.validate()?;
    if !seg.is_valid() || seg.end_s > clip.duration_s() + 1e-9 {
        return Err(FormantError::InvalidSegment {
            start_s: seg.start_s,
            end_s: seg.end_s,
        });
    }
    let rate = clip.sample_rate();
    let context = cfg.context_ms / 1000.0;
    let lo = time_to_index((seg.start_s - context).max(0.0), rate);
    let hi = time_to_index(seg.end_s + context, rate).min(clip.samples().len());
    let raw = &clip.samples()[lo..hi];

    let target = 2.0 * cfg.ceiling_hz;
    let (resampled, out_rate) = if rate as f64 > target {
        (downsample(raw, rate as f64, target), target)
    } else {
        (raw.to_vec(), rate as f64)
    };

    let needed = frame_len(cfg.frame_ms, out_rate);
    if resampled.len() < needed {
        return Err(FormantError::SegmentTooShort {
            samples: resampled.len(),
            needed,
        });
    }
    Ok(Conditioned {
        samples: pre_emphasize(&resampled, out_rate, cfg.pre_emphasis_from_hz),
        sample_rate: out_rate,
        start_time_s: lo as f64 / rate as f64,
    })
}

fn frame_len(frame_ms: f64, rate: f64) -> usize {
    ((frame_ms / 1000.0 * rate).round() as usize).max(2)
}

/// Gaussian analysis window, zero at both ends.
pub fn gaussian_window(len: usize) -> Vec<f64> {
    let edge = (-12.0f64).exp();
    let denom = (len - 1).max(1) as f64;
    (0..len)
        .map(|n| {
            let u = n as f64 / denom - 0.5;
            ((-12.0 * u * u).exp() - edge) / (1.0 - edge)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Formant {
    pub frequency_hz: f64,
    pub bandwidth_hz: f64,
}

/// Formant candidates of one analysis frame, ascending in frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantFrame {
    pub time_s: f64,
    pub formants: Vec<Formant>,
}

/// Maps predictor roots to formants: each root `r e^{iθ}` with `θ > 0` gives
/// `f = θ·rate/2π` and `b = -ln r · rate/π`. Candidates outside the edge
/// margins or wider than the bandwidth gate are dropped.
pub fn roots_to_formants(
    coefficients: &[f64],
    sample_rate: f64,
    cfg: &FormantConfig,
) -> Result<FormantFrame, FormantError> {
    let poly: Vec<f64> = std::iter::once(1.0)
        .chain(coefficients.iter().copied())
        .collect();
    let roots = aberth_roots(&poly, ROOT_TOLERANCE, MAX_ROOT_ITERATIONS)?;
    let mut formants: Vec<Formant> = roots
        .iter()
        .filter(|z| z.im > 0.0)
        .map(|z| Formant {
            frequency_hz: z.arg() * sample_rate / (2.0 * PI),
            bandwidth_hz: -z.norm().ln() * sample_rate / PI,
        })
        .filter(|f| {
            f.frequency_hz > cfg.edge_margin_hz
                && f.frequency_hz < cfg.ceiling_hz - cfg.edge_margin_hz
                && f.bandwidth_hz > 0.0
                && f.bandwidth_hz < cfg.max_bandwidth_hz
        })
        .collect();
    formants.sort_by(|a, b| a.frequency_hz.total_cmp(&b.frequency_hz));
    formants.dedup_by(|a, b| a.frequency_hz == b.frequency_hz);
    if formants.len() < cfg.n_tracked {
        return Err(FormantError::TooFewFormants {
            found: formants.len(),
            needed: cfg.n_tracked,
        });
    }
    formants.truncate(MAX_CANDIDATES);
    Ok(FormantFrame {
        time_s: 0.0,
        formants,
    })
}

/// Formant values on the 19-point grid of one vowel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormantTrack {
    /// Relative positions `0.05, 0.10, ..., 0.95`.
    pub positions: Vec<f64>,
    /// Clip times of the grid positions.
    pub times_s: Vec<f64>,
    /// One row per grid position, `n_tracked` ascending frequencies per row.
    pub values: Vec<Vec<f64>>,
    pub n_frames: usize,
    pub n_missing: usize,
}

impl FormantTrack {
    /// Contour of formant `i` (0-based) across the grid.
    pub fn formant(&self, i: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[i]).collect()
    }

    pub fn n_formants(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    if t <= times[0] {
        return values[0];
    }
    let last = times.len() - 1;
    if t >= times[last] {
        return values[last];
    }
    let j = times.partition_point(|&x| x <= t);
    let (t0, t1) = (times[j - 1], times[j]);
    let w = (t - t0) / (t1 - t0);
    values[j - 1] + w * (values[j] - values[j - 1])
}

/// Analyses one frame centred at sample position `centre` of the conditioned signal.
fn analyse_frame(
    sig: &Conditioned,
    centre: f64,
    window: &[f64],
    cfg: &FormantConfig,
) -> Option<Vec<f64>> {
    let len = window.len();
    let start = (centre - (len - 1) as f64 / 2.0).round();
    if start < 0.0 || start as usize + len > sig.samples.len() {
        return None;
    }
    let start = start as usize;
    let frame: Vec<f64> = sig.samples[start..start + len]
        .iter()
        .zip(window)
        .map(|(x, w)| x * w)
        .collect();
    let fit = burg_lpc(&frame, cfg.order).ok()?;
    let found = roots_to_formants(&fit.coefficients, sig.sample_rate, cfg).ok()?;
    Some(
        found
            .formants
            .iter()
            .take(cfg.n_tracked)
            .map(|f| f.frequency_hz)
            .collect(),
    )
}

/// Tracks formants through a vowel and samples them on the 19-point grid.
pub fn track(
    clip: &AudioClip,
    seg: &Segment,
    cfg: &FormantConfig,
) -> Result<FormantTrack, FormantError> {
    let sig = preprocess(clip, seg, cfg)?;
    let rate = sig.sample_rate;
    let window = gaussian_window(frame_len(cfg.frame_ms, rate));
    let hop_s = cfg.hop_ms / 1000.0;

    // frame centres laid out symmetrically about the segment midpoint
    let mid = seg.midpoint_s();
    let reach = (seg.duration_s() / 2.0 / hop_s).floor() as i64 + 1;
    let mut times = Vec::new();
    let mut rows: Vec<Option<Vec<f64>>> = Vec::new();
    let mut inside = 0usize;
    let mut inside_missing = 0usize;
    for j in -reach..=reach {
        let t = mid + j as f64 * hop_s;
        let centre = (t - sig.start_time_s) * rate;
        let (lo, hi) = (
            centre - (window.len() - 1) as f64 / 2.0,
            centre + (window.len() - 1) as f64 / 2.0,
        );
        if lo < -0.5 || hi > sig.samples.len() as f64 - 0.5 {
            continue;
        }
        let row = analyse_frame(&sig, centre, &window, cfg);
        if t >= seg.start_s && t <= seg.end_s {
            inside += 1;
            inside_missing += usize::from(row.is_none());
        }
        times.push(t);
        rows.push(row);
    }

    let valid: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].is_some()).collect();
    if valid.is_empty() || inside == 0 || 2 * inside_missing > inside {
        return Err(FormantError::TrackingFailed(format!(
            "{inside_missing} of {inside} frames inside the vowel had no usable formants"
        )));
    }

    let n = cfg.n_tracked;
    let mut tracks: Vec<Vec<f64>> = Vec::with_capacity(n);
    for f in 0..n {
        let vt: Vec<f64> = valid.iter().map(|&i| times[i]).collect();
        let vv: Vec<f64> = valid
            .iter()
            .map(|&i| rows[i].as_ref().map_or(0.0, |r| r[f]))
            .collect();
        // bridge missing frames, then median-3
        let bridged: Vec<f64> = times.iter().map(|&t| interpolate(&vt, &vv, t)).collect();
        let smoothed: Vec<f64> = (0..bridged.len())
            .map(|i| {
                if i == 0 || i + 1 == bridged.len() {
                    bridged[i]
                } else {
                    median3(bridged[i - 1], bridged[i], bridged[i + 1])
                }
            })
            .collect();
        tracks.push(smoothed);
    }

    let positions: Vec<f64> = (0..GRID_POINTS).map(grid_position).collect();
    let grid_times: Vec<f64> = positions
        .iter()
        .map(|p| seg.start_s + p * seg.duration_s())
        .collect();
    let values: Vec<Vec<f64>> = grid_times
        .iter()
        .map(|&t| (0..n).map(|f| interpolate(&times, &tracks[f], t)).collect())
        .collect();

    for (k, row) in values.iter().enumerate() {
        let ascending = row.windows(2).all(|w| w[0] < w[1]);
        let in_range = row.iter().all(|&v| v > 0.0 && v < cfg.ceiling_hz);
        if !ascending || !in_range {
            return Err(FormantError::TrackingFailed(format!(
                "grid row {} is not a valid formant set: {row:?}",
                k + 1
            )));
        }
    }

    Ok(FormantTrack {
        positions,
        times_s: grid_times,
        values,
        n_frames: rows.len(),
        n_missing: rows.len() - valid.len(),
    })
}
