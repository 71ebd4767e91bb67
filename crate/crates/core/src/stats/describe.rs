use serde::{Deserialize, Serialize};

use super::record::{Dv, FeatureRecord};
use super::StatsError;
use crate::factor::Factor;

/// Scale on which a dependent variable enters a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scale {
    Raw,
    Log,
}

/// Which dependent variables are modelled on the natural-log scale.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScalePolicy {
    /// Also log skewness and kurtosis, dropping non-positive values.
    pub log_shape_moments: bool,
}

impl ScalePolicy {
    pub fn scale_for(&self, dv: Dv) -> Scale {
        match dv {
            Dv::Duration | Dv::Cog | Dv::Sd => Scale::Log,
            Dv::Skewness | Dv::Kurtosis if self.log_shape_moments => Scale::Log,
            _ => Scale::Raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("cannot take the logarithm of {0}")]
pub struct NonPositiveValue(pub f64);

/// Natural logarithm of a strictly positive value.
pub fn log_transform(x: f64) -> Result<f64, NonPositiveValue> {
    if x > 0.0 && x.is_finite() {
        Ok(x.ln())
    } else {
        Err(NonPositiveValue(x))
    }
}

/// Values of `dv` on `scale`, with the indices of the records they came from.
/// Records whose value cannot be transformed are left out.
pub fn dv_values(records: &[FeatureRecord], dv: Dv, scale: Scale) -> (Vec<usize>, Vec<f64>) {
    let mut idx = Vec::with_capacity(records.len());
    let mut vals = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        let v = r.value(dv);
        let t = match scale {
            Scale::Raw => Some(v).filter(|v| v.is_finite()),
            Scale::Log => log_transform(v).ok(),
        };
        if let Some(t) = t {
            idx.push(i);
            vals.push(t);
        }
    }
    (idx, vals)
}

/// A cell of a summary table: factor levels, count and per-DV mean and SD.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    /// Level index per grouping factor, in the table's factor order.
    pub key: Vec<usize>,
    pub n: usize,
    pub mean: Vec<f64>,
    /// Sample SD (n - 1 denominator); `None` for single-record cells.
    pub sd: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub group_by: Vec<Factor>,
    pub dvs: Vec<Dv>,
    pub cells: Vec<CellSummary>,
}

impl SummaryTable {
    /// Level names of a cell key, e.g. `["AG", "l", "stressed"]`.
    pub fn key_names(&self, cell: &CellSummary) -> Vec<&'static str> {
        self.group_by
            .iter()
            .zip(&cell.key)
            .map(|(f, &l)| f.level_name(l))
            .collect()
    }
}

pub fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, Some((ss / (n - 1.0)).sqrt()))
}

/// Raw-scale mean and SD per cell, cells sorted by level index in `group_by` order.
pub fn summarize(
    records: &[FeatureRecord],
    group_by: &[Factor],
    dvs: &[Dv],
) -> Result<SummaryTable, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let mut keyed: Vec<(Vec<usize>, &FeatureRecord)> = records
        .iter()
        .map(|r| (group_by.iter().map(|&f| r.level(f)).collect(), r))
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));

    let mut cells = Vec::new();
    let mut start = 0;
    while start < keyed.len() {
        let end = start
            + keyed[start..]
                .iter()
                .take_while(|(k, _)| *k == keyed[start].0)
                .count();
        let members = &keyed[start..end];
        let mut mean = Vec::with_capacity(dvs.len());
        let mut sd = Vec::with_capacity(dvs.len());
        for &dv in dvs {
            // sort so that the result does not depend on input order
            let mut vals: Vec<f64> = members.iter().map(|(_, r)| r.value(dv)).collect();
            vals.sort_by(f64::total_cmp);
            let (m, s) = mean_sd(&vals);
            mean.push(m);
            sd.push(s);
        }
        cells.push(CellSummary {
            key: keyed[start].0.clone(),
            n: members.len(),
            mean,
            sd,
        });
        start = end;
    }
    Ok(SummaryTable {
        group_by: group_by.to_vec(),
        dvs: dvs.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::{Sonorant, Stress, Variety, Vowel};
    use proptest::prelude::*;

    pub(crate) fn record(
        variety: Variety,
        segment: Sonorant,
        stress: Stress,
        duration: f64,
    ) -> FeatureRecord {
        FeatureRecord {
            speaker: "s1".into(),
            keyword: "k".into(),
            variety,
            stress,
            segment,
            vowel: Vowel::A,
            duration_ms: duration,
            m1_cog_hz: 800.0,
            m2_sd_hz: 700.0,
            m3_skew: 10.0,
            m4_kurt: 200.0,
            contour: [[500.0, 1.0, 0.1]; 4],
            contour_rmse: [1.0; 4],
            n_frames_averaged: 3,
        }
    }

    #[test]
    fn log_identities() {
        assert_eq!(log_transform(1.0).unwrap(), 0.0);
        assert!((log_transform(757.9).unwrap() - 6.630_551).abs() < 1e-5);
        for x in [24.77, 84.16, 1182.70] {
            assert!((log_transform(x).unwrap().exp() - x).abs() < 1e-12 * x);
        }
        assert_eq!(log_transform(-1.0), Err(NonPositiveValue(-1.0)));
        assert!(log_transform(0.0).is_err());
    }

    #[test]
    fn table_intercepts_are_geometric_means_of_plausible_size() {
        // exp of the CoG and duration intercepts of the reference cell
        assert!((6.63f64.exp() / 757.9 - 1.0).abs() < 1e-3);
        assert!((4.38f64.exp() / 79.8 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn planted_cell_mean_and_sd() {
        let recs: Vec<FeatureRecord> = [80.0, 84.0, 88.0]
            .iter()
            .map(|&d| record(Variety::Ag, Sonorant::L, Stress::Stressed, d))
            .collect();
        let t = summarize(
            &recs,
            &[Factor::Variety, Factor::Segment, Factor::Stress],
            &[Dv::Duration],
        )
        .unwrap();
        assert_eq!(t.cells.len(), 1);
        assert_eq!(t.cells[0].n, 3);
        assert!((t.cells[0].mean[0] - 84.0).abs() < 1e-12);
        assert!((t.cells[0].sd[0].unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(t.key_names(&t.cells[0]), vec!["AG", "l", "stressed"]);
    }

    #[test]
    fn singleton_cell_has_no_sd() {
        let recs = vec![record(Variety::Cg, Sonorant::R, Stress::Unstressed, 24.0)];
        let t = summarize(&recs, &[Factor::Variety], &[Dv::Duration]).unwrap();
        assert_eq!(t.cells[0].mean[0], 24.0);
        assert_eq!(t.cells[0].sd[0], None);
        assert_eq!(
            summarize(&[], &[Factor::Variety], &[Dv::Duration]),
            Err(StatsError::EmptyInput)
        );
    }

    #[test]
    fn log_policy_defaults() {
        let p = ScalePolicy::default();
        assert_eq!(p.scale_for(Dv::Cog), Scale::Log);
        assert_eq!(p.scale_for(Dv::Skewness), Scale::Raw);
        assert_eq!(
            ScalePolicy {
                log_shape_moments: true
            }
            .scale_for(Dv::Kurtosis),
            Scale::Log
        );
        let recs = vec![record(Variety::Ag, Sonorant::L, Stress::Stressed, 80.0), {
            let mut r = record(Variety::Ag, Sonorant::L, Stress::Stressed, 80.0);
            r.m3_skew = -1.0;
            r
        }];
        let (idx, _) = dv_values(&recs, Dv::Skewness, Scale::Log);
        assert_eq!(idx, vec![0]);
    }

    proptest! {
        #[test]
        fn summary_is_permutation_invariant_and_weights_to_grand_mean(
            durations in proptest::collection::vec((0usize..4, 0usize..2, 1.0f64..200.0), 1..40),
            rot in 0usize..40,
        ) {
            let recs: Vec<FeatureRecord> = durations
                .iter()
                .map(|&(s, v, d)| record(Variety::ALL[v], Sonorant::ALL[s], Stress::Stressed, d))
                .collect();
            let mut shuffled = recs.clone();
            let k = rot % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let by = [Factor::Variety, Factor::Segment];
            let a = summarize(&recs, &by, &[Dv::Duration]).unwrap();
            let b = summarize(&shuffled, &by, &[Dv::Duration]).unwrap();
            prop_assert_eq!(&a, &b);
            let grand = recs.iter().map(|r| r.duration_ms).sum::<f64>() / recs.len() as f64;
            let weighted = a.cells.iter().map(|c| c.mean[0] * c.n as f64).sum::<f64>() / recs.len() as f64;
            prop_assert!((grand - weighted).abs() < 1e-9 * grand);
        }
    }
}
