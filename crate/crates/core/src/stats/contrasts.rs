//! Welch two-sample contrasts between cells, Holm-adjusted within families.
//!
//! Families: every segment pair within one (stress, variety) stratum, and the
//! AG–CG comparison of every segment within one stress stratum.

use serde::{Deserialize, Serialize};

use super::describe::{dv_values, mean_sd, Scale};
use super::dist::{holm, student_t_two_sided};
use super::record::{Dv, FeatureRecord};
use crate::factor::{Sonorant, Stress, Variety};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchT {
    /// Difference of means, first minus second.
    pub estimate: f64,
    pub se: f64,
    pub df: f64,
    pub t: f64,
    pub p: f64,
}

/// Welch's unequal-variance t test; `None` when either sample has fewer than two values.
pub fn welch_t(a: &[f64], b: &[f64]) -> Option<WelchT> {
    if a.len() < 2 || b.len() < 2 {
        return None;
    }
    let (ma, sa) = mean_sd(a);
    let (mb, sb) = mean_sd(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let va = sa.unwrap().powi(2) / na;
    let vb = sb.unwrap().powi(2) / nb;
    let se = (va + vb).sqrt();
    let estimate = ma - mb;
    let df = if va + vb > 0.0 {
        (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0))
    } else {
        na + nb - 2.0
    };
    let t = if se > 0.0 {
        estimate / se
    } else if estimate == 0.0 {
        0.0
    } else {
        estimate.signum() * f64::INFINITY
    };
    Some(WelchT {
        estimate,
        se,
        df,
        t,
        p: student_t_two_sided(t, df),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contrast {
    pub family: String,
    pub stress: Stress,
    /// e.g. `AG [l] – AG [r]`
    pub label: String,
    pub n: (usize, usize),
    /// Absent when a cell has fewer than two observations.
    pub test: Option<WelchT>,
    pub p_holm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastTable {
    pub dv: Dv,
    pub scale: Scale,
    pub rows: Vec<Contrast>,
}

pub fn cell_label(variety: Variety, segment: Sonorant) -> String {
    format!("{variety} [{segment}]")
}

/// Values of one (variety, stress, segment) cell on `scale`, sorted.
fn cell(
    records: &[FeatureRecord],
    idx: &[usize],
    vals: &[f64],
    v: Variety,
    s: Stress,
    g: Sonorant,
) -> Vec<f64> {
    let mut out: Vec<f64> = idx
        .iter()
        .zip(vals)
        .filter(|(&i, _)| {
            let r = &records[i];
            r.variety == v && r.stress == s && r.segment == g
        })
        .map(|(_, &x)| x)
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

fn push_family(
    rows: &mut Vec<Contrast>,
    family: String,
    stress: Stress,
    pairs: Vec<(String, Vec<f64>, Vec<f64>)>,
) {
    let tests: Vec<Option<WelchT>> = pairs.iter().map(|(_, a, b)| welch_t(a, b)).collect();
    let present: Vec<f64> = tests.iter().flatten().map(|t| t.p).collect();
    let mut adjusted = holm(&present).into_iter();
    for ((label, a, b), test) in pairs.into_iter().zip(tests) {
        let p_holm = test.map(|_| adjusted.next().expect("one adjusted p per test"));
        rows.push(Contrast {
            family: family.clone(),
            stress,
            label,
            n: (a.len(), b.len()),
            test,
            p_holm,
        });
    }
}

/// All segment-pair and variety-pair contrasts of `dv` on `scale`.
pub fn pairwise_contrasts(records: &[FeatureRecord], dv: Dv, scale: Scale) -> ContrastTable {
    let (idx, vals) = dv_values(records, dv, scale);
    let mut rows = Vec::new();
    for &stress in Stress::ALL {
        for &variety in Variety::ALL {
            let mut pairs = Vec::new();
            for (i, &g1) in Sonorant::ALL.iter().enumerate() {
                for &g2 in &Sonorant::ALL[i + 1..] {
                    pairs.push((
                        format!("{} – {}", cell_label(variety, g1), cell_label(variety, g2)),
                        cell(records, &idx, &vals, variety, stress, g1),
                        cell(records, &idx, &vals, variety, stress, g2),
                    ));
                }
            }
            push_family(
                &mut rows,
                format!("segment|{stress}|{variety}"),
                stress,
                pairs,
            );
        }
        let pairs = Sonorant::ALL
            .iter()
            .map(|&g| {
                (
                    format!(
                        "{} – {}",
                        cell_label(Variety::Ag, g),
                        cell_label(Variety::Cg, g)
                    ),
                    cell(records, &idx, &vals, Variety::Ag, stress, g),
                    cell(records, &idx, &vals, Variety::Cg, stress, g),
                )
            })
            .collect();
        push_family(&mut rows, format!("variety|{stress}"), stress, pairs);
    }
    ContrastTable { dv, scale, rows }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::Vowel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identical_cells() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let w = welch_t(&a, &a).unwrap();
        assert_eq!(w.t, 0.0);
        assert_eq!(w.p, 1.0);
        assert_eq!(w.estimate, 0.0);
        let c = [5.0, 5.0, 5.0];
        let w = welch_t(&c, &c).unwrap();
        assert_eq!((w.estimate, w.t, w.p), (0.0, 0.0, 1.0));
    }

    #[test]
    fn antisymmetric_under_swap() {
        let a = [1.0, 2.5, 3.0, 4.2, 0.3];
        let b = [2.0, 2.9, 7.0];
        let x = welch_t(&a, &b).unwrap();
        let y = welch_t(&b, &a).unwrap();
        assert_eq!(x.estimate, -y.estimate);
        assert_eq!(x.t, -y.t);
        assert_eq!(x.p, y.p);
    }

    #[test]
    fn welch_df_matches_hand_computation() {
        // a: mean 2, var 1, n 3; b: mean 5, var 4, n 5
        let a = [1.0, 2.0, 3.0];
        let b = [3.0, 3.0, 5.0, 7.0, 7.0];
        let w = welch_t(&a, &b).unwrap();
        let (va, vb) = (1.0 / 3.0, 4.0 / 5.0);
        let df = (va + vb) * (va + vb) / (va * va / 2.0 + vb * vb / 4.0);
        assert!((w.df - df).abs() < 1e-12);
        assert!((w.t - (-3.0 / (va + vb).sqrt())).abs() < 1e-12);
        assert!(welch_t(&a[..1], &b).is_none());
    }

    fn rec(v: Variety, s: Stress, g: Sonorant, cog: f64) -> FeatureRecord {
        FeatureRecord {
            speaker: "s".into(),
            keyword: "k".into(),
            variety: v,
            stress: s,
            segment: g,
            vowel: Vowel::A,
            duration_ms: 50.0,
            m1_cog_hz: cog,
            m2_sd_hz: 1.0,
            m3_skew: 0.0,
            m4_kurt: 0.0,
            contour: [[0.0; 3]; 4],
            contour_rmse: [0.0; 4],
            n_frames_averaged: 1,
        }
    }

    #[test]
    fn separated_cells_are_significant_after_holm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut recs = Vec::new();
        for &g in Sonorant::ALL {
            let shift = if g == Sonorant::R { 5.0 } else { 0.0 };
            for _ in 0..50 {
                let z: f64 = StandardNormal.sample(&mut rng);
                recs.push(rec(Variety::Ag, Stress::Stressed, g, z + shift));
            }
        }
        let table = pairwise_contrasts(&recs, Dv::Cog, Scale::Raw);
        let row = table
            .rows
            .iter()
            .find(|r| r.label == "AG [l] – AG [r]")
            .unwrap();
        assert!(row.p_holm.unwrap() < 1e-6);
        assert!(row.test.unwrap().estimate < -4.0);
        // cells with no data produce rows without statistics
        let empty = table
            .rows
            .iter()
            .find(|r| r.label == "AG [l] – CG [l]")
            .unwrap();
        assert!(empty.test.is_none() && empty.p_holm.is_none());
        assert_eq!(table.rows.len(), 2 * (2 * 6 + 4));
    }
}
