//! Full-factorial fixed-effects model on a treatment-coded design, solved by QR.
//!
//! Speaker and keyword are carried in the records but are not modelled as
//! random effects. Residual degrees of freedom are ordinary least-squares df.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::describe::{dv_values, Scale, ScalePolicy};
use super::dist::student_t_two_sided;
use super::record::{Dv, FeatureRecord};
use super::StatsError;
use crate::factor::{Factor, Variety};
use crate::linalg::{LinalgError, Matrix, Qr};

/// Column tolerance below which a design column counts as aliased.
const ALIAS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorialSpec {
    pub dv: Dv,
    /// Factors in term-naming order.
    pub factors: Vec<Factor>,
    /// Reference level index per factor, aligned with `factors`.
    pub reference: Vec<usize>,
    pub scale: Scale,
    /// Subtract each speaker's mean and add back the mean of their variety.
    pub center_by_speaker: bool,
}

impl FactorialSpec {
    /// Default model for `dv`: its default factors, first level of each as reference.
    pub fn new(dv: Dv, policy: &ScalePolicy) -> Self {
        let factors = dv.default_factors();
        Self {
            dv,
            reference: vec![0; factors.len()],
            factors,
            scale: policy.scale_for(dv),
            center_by_speaker: false,
        }
    }

    pub fn with_reference(mut self, factor: Factor, level: usize) -> Self {
        if let Some(i) = self.factors.iter().position(|&f| f == factor) {
            self.reference[i] = level;
        }
        self
    }

    /// Design terms in order: intercept, then main effects, then interactions
    /// of increasing order. Each entry lists `(factor position, level)` pairs.
    pub fn terms(&self) -> Vec<Vec<(usize, usize)>> {
        let k = self.factors.len();
        let mut out = vec![Vec::new()];
        for size in 1..=k {
            for mask in subsets_of_size(k, size) {
                let mut combos: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
                for &fi in &mask {
                    let levels: Vec<usize> = (0..self.factors[fi].n_levels())
                        .filter(|&l| l != self.reference[fi])
                        .collect();
                    combos = combos
                        .into_iter()
                        .flat_map(|c| {
                            levels.iter().map(move |&l| {
                                let mut c = c.clone();
                                c.push((fi, l));
                                c
                            })
                        })
                        .collect();
                }
                out.extend(combos);
            }
        }
        out
    }

    pub fn term_name(&self, term: &[(usize, usize)]) -> String {
        if term.is_empty() {
            return "Intercept".into();
        }
        term.iter()
            .map(|&(fi, l)| self.factors[fi].term_label(l))
            .collect::<Vec<_>>()
            .join(":")
    }

    fn design_row(&self, record: &FeatureRecord, terms: &[Vec<(usize, usize)>]) -> Vec<f64> {
        let levels: Vec<usize> = self.factors.iter().map(|&f| record.level(f)).collect();
        terms
            .iter()
            .map(|t| {
                if t.iter().all(|&(fi, l)| levels[fi] == l) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }
}

fn subsets_of_size(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, size, &mut Vec::new(), &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub df: usize,
    pub t: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub dv: Dv,
    pub scale: Scale,
    /// `(factor, reference level name)` pairs.
    pub reference: Vec<(Factor, String)>,
    pub terms: Vec<Term>,
    pub residual_sd: f64,
    pub n: usize,
    pub df_residual: usize,
    /// Records dropped because their value could not be put on `scale`.
    pub n_excluded: usize,
    pub center_by_speaker: bool,
    /// Fitted values on `scale`, aligned with `rows`.
    pub fitted: Vec<f64>,
    /// Indices into the input records of the observations used.
    pub rows: Vec<usize>,
}

impl ModelFit {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.term == name)
    }
}

fn speaker_centered(records: &[FeatureRecord], rows: &[usize], values: &[f64]) -> Vec<f64> {
    let mut by_speaker: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    let mut by_variety: BTreeMap<Variety, (f64, usize)> = BTreeMap::new();
    for (&i, &v) in rows.iter().zip(values) {
        let s = by_speaker.entry(records[i].speaker.as_str()).or_default();
        s.0 += v;
        s.1 += 1;
        let g = by_variety.entry(records[i].variety).or_default();
        g.0 += v;
        g.1 += 1;
    }
    rows.iter()
        .zip(values)
        .map(|(&i, &v)| {
            let (ss, sn) = by_speaker[records[i].speaker.as_str()];
            let (vs, vn) = by_variety[&records[i].variety];
            v - ss / sn as f64 + vs / vn as f64
        })
        .collect()
}

/// Ordinary least squares of the spec's DV on the full factorial design.
pub fn fit_factorial(
    records: &[FeatureRecord],
    spec: &FactorialSpec,
) -> Result<ModelFit, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptyInput);
    }
    let terms = spec.terms();
    let p = terms.len();
    let (rows, mut y) = dv_values(records, spec.dv, spec.scale);
    let n = rows.len();
    if n <= p {
        return Err(StatsError::InsufficientData { n, parameters: p });
    }
    if spec.center_by_speaker {
        y = speaker_centered(records, &rows, &y);
    }

    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| spec.design_row(&records[i], &terms))
        .collect();
    let x = Matrix::from_rows(&design);
    let qr = Qr::new(&x, ALIAS_TOLERANCE).map_err(|e| match e {
        LinalgError::RankDeficient(cols) => StatsError::RankDeficientDesign(
            cols.iter().map(|&c| spec.term_name(&terms[c])).collect(),
        ),
        _ => StatsError::InsufficientData { n, parameters: p },
    })?;
    let beta = qr.solve(&y).expect("response length matches design");
    let fitted = x.mul_vec(&beta);
    let sse: f64 = y.iter().zip(&fitted).map(|(a, b)| (a - b).powi(2)).sum();
    let df = n - p;
    let sigma2 = sse / df as f64;
    let diag = qr.inverse_gram_diagonal();

    let terms_out = terms
        .iter()
        .zip(beta.iter().zip(&diag))
        .map(|(t, (&estimate, &g))| {
            let se = (sigma2 * g).sqrt();
            let t_value = if se > 0.0 {
                estimate / se
            } else if estimate == 0.0 {
                0.0
            } else {
                estimate.signum() * f64::INFINITY
            };
            Term {
                term: spec.term_name(t),
                estimate,
                se,
                df,
                t: t_value,
                p: student_t_two_sided(t_value, df as f64),
            }
        })
        .collect();

    Ok(ModelFit {
        dv: spec.dv,
        scale: spec.scale,
        reference: spec
            .factors
            .iter()
            .zip(&spec.reference)
            .map(|(&f, &l)| (f, f.level_name(l).to_string()))
            .collect(),
        terms: terms_out,
        residual_sd: sigma2.sqrt(),
        n,
        df_residual: df,
        n_excluded: records.len() - n,
        center_by_speaker: spec.center_by_speaker,
        fitted,
        rows,
    })
}
