//! L2-regularized logistic regression predicting variety (CG = positive class).
//!
//! The objective is `(1/n) Σ nll_i + (λ/2)‖w‖²` with the bias unpenalized,
//! minimized by full-batch gradient descent with Armijo backtracking.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::factor::Variety;
use crate::stats::record::{Dv, FeatureRecord};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifyError {
    #[error("training data contains only one class")]
    SingleClassInput,
    #[error("feature {feature} of row {row} is not finite")]
    NonFiniteFeature { row: usize, feature: String },
    #[error("feature {0} is missing or not finite")]
    MissingFeature(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),
    #[error("each class needs at least {needed} records for cross-validation, smallest has {got}")]
    TooFewRecords { needed: usize, got: usize },
}

pub const DEFAULT_FEATURES: [&str; 5] = ["log_duration", "log_m1", "log_m2", "m3", "m4"];

/// The 17 default features: log duration, log CoG, log SD, skewness, kurtosis
/// and the 12 contour coefficients.
pub fn default_features() -> Vec<String> {
    DEFAULT_FEATURES
        .iter()
        .map(|s| s.to_string())
        .chain(Dv::contours().map(Dv::column))
        .collect()
}

/// Value of a named feature. `log_*` names take the log of the duration,
/// CoG or SD; any `features.csv` numeric column name is accepted as is.
pub fn feature_value(record: &FeatureRecord, name: &str) -> Result<f64, ClassifyError> {
    let v = match name {
        "log_duration" => record.duration_ms.ln(),
        "log_m1" => record.m1_cog_hz.ln(),
        "log_m2" => record.m2_sd_hz.ln(),
        "m3" => record.m3_skew,
        "m4" => record.m4_kurt,
        other => record.value(
            other
                .parse::<Dv>()
                .map_err(|_| ClassifyError::UnknownFeature(other.to_string()))?,
        ),
    };
    Ok(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub l2_lambda: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            l2_lambda: 1e-3,
            tol: 1e-8,
            max_iter: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierModel {
    pub features: Vec<String>,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub l2_lambda: f64,
    pub iterations: usize,
    pub final_loss: f64,
    pub converged: bool,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Objective value and gradient `(∂w, ∂b)` at `(w, b)` for standardized rows `x`.
pub fn loss_and_gradient(
    x: &[Vec<f64>],
    y: &[bool],
    w: &[f64],
    b: f64,
    lambda: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut loss = 0.0;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (row, &label) in x.iter().zip(y) {
        let z = b + row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
        let t = if label { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let r = sigmoid(z) - t;
        for (g, a) in gw.iter_mut().zip(row) {
            *g += r * a;
        }
        gb += r;
    }
    let penalty: f64 = w.iter().map(|v| v * v).sum::<f64>() * lambda / 2.0;
    for (g, v) in gw.iter_mut().zip(w) {
        *g = *g / n + lambda * v;
    }
    (loss / n + penalty, gw, gb / n)
}

fn standardization(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let d = x.first().map_or(0, Vec::len);
    let n = x.len() as f64;
    let means: Vec<f64> = (0..d)
        .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n)
        .collect();
    let sds = (0..d)
        .map(|j| {
            let var = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / n;
            // a constant feature carries no information; unit scale keeps sd > 0
            if var > 0.0 {
                var.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    (means, sds)
}

fn standardize(row: &[f64], means: &[f64], sds: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(means.iter().zip(sds))
        .map(|(v, (m, s))| (v - m) / s)
        .collect()
}

/// Trains on raw feature rows; `y` is true for CG.
pub fn train_rows(
    features: &[String],
    x: &[Vec<f64>],
    y: &[bool],
    cfg: &TrainConfig,
    init: Option<(&[f64], f64)>,
) -> Result<ClassifierModel, ClassifyError> {
    if !(y.iter().any(|&v| v) && y.iter().any(|&v| !v)) {
        return Err(ClassifyError::SingleClassInput);
    }
    for (i, row) in x.iter().enumerate() {
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(ClassifyError::NonFiniteFeature {
                row: i,
                feature: features[j].clone(),
            });
        }
    }
    // canonical row order makes every reduction independent of input order
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        x[a].iter()
            .zip(&x[b])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(y[a].cmp(&y[b]))
    });
    let x: Vec<Vec<f64>> = order.iter().map(|&i| x[i].clone()).collect();
    let y: Vec<bool> = order.iter().map(|&i| y[i]).collect();

    let (means, sds) = standardization(&x);
    let xs: Vec<Vec<f64>> = x.iter().map(|r| standardize(r, &means, &sds)).collect();
    let d = features.len();
    let (mut w, mut b) = match init {
        Some((w0, b0)) => (w0.to_vec(), b0),
        None => (vec![0.0; d], 0.0),
    };

    let lambda = cfg.l2_lambda;
    let (mut loss, mut gw, mut gb) = loss_and_gradient(&xs, &y, &w, b, lambda);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let gnorm = gw.iter().fold(gb.abs(), |m, g| m.max(g.abs()));
        if gnorm < cfg.tol {
            converged = true;
            break;
        }
        let g2: f64 = gw.iter().map(|g| g * g).sum::<f64>() + gb * gb;
        let previous = loss;
        step *= 2.0;
        loop {
            let w_new: Vec<f64> = w.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
            let b_new = b - step * gb;
            let (l_new, gw_new, gb_new) = loss_and_gradient(&xs, &y, &w_new, b_new, lambda);
            if l_new <= loss - 0.5 * step * g2 {
                w = w_new;
                b = b_new;
                loss = l_new;
                gw = gw_new;
                gb = gb_new;
                break;
            }
            step *= 0.5;
            if step < 1e-20 {
                break;
            }
        }
        iterations += 1;
        // once the sufficient-decrease margin drops below one ulp of the loss, accepted
        // steps stop lowering it; no descent is possible in floating point
        if step < 1e-20 || loss >= previous {
            converged = true;
            break;
        }
    }

    Ok(ClassifierModel {
        features: features.to_vec(),
        means,
        sds,
        weights: w,
        bias: b,
        l2_lambda: lambda,
        iterations,
        final_loss: loss,
        converged,
    })
}

pub fn feature_matrix(
    records: &[FeatureRecord],
    features: &[String],
) -> Result<Vec<Vec<f64>>, ClassifyError> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| {
            features
                .iter()
                .map(|f| {
                    let v = feature_value(r, f)?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(ClassifyError::NonFiniteFeature {
                            row: i,
                            feature: f.clone(),
                        })
                    }
                })
                .collect()
        })
        .collect()
}

pub fn labels(records: &[FeatureRecord]) -> Vec<bool> {
    records.iter().map(|r| r.variety == Variety::Cg).collect()
}

pub fn train(
    records: &[FeatureRecord],
    features: &[String],
    cfg: &TrainConfig,
) -> Result<ClassifierModel, ClassifyError> {
    let x = feature_matrix(records, features)?;
    train_rows(features, &x, &labels(records), cfg, None)
}

impl ClassifierModel {
    /// Probability of CG for a raw feature row.
    pub fn probability(&self, row: &[f64]) -> f64 {
        let z = self.bias
            + standardize(row, &self.means, &self.sds)
                .iter()
                .zip(&self.weights)
                .map(|(a, w)| a * w)
                .sum::<f64>();
        sigmoid(z)
    }

    pub fn accuracy(&self, x: &[Vec<f64>], y: &[bool]) -> f64 {
        let hits = x
            .iter()
            .zip(y)
            .filter(|(r, &t)| (self.probability(r) >= 0.5) == t)
            .count();
        hits as f64 / x.len() as f64
    }
}

/// Probability of CG and the predicted variety.
pub fn predict(
    model: &ClassifierModel,
    record: &FeatureRecord,
) -> Result<(f64, Variety), ClassifyError> {
    let row = model
        .features
        .iter()
        .map(|f| {
            feature_value(record, f).and_then(|v| {
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ClassifyError::MissingFeature(f.clone()))
                }
            })
        })
        .collect::<Result<Vec<f64>, _>>()?;
    let p = model.probability(&row);
    Ok((p, if p >= 0.5 { Variety::Cg } else { Variety::Ag }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub k: usize,
    pub seed: u64,
    /// Fold index of every input record.
    pub fold_of: Vec<usize>,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
    /// Standardization means of each fold's training split.
    pub fold_means: Vec<Vec<f64>>,
}

/// Stratified fold assignment: each class is shuffled with the seeded
/// generator and dealt round-robin into `k` folds.
pub fn stratified_folds(y: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold_of = vec![0; y.len()];
    for class in [false, true] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == class).collect();
        idx.shuffle(&mut rng);
        for (j, i) in idx.into_iter().enumerate() {
            fold_of[i] = j % k;
        }
    }
    fold_of
}

pub fn cross_validate_rows(
    features: &[String],
    x: &[Vec<f64>],
    y: &[bool],
    k: usize,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<CvResult, ClassifyError> {
    let smallest = y
        .iter()
        .filter(|&&v| v)
        .count()
        .min(y.iter().filter(|&&v| !v).count());
    if k < 2 || smallest < k {
        return Err(ClassifyError::TooFewRecords {
            needed: k.max(2),
            got: smallest,
        });
    }
    let fold_of = stratified_folds(y, k, seed);
    let mut fold_accuracy = Vec::with_capacity(k);
    let mut fold_means = Vec::with_capacity(k);
    for fold in 0..k {
        let (mut xtr, mut ytr, mut xte, mut yte) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for i in 0..x.len() {
            if fold_of[i] == fold {
                xte.push(x[i].clone());
                yte.push(y[i]);
            } else {
                xtr.push(x[i].clone());
                ytr.push(y[i]);
            }
        }
        let model = train_rows(features, &xtr, &ytr, cfg, None)?;
        fold_accuracy.push(model.accuracy(&xte, &yte));
        fold_means.push(model.means);
    }
    let mean_accuracy = fold_accuracy.iter().sum::<f64>() / k as f64;
    Ok(CvResult {
        k,
        seed,
        fold_of,
        fold_accuracy,
        mean_accuracy,
        fold_means,
    })
}

pub fn cross_validate(
    records: &[FeatureRecord],
    features: &[String],
    k: usize,
    seed: u64,
    cfg: &TrainConfig,
) -> Result<CvResult, ClassifyError> {
    let x = feature_matrix(records, features)?;
    cross_validate_rows(features, &x, &labels(records), k, seed, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn names(d: usize) -> Vec<String> {
        (0..d).map(|j| format!("x{j}")).collect()
    }

    fn gaussian_rows(n: usize, d: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let y = (0..n).map(|_| rng.random_bool(0.5)).collect();
        (x, y)
    }

    fn separable(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<bool>) {
        // points on either side of x0 + x1 = 0 with margin 0.5
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        while x.len() < n {
            let a: f64 = rng.random_range(-3.0..3.0);
            let b: f64 = rng.random_range(-3.0..3.0);
            if (a + b).abs() > 0.5 {
                x.push(vec![a, b]);
                y.push(a + b > 0.0);
            }
        }
        (x, y)
    }

    #[test]
    fn zero_weights_give_one_half() {
        let m = ClassifierModel {
            features: names(2),
            means: vec![3.0, -1.0],
            sds: vec![1.0, 2.0],
            weights: vec![0.0, 0.0],
            bias: 0.0,
            l2_lambda: 1e-3,
            iterations: 0,
            final_loss: 0.0,
            converged: true,
        };
        assert_eq!(m.probability(&[3.0, -1.0]), 0.5);
        assert_eq!(m.probability(&[1e6, 17.0]), 0.5);
    }

    #[test]
    fn negated_parameters_complement_probability() {
        let mut m = ClassifierModel {
            features: names(2),
            means: vec![0.0, 0.0],
            sds: vec![1.0, 1.0],
            weights: vec![0.7, -1.3],
            bias: 0.2,
            l2_lambda: 0.0,
            iterations: 0,
            final_loss: 0.0,
            converged: true,
        };
        let p = m.probability(&[0.4, 0.9]);
        m.weights.iter_mut().for_each(|w| *w = -*w);
        m.bias = -m.bias;
        assert!((m.probability(&[0.4, 0.9]) - (1.0 - p)).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (x, y) = gaussian_rows(60, 4, 3);
        let w = vec![0.3, -0.8, 1.1, 0.05];
        let b = -0.4;
        let lambda = 0.01;
        let (_, gw, gb) = loss_and_gradient(&x, &y, &w, b, lambda);
        let h = 1e-5;
        for j in 0..=w.len() {
            let eval = |delta: f64| {
                let mut w2 = w.clone();
                let mut b2 = b;
                if j < w.len() {
                    w2[j] += delta;
                } else {
                    b2 += delta;
                }
                loss_and_gradient(&x, &y, &w2, b2, lambda).0
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let an = if j < w.len() { gw[j] } else { gb };
            assert!(
                (fd - an).abs() <= 1e-5 * an.abs().max(1e-3),
                "coord {j}: {fd} vs {an}"
            );
        }
    }

    #[test]
    fn separable_data_is_learned() {
        let (x, y) = separable(200, 11);
        let cfg = TrainConfig {
            l2_lambda: 1e-4,
            ..TrainConfig::default()
        };
        let m = train_rows(&names(2), &x, &y, &cfg, None).unwrap();
        assert!(m.accuracy(&x, &y) >= 0.99);
        let cv = cross_validate_rows(&names(2), &x, &y, 5, 1, &cfg).unwrap();
        assert!(cv.mean_accuracy >= 0.99);
    }

    #[test]
    fn permutation_invariant_and_unique_optimum() {
        let (x, y) = gaussian_rows(80, 3, 5);
        let cfg = TrainConfig::default();
        let a = train_rows(&names(3), &x, &y, &cfg, None).unwrap();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.reverse();
        idx.rotate_left(17);
        let xp: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
        let yp: Vec<bool> = idx.iter().map(|&i| y[i]).collect();
        let b = train_rows(&names(3), &xp, &yp, &cfg, None).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
        let c = train_rows(&names(3), &x, &y, &cfg, Some((&[2.0, -3.0, 1.0], 4.0))).unwrap();
        assert!(a.converged && c.converged);
        for (u, v) in a.weights.iter().zip(&c.weights) {
            assert!((u - v).abs() < 1e-6);
        }
    }

    #[test]
    fn overlapping_classes_stop_at_machine_precision() {
        // one informative column among constant ones; some draws stall at a gradient
        // just above tol, which used to run to max_iter
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let y: Vec<bool> = (0..320).map(|i| i % 2 == 1).collect();
            let x: Vec<Vec<f64>> = y
                .iter()
                .map(|&c| {
                    let mut row = vec![1.0; 6];
                    row[2] = if c { 0.25 } else { 0.0 }
                        + 0.4 * {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            z
                        };
                    row
                })
                .collect();
            let m = train_rows(&names(6), &x, &y, &TrainConfig::default(), None).unwrap();
            assert!(
                m.converged && m.iterations < 1000,
                "{} iterations",
                m.iterations
            );
        }
    }

    #[test]
    fn shuffled_labels_stay_near_chance() {
        let (x, y) = gaussian_rows(400, 3, 21);
        let cv = cross_validate_rows(&names(3), &x, &y, 5, 9, &TrainConfig::default()).unwrap();
        let sd = (0.25f64 / 400.0).sqrt();
        assert!(
            (cv.mean_accuracy - 0.5).abs() < 3.0 * sd,
            "{}",
            cv.mean_accuracy
        );
    }

    #[test]
    fn folds_are_seeded_and_stratified() {
        let (x, y) = gaussian_rows(53, 2, 4);
        let f1 = stratified_folds(&y, 5, 42);
        assert_eq!(f1, stratified_folds(&y, 5, 42));
        assert_ne!(f1, stratified_folds(&y, 5, 43));
        let positives = y.iter().filter(|&&v| v).count();
        for fold in 0..5 {
            let c = (0..y.len()).filter(|&i| y[i] && f1[i] == fold).count();
            assert!(c == positives / 5 || c == positives / 5 + 1);
        }
        // training-split means only: test rows never enter the standardization
        let cv = cross_validate_rows(&names(2), &x, &y, 5, 42, &TrainConfig::default()).unwrap();
        for fold in 0..5 {
            let train: Vec<&Vec<f64>> = (0..x.len())
                .filter(|&i| cv.fold_of[i] != fold)
                .map(|i| &x[i])
                .collect();
            let m0 = train.iter().map(|r| r[0]).sum::<f64>() / train.len() as f64;
            assert!((cv.fold_means[fold][0] - m0).abs() < 1e-12);
        }
    }

    #[test]
    fn error_cases() {
        let x = vec![vec![1.0], vec![2.0]];
        assert_eq!(
            train_rows(&names(1), &x, &[true, true], &TrainConfig::default(), None),
            Err(ClassifyError::SingleClassInput)
        );
        let bad = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(
            train_rows(
                &names(1),
                &bad,
                &[true, false],
                &TrainConfig::default(),
                None
            ),
            Err(ClassifyError::NonFiniteFeature { row: 1, .. })
        ));
        assert!(matches!(
            cross_validate_rows(&names(1), &x, &[true, false], 5, 0, &TrainConfig::default()),
            Err(ClassifyError::TooFewRecords { .. })
        ));
        assert_eq!(default_features().len(), 17);
    }
}
