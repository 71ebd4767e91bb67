//! Reference formulas written independently of the analysis modules.

/// `[mean, sd, skewness, excess kurtosis]` of `n` equally weighted points
/// `start, start + step, …`.
pub fn discrete_uniform_moments(start: f64, step: f64, n: usize) -> [f64; 4] {
    let n = n as f64;
    let mean = start + step * (n - 1.0) / 2.0;
    let sd = step * ((n * n - 1.0) / 12.0).sqrt();
    let kurt = -6.0 * (n * n + 1.0) / (5.0 * (n * n - 1.0));
    [mean, sd, 0.0, kurt]
}

/// `[mean, sd, skewness, excess kurtosis]` of weights over values, by direct summation.
pub fn direct_moments(values: &[f64], weights: &[f64]) -> [f64; 4] {
    let mut total = 0.0;
    let mut first = 0.0;
    for i in 0..values.len() {
        total += weights[i];
        first += weights[i] * values[i];
    }
    let mean = first / total;
    let (mut c2, mut c3, mut c4) = (0.0, 0.0, 0.0);
    for i in 0..values.len() {
        let d = values[i] - mean;
        let p = weights[i] / total;
        c2 += p * d * d;
        c3 += p * d * d * d;
        c4 += p * d * d * d * d;
    }
    let sd = c2.sqrt();
    [mean, sd, c3 / (sd * sd * sd), c4 / (c2 * c2) - 3.0]
}

/// Moments of a line spectrum: partial frequencies weighted by amplitude squared.
pub fn line_spectrum_moments(partials: &[(f64, f64)]) -> [f64; 4] {
    let f: Vec<f64> = partials.iter().map(|p| p.0).collect();
    let w: Vec<f64> = partials.iter().map(|p| p.1 * p.1).collect();
    direct_moments(&f, &w)
}
