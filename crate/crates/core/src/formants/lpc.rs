//! Burg linear prediction.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpcError {
    #[error("frame of {len} samples is too short for order {order}")]
    FrameTooShort { len: usize, order: usize },
    #[error("prediction error vanished at stage {stage}")]
    NumericalFailure { stage: usize },
}

/// Predictor polynomial `A(z) = 1 + a1 z^-1 + ... + ap z^-p` and its residual energy.
#[derive(Debug, Clone, PartialEq)]
pub struct LpcFit {
    /// `a1..ap`; the leading 1 is implicit.
    pub coefficients: Vec<f64>,
    pub reflection: Vec<f64>,
    pub residual: f64,
}

impl LpcFit {
    /// Coefficients of `z^p A(z)`, highest degree first.
    pub fn polynomial(&self) -> Vec<f64> {
        std::iter::once(1.0)
            .chain(self.coefficients.iter().copied())
            .collect()
    }
}

/// Burg recursion: each stage picks the reflection coefficient minimizing the
/// summed forward and backward prediction error, so `|k| < 1` and the
/// predictor is minimum phase.
pub fn burg_lpc(frame: &[f64], order: usize) -> Result<LpcFit, LpcError> {
    let n = frame.len();
    if n <= order {
        return Err(LpcError::FrameTooShort { len: n, order });
    }
    let mut residual: f64 = frame.iter().map(|x| x * x).sum();
    let mut a = vec![1.0];
    let mut reflection = Vec::with_capacity(order);
    let mut fwd = frame.to_vec();
    let mut bwd = frame.to_vec();

    for m in 1..=order {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in m..n {
            num += fwd[i] * bwd[i - 1];
            den += fwd[i] * fwd[i] + bwd[i - 1] * bwd[i - 1];
        }
        if !(den > f64::MIN_POSITIVE * 1e6) {
            return Err(LpcError::NumericalFailure { stage: m });
        }
        let k = -2.0 * num / den;

        // descending order keeps bwd[i - 1] at its previous-stage value
        for i in (m..n).rev() {
            let f = fwd[i];
            let b = bwd[i - 1];
            fwd[i] = f + k * b;
            bwd[i] = b + k * f;
        }

        a.push(0.0);
        let prev = a.clone();
        for i in 1..=m {
            a[i] = prev[i] + k * prev[m - i];
        }
        residual *= 1.0 - k * k;
        reflection.push(k);
    }
    Ok(LpcFit {
        coefficients: a[1..].to_vec(),
        reflection,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formants::roots::aberth_roots;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    /// Autocorrelation (Yule-Walker) solution for order 2, used as an independent check.
    fn yule_walker_order2(x: &[f64]) -> [f64; 2] {
        let r = |lag: usize| x.iter().zip(&x[lag..]).map(|(a, b)| a * b).sum::<f64>();
        let (r0, r1, r2) = (r(0), r(1), r(2));
        let det = r0 * r0 - r1 * r1;
        let a1 = -(r1 * r0 - r2 * r1) / det;
        let a2 = -(r2 * r0 - r1 * r1) / det;
        [a1, a2]
    }

    #[test]
    fn white_noise_has_near_zero_predictor() {
        let x = white(4096, 11);
        let fit = burg_lpc(&x, 2).unwrap();
        let yw = yule_walker_order2(&x);
        for (b, y) in fit.coefficients.iter().zip(yw) {
            assert!(b.abs() < 0.1);
            assert!(y.abs() < 0.1);
            assert!((b - y).abs() < 0.01);
        }
    }

    #[test]
    fn order_zero_returns_frame_energy() {
        let x = [1.0, -2.0, 3.0];
        let fit = burg_lpc(&x, 0).unwrap();
        assert!(fit.coefficients.is_empty());
        assert_eq!(fit.residual, 14.0);
    }

    #[test]
    fn recovers_damped_resonator_pole() {
        let (r, theta) = (0.97f64, 0.6f64);
        let mut y = vec![0.0f64; 2000];
        let e = white(2000, 5);
        for n in 0..y.len() {
            let y1 = if n >= 1 { y[n - 1] } else { 0.0 };
            let y2 = if n >= 2 { y[n - 2] } else { 0.0 };
            y[n] = 2.0 * r * theta.cos() * y1 - r * r * y2 + e[n];
        }
        let fit = burg_lpc(&y, 2).unwrap();
        let roots = aberth_roots(&fit.polynomial(), 1e-12, 100).unwrap();
        let angle = roots.iter().map(|z| z.arg().abs()).fold(0.0, f64::max);
        assert!((angle - theta).abs() < 0.01 * theta, "angle {angle}");
    }

    #[test]
    fn silent_frame_fails() {
        assert_eq!(
            burg_lpc(&[0.0; 100], 4),
            Err(LpcError::NumericalFailure { stage: 1 })
        );
        assert_eq!(
            burg_lpc(&[1.0; 3], 3),
            Err(LpcError::FrameTooShort { len: 3, order: 3 })
        );
    }

    #[test]
    fn predictor_is_minimum_phase() {
        for seed in 0..20 {
            let x = white(300, seed);
            let fit = burg_lpc(&x, 10).unwrap();
            assert!(fit.reflection.iter().all(|k| k.abs() < 1.0));
            let roots = aberth_roots(&fit.polynomial(), 1e-12, 100).unwrap();
            assert!(roots.iter().all(|z| z.norm() < 1.0));
        }
    }
}
