//! Simultaneous polynomial root finding (Aberth–Ehrlich).

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("root iteration did not converge in {iterations} iterations")]
    RootFindingDiverged { iterations: usize },
    #[error("polynomial has a zero leading coefficient")]
    ZeroLeading,
}

pub const ROOT_TOLERANCE: f64 = 1e-12;
pub const MAX_ROOT_ITERATIONS: usize = 100;

/// p(z) and p'(z) by Horner's scheme; coefficients highest degree first.
fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = coeffs[0];
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in &coeffs[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Upper bound on the rounding error of a Horner evaluation at `z`.
fn eval_error_bound(coeffs: &[Complex64], z: Complex64) -> f64 {
    let r = z.norm();
    coeffs.iter().fold(0.0, |acc, c| acc * r + c.norm()) * 4.0 * f64::EPSILON * coeffs.len() as f64
}

/// All complex roots of a real polynomial given highest degree first.
pub fn aberth_roots(
    coeffs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<Complex64>, RootError> {
    let start = coeffs
        .iter()
        .position(|&c| c != 0.0)
        .unwrap_or(coeffs.len());
    let coeffs = &coeffs[start..];
    if coeffs.len() <= 1 {
        return Ok(Vec::new());
    }
    if coeffs[0] == 0.0 {
        return Err(RootError::ZeroLeading);
    }
    let c: Vec<Complex64> = coeffs
        .iter()
        .map(|&x| Complex64::new(x / coeffs[0], 0.0))
        .collect();
    let n = c.len() - 1;

    // start on a circle whose radius is the geometric mean of the root moduli
    let radius = {
        let prod = c[n].norm();
        if prod > 0.0 {
            prod.powf(1.0 / n as f64)
        } else {
            1.0 + c[1..].iter().map(|x| x.norm()).fold(0.0, f64::max) / 2.0
        }
    };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            Complex64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4,
            )
        })
        .collect();
    let mut done = vec![false; n];

    for _ in 0..max_iter {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let (p, dp) = eval_with_derivative(&c, z[i]);
            if p.norm() <= eval_error_bound(&c, z[i]) {
                done[i] = true;
                continue;
            }
            let ratio = if dp.norm() == 0.0 {
                Complex64::new(radius * 1e-3, radius * 1e-3)
            } else {
                p / dp
            };
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            z[i] -= step;
            if step.norm() <= tol * z[i].norm().max(1.0) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok(z);
        }
    }
    Err(RootError::RootFindingDiverged {
        iterations: max_iter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_from_roots(roots: &[Complex64]) -> Vec<f64> {
        let mut p = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= c * r;
            }
            p = next;
        }
        p.into_iter().map(|c| c.re).collect()
    }

    #[test]
    fn recovers_constructed_conjugate_pairs() {
        let mut roots = Vec::new();
        for (r, th) in [(0.98, 0.3), (0.95, 1.1), (0.9, 2.0), (0.7, 2.9)] {
            roots.push(Complex64::from_polar(r, th));
            roots.push(Complex64::from_polar(r, -th));
        }
        roots.push(Complex64::new(0.5, 0.0));
        let found = aberth_roots(
            &poly_from_roots(&roots),
            ROOT_TOLERANCE,
            MAX_ROOT_ITERATIONS,
        )
        .unwrap();
        assert_eq!(found.len(), roots.len());
        for r in &roots {
            let best = found
                .iter()
                .map(|f| (f - r).norm())
                .fold(f64::MAX, f64::min);
            assert!(best < 1e-9, "missing {r}: {best}");
        }
    }

    #[test]
    fn linear_and_constant_polynomials() {
        assert!(aberth_roots(&[3.0], ROOT_TOLERANCE, 10).unwrap().is_empty());
        let r = aberth_roots(&[2.0, -1.0], ROOT_TOLERANCE, 100).unwrap();
        assert!((r[0] - Complex64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn zero_root_is_found() {
        let r = aberth_roots(&[1.0, -1.0, 0.0], ROOT_TOLERANCE, 100).unwrap();
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!(re[0].abs() < 1e-12 && (re[1] - 1.0).abs() < 1e-12);
    }
}
