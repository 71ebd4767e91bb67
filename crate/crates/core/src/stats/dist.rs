//! Student t tail probabilities and quantiles (via `statrs`) and the Holm adjustment.

use statrs::distribution::{ContinuousCDF, StudentsT};

fn t_dist(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("degrees of freedom must be positive")
}

pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_nan() {
        return f64::NAN;
    }
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    t_dist(df).cdf(t)
}

/// Two-sided p-value `P(|T| >= |t|)`, from the lower tail so tiny p-values keep their precision.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    (2.0 * t_dist(df).cdf(-t.abs())).min(1.0)
}

pub fn student_t_quantile(p: f64, df: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile probability must be in (0, 1)");
    t_dist(df).inverse_cdf(p)
}

/// Holm step-down adjustment; preserves input order.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut adjusted = vec![0.0; m];
    let mut running = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let scaled = ((m - rank) as f64 * p[i]).min(1.0);
        running = running.max(scaled);
        adjusted[i] = running;
    }
    adjusted
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// CDF from the substitution x = sqrt(df) tan(θ), which turns the density
    /// into cos^(df-1)(θ); both integrals by composite Simpson. No gamma functions.
    fn cdf_by_quadrature(t: f64, df: f64) -> f64 {
        let simpson = |a: f64, b: f64, n: usize| {
            let h = (b - a) / n as f64;
            let f = |th: f64| th.cos().powf(df - 1.0);
            let mut s = f(a) + f(b);
            for i in 1..n {
                s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        let theta = (t / df.sqrt()).atan();
        let total = simpson(0.0, std::f64::consts::FRAC_PI_2, 20_000);
        0.5 + simpson(0.0, theta, 20_000) / (2.0 * total)
    }

    #[test]
    fn cdf_matches_quadrature_oracle() {
        for &df in &[1.0, 2.0, 3.0, 5.0, 10.0, 29.0, 120.0] {
            for &t in &[-6.0, -2.5, -0.3, 0.0, 0.7, 1.96, 4.0] {
                let got = student_t_cdf(t, df);
                let want = cdf_by_quadrature(t, df);
                assert!((got - want).abs() < 1e-10, "df={df} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn cauchy_closed_form() {
        // df = 1: F(t) = 1/2 + atan(t)/π
        for &t in &[-3.0, -0.5, 0.25, 2.0] {
            let want = 0.5 + f64::atan(t) / std::f64::consts::PI;
            assert!((student_t_cdf(t, 1.0) - want).abs() < 1e-13);
        }
    }

    #[test]
    fn two_sided_p_at_zero_is_one() {
        assert_eq!(student_t_two_sided(0.0, 7.0), 1.0);
        assert_eq!(student_t_two_sided(f64::INFINITY, 7.0), 0.0);
    }

    #[test]
    fn quantile_inverts_cdf() {
        let q = student_t_quantile(0.975, 10.0);
        assert!((q - 2.228_138_851_986_274).abs() < 1e-9);
    }

    #[test]
    fn holm_hand_example() {
        let adj = holm(&[0.01, 0.04, 0.03, 0.005]);
        for (a, b) in adj.iter().zip([0.03, 0.06, 0.06, 0.02]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn holm_never_decreases_and_keeps_order(p in proptest::collection::vec(0.0f64..1.0, 1..20)) {
            let adj = holm(&p);
            for i in 0..p.len() {
                prop_assert!(adj[i] >= p[i]);
                prop_assert!(adj[i] <= 1.0);
                for j in 0..p.len() {
                    if p[i] < p[j] {
                        prop_assert!(adj[i] <= adj[j]);
                    }
                }
            }
        }
    }
}
