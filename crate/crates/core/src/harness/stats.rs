use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // Reflection.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn incomplete_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
    } else {
        (1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
    }
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `P(F > f)` for an F distribution with `(d1, d2)` degrees of freedom.
pub fn f_survival(f: f64, d1: f64, d2: f64) -> f64 {
    if f.is_infinite() {
        return 0.0;
    }
    if f <= 0.0 {
        return 1.0;
    }
    incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Two-sided `P(|T| > |t|)` for Student's t with `df` degrees of freedom.
pub fn t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    incomplete_beta(df / 2.0, 0.5, df / (df + t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Classic one-way ANOVA.
///
/// With zero within-group variance, F is infinite (p = 0) when the means
/// differ and 0 (p = 1) otherwise.
pub fn one_way_anova(groups: &[&[f64]]) -> Result<TestResult> {
    if groups.len() < 2 || groups.iter().any(|g| g.len() < 2) {
        return Err(Error::InvalidParameter("ANOVA needs at least two groups of two".into()));
    }
    let k = groups.len() as f64;
    let n: f64 = groups.iter().map(|g| g.len() as f64).sum();
    let grand = groups.iter().flat_map(|g| g.iter()).sum::<f64>() / n;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.iter().sum::<f64>() / g.len() as f64;
        ssb += g.len() as f64 * (m - grand) * (m - grand);
        ssw += g.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    }
    let (df_b, df_w) = (k - 1.0, n - k);
    if ssw == 0.0 {
        return Ok(if ssb > 0.0 {
            TestResult { statistic: f64::INFINITY, p_value: 0.0 }
        } else {
            TestResult { statistic: 0.0, p_value: 1.0 }
        });
    }
    let f = (ssb / df_b) / (ssw / df_w);
    Ok(TestResult { statistic: f, p_value: f_survival(f, df_b, df_w) })
}

/// Paired t test on `a - b`, two-sided.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TestResult> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::InvalidParameter("paired t test needs two equal samples of at least two".into()));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TestResult { statistic: 0.0, p_value: 1.0 }
        } else {
            TestResult { statistic: f64::INFINITY.copysign(mean), p_value: 0.0 }
        });
    }
    let t = mean / (var / n).sqrt();
    Ok(TestResult { statistic: t, p_value: t_two_sided(t, n - 1.0) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs with `a < b`.
    pub below: usize,
    /// Pairs with `a > b`.
    pub above: usize,
    pub ties: usize,
    /// Exact one-sided `P(X >= below)` for `X ~ Bin(below + above, 1/2)`.
    pub p_value: f64,
}

/// Exact sign test of the alternative `a < b`; ties are dropped.
pub fn sign_test_less(a: &[f64], b: &[f64]) -> Result<SignTest> {
    if a.len() != b.len() {
        return Err(Error::InvalidParameter("sign test needs paired samples".into()));
    }
    let below = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let above = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let ties = a.len() - below - above;
    Ok(SignTest { below, above, ties, p_value: binomial_upper_tail(below, below + above) })
}

/// `P(X >= k)` for `X ~ Bin(n, 1/2)`.
pub fn binomial_upper_tail(k: usize, n: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let ln_half_n = n as f64 * 0.5f64.ln();
    let ln_choose = |i: usize| ln_gamma(n as f64 + 1.0) - ln_gamma(i as f64 + 1.0) - ln_gamma((n - i) as f64 + 1.0);
    (k..=n).map(|i| (ln_choose(i) + ln_half_n).exp()).sum::<f64>().min(1.0)
}

/// Least-squares slope of `y` against `x`; `None` with fewer than two distinct x.
pub fn slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / sxx)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_integers() {
        for n in 1..20u32 {
            let fact: f64 = (1..n).map(f64::from).product();
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn beta_edges_and_symmetry() {
        assert_eq!(incomplete_beta(2.0, 3.0, 0.0), 0.0);
        assert_eq!(incomplete_beta(2.0, 3.0, 1.0), 1.0);
        // I_x(1, 1) = x.
        assert!((incomplete_beta(1.0, 1.0, 0.3) - 0.3).abs() < 1e-15);
        let x = 0.37;
        assert!((incomplete_beta(2.5, 4.0, x) + incomplete_beta(4.0, 2.5, 1.0 - x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn anova_degenerate_cases() {
        let g = [1.0, 2.0, 3.0];
        let r = one_way_anova(&[&g, &g]).unwrap();
        assert_eq!((r.statistic, r.p_value), (0.0, 1.0));
        let r = one_way_anova(&[&[1.0, 1.0], &[2.0, 2.0]]).unwrap();
        assert_eq!((r.statistic, r.p_value), (f64::INFINITY, 0.0));
        assert_eq!(one_way_anova(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap().p_value, 1.0);
        assert!(one_way_anova(&[&g]).is_err());
        assert!(one_way_anova(&[&g, &[1.0]]).is_err());
    }

    #[test]
    fn anova_toy() {
        let r = one_way_anova(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        assert!((r.statistic - 13.5).abs() < 1e-12);
    }

    #[test]
    fn paired_t_conventions() {
        let a = [1.0, 2.0, 3.0];
        assert_eq!(paired_t_test(&a, &a).unwrap(), TestResult { statistic: 0.0, p_value: 1.0 });
        let r = paired_t_test(&[2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, f64::INFINITY);
        assert_eq!(r.p_value, 0.0);
        assert!(paired_t_test(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn sign_test_counts() {
        let s = sign_test_less(&[1.0, 2.0, 3.0, 4.0], &[2.0, 3.0, 3.0, 1.0]).unwrap();
        assert_eq!((s.below, s.above, s.ties), (2, 1, 1));
        assert!((s.p_value - 0.5).abs() < 1e-15);
        assert!((binomial_upper_tail(5, 5) - 1.0 / 32.0).abs() < 1e-15);
        assert_eq!(binomial_upper_tail(0, 0), 1.0);
    }

    #[test]
    fn slope_and_summaries() {
        assert_eq!(slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), Some(2.0));
        assert_eq!(slope(&[1.0, 1.0], &[0.0, 1.0]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0, 10.0]), Some(2.5));
        assert_eq!(mean(&[]), None);
    }
}
