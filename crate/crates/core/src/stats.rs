//! Student's t tail probabilities and Pearson correlation.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{Error, Result};

/// Two-sided tail probability `P(|T| >= |t|)` for Student's t with `dof`
/// degrees of freedom.
pub fn t_two_sided_p(t: f64, dof: f64) -> Result<f64> {
    if !(dof > 0.0) || !dof.is_finite() {
        return Err(Error::Domain(format!("degrees of freedom must be positive, got {dof}")));
    }
    if t.is_nan() {
        return Err(Error::Domain("t statistic is NaN".into()));
    }
    if t.is_infinite() {
        return Ok(0.0);
    }
    let dist = StudentsT::new(0.0, 1.0, dof).map_err(|e| Error::Domain(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).min(1.0))
}

/// Relative spread below which a vector counts as constant.
const ZERO_VARIANCE_REL: f64 = 1e-12;

fn centered_sum_sq(v: &[f64], mean: f64) -> f64 {
    v.iter().map(|x| (x - mean) * (x - mean)).sum()
}

fn is_constant(v: &[f64], ss: f64) -> bool {
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let sd = (ss / v.len() as f64).sqrt();
    sd <= ZERO_VARIANCE_REL * scale || ss == 0.0
}

/// Pearson product-moment correlation of two equally long samples.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Domain(format!(
            "pearson_r: length mismatch ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Domain(format!(
            "pearson_r: need at least 3 samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Domain("pearson_r: non-finite sample".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx = centered_sum_sq(x, mx);
    let syy = centered_sum_sq(y, my);
    if is_constant(x, sxx) {
        return Err(Error::UndefinedCorrelation("first argument has zero variance".into()));
    }
    if is_constant(y, syy) {
        return Err(Error::UndefinedCorrelation("second argument has zero variance".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Outcome of the t-based significance test for a correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTest {
    pub t_stat: f64,
    pub p_value: f64,
    /// Set when `|r| = 1`: the p-value is exactly zero rather than a tail
    /// probability.
    pub exact: bool,
}

/// Two-sided p-value for Pearson's `r` over `n_samples` pairs, using
/// `t = r·sqrt((n−2)/(1−r²))` against Student's t with `n−2` dof.
pub fn correlation_p_value(r: f64, n_samples: usize) -> Result<CorrelationTest> {
    if n_samples < 3 {
        return Err(Error::Domain(format!("correlation test needs n >= 3, got {n_samples}")));
    }
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("correlation {r} outside [-1, 1]")));
    }
    if r.abs() == 1.0 {
        return Ok(CorrelationTest {
            t_stat: f64::INFINITY.copysign(r),
            p_value: 0.0,
            exact: true,
        });
    }
    let dof = (n_samples - 2) as f64;
    let t_stat = r * (dof / (1.0 - r * r)).sqrt();
    let p_value = if r == 0.0 { 1.0 } else { t_two_sided_p(t_stat, dof)? };
    Ok(CorrelationTest {
        t_stat,
        p_value,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlation() {
        let x = [1.0, 2.0, 4.0, 7.0];
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let y: Vec<f64> = x.iter().map(|v| 3.0 - v).collect();
        assert!((pearson_r(&x, &y).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn outlier_case_matches_spreadsheet_formula() {
        // Evaluated independently with the textbook formula in a spreadsheet.
        let r = pearson_r(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 100.0]).unwrap();
        assert!((r - 0.78502642096301).abs() < 1e-12, "{r}");
    }

    #[test]
    fn zero_variance_is_undefined() {
        let err = pearson_r(&[0.3, 0.3, 0.3], &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::UndefinedCorrelation(_)));
    }

    #[test]
    fn short_or_mismatched_input() {
        assert!(matches!(pearson_r(&[1.0, 2.0], &[1.0, 2.0]), Err(Error::Domain(_))));
        assert!(matches!(
            pearson_r(&[1.0, 2.0, 3.0], &[1.0, 2.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn null_correlation_has_unit_p() {
        let t = correlation_p_value(0.0, 421).unwrap();
        assert_eq!(t.p_value, 1.0);
        assert!(!t.exact);
    }

    #[test]
    fn perfect_correlation_flagged_exact() {
        let t = correlation_p_value(-1.0, 10).unwrap();
        assert_eq!(t.p_value, 0.0);
        assert!(t.exact);
    }

    #[test]
    fn p_value_domain() {
        assert!(correlation_p_value(0.5, 2).is_err());
        assert!(correlation_p_value(1.5, 20).is_err());
    }

    #[test]
    fn weak_correlation_over_421_respondents() {
        let p = correlation_p_value(0.1, 421).unwrap().p_value;
        assert!((p - 0.040279489431613511).abs() < 1e-9, "{p}");
    }

    #[test]
    fn p_monotone_in_abs_r() {
        let mut last = 1.0 + 1e-12;
        for i in 0..99 {
            let r = i as f64 / 100.0;
            let p = correlation_p_value(r, 30).unwrap().p_value;
            assert!(p <= last, "r={r}");
            assert!(p > 0.0);
            last = p;
        }
    }

    #[test]
    fn t_tail_is_symmetric() {
        let a = t_two_sided_p(2.1, 17.0).unwrap();
        let b = t_two_sided_p(-2.1, 17.0).unwrap();
        assert_eq!(a, b);
    }
}
