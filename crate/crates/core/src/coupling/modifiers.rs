use crate::{Error, Result};

/// `1 / ((1 − s_elec) + s_elec·p/p0)`, written as `1 / (1 + s_elec·(p/p0 − 1))`
/// so that `p = p0` yields exactly 1.
pub fn cost_modifier(p: f64, p0: f64, s_elec: f64) -> Result<f64> {
    if !(p0 > 0.0) || !p0.is_finite() {
        return Err(Error::Domain(format!("p0 = {p0} must be positive")));
    }
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p = {p} must be finite and nonnegative")));
    }
    if !(s_elec > 0.0 && s_elec < 1.0) {
        return Err(Error::Domain(format!("electricity share {s_elec} outside (0, 1)")));
    }
    Ok(1.0 / (1.0 + s_elec * (p / p0 - 1.0)))
}

fn ratio_modifier(name: &str, v: f64, v0: f64) -> Result<f64> {
    for (label, x) in [(name, v), ("baseline", v0)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("{label} value {x} outside [0, 1]")));
        }
    }
    Ok((1.0 + v) / (1.0 + v0))
}

/// `(1 + u) / (1 + u0)`.
pub fn renewable_modifier(u: f64, u0: f64) -> Result<f64> {
    ratio_modifier("utilization", u, u0)
}

/// `(1 + d) / (1 + d0)`.
pub fn circulation_modifier(d: f64, d0: f64) -> Result<f64> {
    ratio_modifier("circulation", d, d0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_identity_and_limits() {
        assert_eq!(cost_modifier(4_157_930.0, 4_157_930.0, 0.037).unwrap(), 1.0);
        let zero = cost_modifier(0.0, 4_157_930.0, 0.037).unwrap();
        assert!((zero - 1.0 / 0.963).abs() < 1e-15);
        assert!((zero - 1.038422).abs() < 1e-6);
        assert!(cost_modifier(1.0, 0.0, 0.037).is_err());
    }

    #[test]
    fn cost_at_cheaper_policy() {
        // Direct arithmetic: 1 / (0.963 + 0.037 · 2,908,197 / 4,157,930).
        let direct = 1.0 / (0.963 + 0.037 * 2_908_197.0 / 4_157_930.0);
        let f = cost_modifier(2_908_197.0, 4_157_930.0, 0.037).unwrap();
        assert!((f - direct).abs() < 1e-15);
        assert!((f - 1.0112458).abs() < 1e-6);
    }

    #[test]
    fn cost_strictly_decreasing() {
        let mut last = f64::INFINITY;
        for i in 0..50 {
            let f = cost_modifier(i as f64 * 1e5, 4e6, 0.037).unwrap();
            assert!(f < last);
            last = f;
        }
    }

    #[test]
    fn ratio_modifiers() {
        assert_eq!(renewable_modifier(0.3, 0.3).unwrap(), 1.0);
        assert_eq!(renewable_modifier(1.0, 0.0).unwrap(), 2.0);
        assert_eq!(renewable_modifier(0.0, 1.0).unwrap(), 0.5);
        assert!((renewable_modifier(0.995, 0.0).unwrap() - 1.995).abs() < 1e-15);
        assert_eq!(circulation_modifier(0.589, 0.589).unwrap(), 1.0);
        assert!((circulation_modifier(0.589, 0.0).unwrap() - 1.589).abs() < 1e-15);
        assert!((circulation_modifier(0.648, 0.0).unwrap() - 1.648).abs() < 1e-15);
        assert!(renewable_modifier(1.2, 0.0).is_err());
        assert!(circulation_modifier(0.5, -0.1).is_err());
    }
}
