use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::SurveyMatrix;
use crate::stats::t_two_sided_p;
use crate::{Error, Result};

/// Diagonal entries of R below this fraction of the column norm mark the
/// column as linearly dependent on the ones before it.
const RANK_TOL: f64 = 1e-10;

pub const INTERCEPT_ID: &str = "(intercept)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRecord {
    pub id: String,
    pub beta: f64,
    #[serde(with = "nonfinite")]
    pub se: f64,
    #[serde(with = "nonfinite")]
    pub t: f64,
    #[serde(with = "nonfinite")]
    pub p: f64,
}

/// Multiple linear regression `y = β₀ + Σ βᵢ xᵢ + ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    pub response: String,
    pub n: usize,
    pub intercept: CoefficientRecord,
    pub coefficients: Vec<CoefficientRecord>,
    #[serde(with = "nonfinite")]
    pub r_squared: f64,
    /// Per-respondent residuals of the fit; not exported.
    #[serde(skip)]
    pub residuals: Vec<f64>,
}

/// JSON shape of an exported model (residuals omitted).
pub type ModelExport = RegressionModel;

impl RegressionModel {
    /// Builds a model from published coefficients without a residual vector.
    pub fn from_coefficients(response: &str, intercept: f64, coefficients: &[(&str, f64)]) -> Self {
        let rec = |id: &str, beta| CoefficientRecord {
            id: id.to_string(),
            beta,
            se: f64::NAN,
            t: f64::NAN,
            p: f64::NAN,
        };
        Self {
            response: response.to_string(),
            n: 0,
            intercept: rec(INTERCEPT_ID, intercept),
            coefficients: coefficients.iter().map(|&(id, b)| rec(id, b)).collect(),
            r_squared: f64::NAN,
            residuals: Vec::new(),
        }
    }

    pub fn ids(&self) -> Vec<String> {
        self.coefficients.iter().map(|c| c.id.clone()).collect()
    }

    pub fn betas(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.beta).collect()
    }

    pub fn beta_of(&self, id: &str) -> Option<f64> {
        self.coefficients.iter().find(|c| c.id == id).map(|c| c.beta)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("model.json", e.line(), e.to_string()))
    }
}

/// Point prediction `β₀ + Σ βᵢ xᵢ` (no error term).
pub fn predict(model: &RegressionModel, x: &[f64]) -> Result<f64> {
    if x.len() != model.coefficients.len() {
        return Err(Error::Domain(format!(
            "predict: model has {} coefficients, got {} values",
            model.coefficients.len(),
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("predict: non-finite input".into()));
    }
    Ok(model
        .coefficients
        .iter()
        .zip(x)
        .fold(model.intercept.beta, |acc, (c, v)| acc + c.beta * v))
}

/// Ordinary least squares with an intercept, solved through a Householder
/// QR factorization of the design matrix.
pub fn fit_ols(matrix: &SurveyMatrix, response: &str, explanatory: &[String]) -> Result<RegressionModel> {
    let y = matrix.column(response)?;
    let cols = explanatory
        .iter()
        .map(|id| matrix.column(id))
        .collect::<Result<Vec<_>>>()?;
    let mut names = vec![INTERCEPT_ID.to_string()];
    names.extend(explanatory.iter().cloned());
    fit_columns(response, &names, &cols, &y)
}

fn fit_columns(response: &str, names: &[String], cols: &[Vec<f64>], y: &[f64]) -> Result<RegressionModel> {
    let n = y.len();
    let p = cols.len() + 1;
    if n < p + 1 {
        return Err(Error::Domain(format!(
            "need at least {} rows for {} explanatory variables, got {n}",
            p + 1,
            p - 1
        )));
    }
    let x = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { cols[j - 1][i] });
    let col_norms: Vec<f64> = (0..p).map(|j| x.column(j).norm()).collect();
    let yv = DVector::from_column_slice(y);

    let qr = x.clone().qr();
    let r = qr.r();
    let dependent: Vec<String> = (0..p)
        .filter(|&j| col_norms[j] == 0.0 || r[(j, j)].abs() <= RANK_TOL * col_norms[j])
        .map(|j| names[j].clone())
        .collect();
    if !dependent.is_empty() {
        return Err(Error::Collinear(dependent));
    }

    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Collinear(names.to_vec()))?;
    let fitted = &x * &beta;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();

    let sse: f64 = residuals.iter().map(|e| e * e).sum();
    let ybar = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if sst == 0.0 {
        return Err(Error::Domain(format!("response '{response}' has zero variance")));
    }
    let r_squared = (1.0 - sse / sst).clamp(0.0, 1.0);

    // Var(β) = σ² (RᵀR)⁻¹ = σ² R⁻¹ R⁻ᵀ.
    let dof = (n - p) as f64;
    let sigma2 = sse / dof;
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or_else(|| Error::Collinear(names.to_vec()))?;
    let records: Vec<CoefficientRecord> = (0..p)
        .map(|j| {
            let var = sigma2 * r_inv.row(j).iter().map(|v| v * v).sum::<f64>();
            let se = var.sqrt();
            let b = beta[j];
            let t = if se > 0.0 {
                b / se
            } else if b == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(b)
            };
            let p_value = if t.is_infinite() { 0.0 } else { t_two_sided_p(t, dof)? };
            Ok(CoefficientRecord {
                id: names[j].clone(),
                beta: b,
                se,
                t,
                p: p_value,
            })
        })
        .collect::<Result<_>>()?;
    let mut records = records.into_iter();
    let intercept = records.next().expect("intercept present");
    Ok(RegressionModel {
        response: response.to_string(),
        n,
        intercept,
        coefficients: records.collect(),
        r_squared,
        residuals,
    })
}

/// Serializes non-finite floats as strings so exported JSON stays valid.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&v.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::{Classification, ItemDescriptor};

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> SurveyMatrix {
        let n = cols[0].1.len();
        SurveyMatrix {
            items: cols
                .iter()
                .map(|(id, _)| ItemDescriptor::new(id, Classification::Other, ""))
                .collect(),
            rows: (0..n).map(|i| cols.iter().map(|(_, c)| c[i]).collect()).collect(),
            raw_max: vec![1.0; cols.len()],
            dropped_rows: 0,
        }
    }

    fn ids(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn noiseless_plane_is_recovered() {
        let x1 = vec![0.1, 0.4, 0.2, 0.9, 0.7, 0.3, 0.5];
        let x2 = vec![0.6, 0.1, 0.8, 0.2, 0.5, 0.9, 0.4];
        let y: Vec<f64> = x1.iter().zip(&x2).map(|(a, b)| 0.5 + 2.0 * a - b).collect();
        let m = matrix(vec![("y", y), ("x1", x1), ("x2", x2)]);
        let model = fit_ols(&m, "y", &ids(&["x1", "x2"])).unwrap();
        assert!((model.intercept.beta - 0.5).abs() < 1e-9);
        assert!((model.coefficients[0].beta - 2.0).abs() < 1e-9);
        assert!((model.coefficients[1].beta + 1.0).abs() < 1e-9);
        assert!((model.r_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn duplicate_column_is_collinear() {
        let x1 = vec![0.1, 0.4, 0.2, 0.9, 0.7];
        let y = vec![0.3, 0.2, 0.5, 0.9, 0.1];
        let dup: Vec<f64> = x1.iter().map(|v| 2.0 * v).collect();
        let m = matrix(vec![("y", y), ("x1", x1), ("twice", dup)]);
        match fit_ols(&m, "y", &ids(&["x1", "twice"])).unwrap_err() {
            Error::Collinear(cols) => assert_eq!(cols, vec!["twice".to_string()]),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn constant_column_collides_with_intercept() {
        let m = matrix(vec![("y", vec![0.3, 0.2, 0.5, 0.9]), ("c", vec![0.7; 4])]);
        assert!(matches!(fit_ols(&m, "y", &ids(&["c"])), Err(Error::Collinear(c)) if c == ["c"]));
    }

    #[test]
    fn too_few_rows() {
        let m = matrix(vec![
            ("y", vec![0.3, 0.2, 0.5]),
            ("a", vec![0.1, 0.5, 0.2]),
            ("b", vec![0.9, 0.4, 0.4]),
        ]);
        assert!(matches!(fit_ols(&m, "y", &ids(&["a", "b"])), Err(Error::Domain(_))));
    }

    #[test]
    fn simple_regression_matches_closed_form() {
        // slope = Sxy/Sxx, se(slope) = sqrt(σ²/Sxx)
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![0.1, 0.25, 0.2, 0.5, 0.45];
        let n = 5.0;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let slope = sxy / sxx;
        let icpt = my - slope * mx;
        let sse: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        let se = (sse / (n - 2.0) / sxx).sqrt();

        let m = matrix(vec![("y", y), ("x", x)]);
        let model = fit_ols(&m, "y", &ids(&["x"])).unwrap();
        assert!((model.coefficients[0].beta - slope).abs() < 1e-12);
        assert!((model.intercept.beta - icpt).abs() < 1e-12);
        assert!((model.coefficients[0].se - se).abs() < 1e-12);
    }

    #[test]
    fn predict_checks_length() {
        let model = RegressionModel::from_coefficients("y", 1.0, &[("a", 2.0)]);
        assert_eq!(predict(&model, &[0.5]).unwrap(), 2.0);
        assert!(matches!(predict(&model, &[0.5, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn json_round_trip_keeps_nonfinite() {
        let model = RegressionModel::from_coefficients("y", 1.0, &[("a", 2.0)]);
        let back = RegressionModel::from_json(&model.to_json()).unwrap();
        assert_eq!(back.intercept.beta, 1.0);
        assert!(back.coefficients[0].se.is_nan());
    }
}
