use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{Classification, SurveyMatrix};
use crate::stats::{correlation_p_value, pearson_r};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScreeningThresholds {
    pub r_min: f64,
    pub p_max: f64,
}

impl Default for ScreeningThresholds {
    fn default() -> Self {
        Self {
            r_min: 0.1,
            p_max: 0.05,
        }
    }
}

impl ScreeningThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.r_min) {
            return Err(Error::Domain(format!("r_min {} outside [-1, 1]", self.r_min)));
        }
        if !(self.p_max > 0.0 && self.p_max <= 1.0) {
            return Err(Error::Domain(format!("p_max {} outside (0, 1]", self.p_max)));
        }
        Ok(())
    }

    pub fn accepts(&self, r: f64, p: f64) -> bool {
        r >= self.r_min && p <= self.p_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub id: String,
    pub classification: Classification,
    /// `None` when the item has zero variance.
    pub r: Option<f64>,
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub response: String,
    pub n: usize,
    pub thresholds: ScreeningThresholds,
    /// Scored items by descending r (ties by id), then unscorable items by id.
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationReport {
    pub fn selected_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().filter(|e| e.selected).map(|e| e.id.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,classification,r,t,p,selected\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                e.id,
                e.classification,
                crate::io::opt(e.r),
                crate::io::opt(e.t_stat),
                crate::io::opt(e.p_value),
                e.selected
            ));
        }
        out
    }
}

/// Scores every non-response item against `response` and flags the items
/// with `r >= r_min` and `p <= p_max`.
pub fn extract_explanatory(
    matrix: &SurveyMatrix,
    response: &str,
    thresholds: ScreeningThresholds,
) -> Result<CorrelationReport> {
    thresholds.validate()?;
    let y = matrix.column(response)?;
    let n = y.len();
    let mut entries = Vec::with_capacity(matrix.items.len());
    for item in matrix.items.iter().filter(|it| it.id != response) {
        let x = matrix.column(&item.id)?;
        let entry = match pearson_r(&x, &y) {
            Ok(r) => {
                let test = correlation_p_value(r, n)?;
                CorrelationEntry {
                    id: item.id.clone(),
                    classification: item.classification,
                    r: Some(r),
                    t_stat: Some(test.t_stat),
                    p_value: Some(test.p_value),
                    selected: thresholds.accepts(r, test.p_value),
                }
            }
            Err(Error::UndefinedCorrelation(_)) => CorrelationEntry {
                id: item.id.clone(),
                classification: item.classification,
                r: None,
                t_stat: None,
                p_value: None,
                selected: false,
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }
    entries.sort_by(|a, b| match (a.r, b.r) {
        (Some(ra), Some(rb)) => rb
            .partial_cmp(&ra)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.id.cmp(&b.id)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.id.cmp(&b.id),
    });
    Ok(CorrelationReport {
        response: response.to_string(),
        n,
        thresholds,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::survey::ItemDescriptor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

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

    #[test]
    fn identical_item_selected_with_unit_r() {
        let y = vec![0.1, 0.5, 0.3, 0.9, 0.7];
        let m = matrix(vec![("y", y.clone()), ("copy", y)]);
        let rep = extract_explanatory(&m, "y", Default::default()).unwrap();
        assert_eq!(rep.entries.len(), 1);
        assert!((rep.entries[0].r.unwrap() - 1.0).abs() < 1e-12);
        assert!(rep.entries[0].selected);
    }

    #[test]
    fn r_below_threshold_is_rejected_even_when_significant() {
        let t = ScreeningThresholds::default();
        assert!(!t.accepts(0.09, 0.01));
        assert!(t.accepts(0.1, 0.05));
        assert!(!t.accepts(0.3, 0.051));
    }

    #[test]
    fn zero_variance_item_is_unscorable() {
        let m = matrix(vec![
            ("y", vec![0.1, 0.5, 0.3, 0.9]),
            ("flat", vec![0.6; 4]),
            ("x", vec![0.2, 0.4, 0.4, 1.0]),
        ]);
        let rep = extract_explanatory(&m, "y", Default::default()).unwrap();
        assert_eq!(rep.entries.last().unwrap().id, "flat");
        assert!(rep.entries.last().unwrap().r.is_none());
        assert!(!rep.entries.last().unwrap().selected);
    }

    /// Items built as `rho·z + sqrt(1−rho²)·e` around a response `z` with
    /// exactly orthogonalized noise, so the sample correlation equals `rho`.
    fn planted(n: usize, rhos: &[f64], seed: u64) -> SurveyMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let center = |v: Vec<f64>| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.into_iter().map(|x| x - m).collect::<Vec<_>>()
        };
        let unit = |v: Vec<f64>| {
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| x / s).collect::<Vec<_>>()
        };
        let z = unit(center((0..n).map(|_| rng.random::<f64>()).collect()));
        let mut cols = vec![("y".to_string(), z.clone())];
        for (j, &rho) in rhos.iter().enumerate() {
            let e = center((0..n).map(|_| rng.random::<f64>()).collect());
            let dot: f64 = e.iter().zip(&z).map(|(a, b)| a * b).sum();
            let e = unit(e.iter().zip(&z).map(|(a, b)| a - dot * b).collect());
            let x = z
                .iter()
                .zip(&e)
                .map(|(a, b)| rho * a + (1.0 - rho * rho).sqrt() * b)
                .collect();
            cols.push((format!("q{j}"), x));
        }
        let cols: Vec<(&str, Vec<f64>)> = cols.iter().map(|(id, c)| (id.as_str(), c.clone())).collect();
        matrix(cols)
    }

    #[test]
    fn planted_correlations_select_only_the_first() {
        let m = planted(200, &[0.4, 0.05, -0.3], 7);
        let rep = extract_explanatory(&m, "y", Default::default()).unwrap();
        let r: Vec<f64> = rep.entries.iter().map(|e| e.r.unwrap()).collect();
        assert!((r[0] - 0.4).abs() < 1e-12 && (r[1] - 0.05).abs() < 1e-12 && (r[2] + 0.3).abs() < 1e-12);
        assert_eq!(rep.selected_ids().collect::<Vec<_>>(), vec!["q0"]);
    }

    #[test]
    fn ordering_does_not_depend_on_column_order() {
        let a = planted(100, &[0.4, 0.2, 0.2, -0.1], 3);
        let mut b = a.clone();
        b.items.reverse();
        for row in &mut b.rows {
            row.reverse();
        }
        let ra = extract_explanatory(&a, "y", Default::default()).unwrap();
        let rb = extract_explanatory(&b, "y", Default::default()).unwrap();
        assert_eq!(ra, rb);
    }
}
