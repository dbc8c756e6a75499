//! Survey ingest, normalization, correlation screening and the OLS
//! well-being model.

mod regression;
mod screening;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use crate::stats::{correlation_p_value, pearson_r, CorrelationTest};
pub use regression::{fit_ols, predict, CoefficientRecord, ModelExport, RegressionModel, INTERCEPT_ID};
pub use screening::{extract_explanatory, CorrelationEntry, CorrelationReport, ScreeningThresholds};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classification {
    Human,
    Society,
    Ecology,
    Economy,
    Response,
    Other,
}

impl FromStr for Classification {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // Accept numbered labels such as "Economy 2" or "Economy2".
        let word: String = s.trim().chars().take_while(|c| c.is_alphabetic()).collect();
        match word.to_ascii_lowercase().as_str() {
            "human" => Ok(Self::Human),
            "society" => Ok(Self::Society),
            "ecology" => Ok(Self::Ecology),
            "economy" => Ok(Self::Economy),
            "response" => Ok(Self::Response),
            "other" => Ok(Self::Other),
            _ => Err(Error::Config(format!("unknown item classification '{s}'"))),
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemDescriptor {
    pub id: String,
    pub question: String,
    pub classification: Classification,
    /// Theoretical maximum of the answer scale. When absent, the maximum
    /// over retained rows is used as the normalization divisor.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_max: Option<f64>,
}

impl ItemDescriptor {
    pub fn new(id: &str, classification: Classification, question: &str) -> Self {
        Self {
            id: id.to_string(),
            question: question.to_string(),
            classification,
            scale_max: None,
        }
    }

    pub fn with_scale_max(mut self, max: f64) -> Self {
        self.scale_max = Some(max);
        self
    }
}

/// Survey responses on their original scales, complete-case filtered.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSurvey {
    pub items: Vec<ItemDescriptor>,
    /// Respondent-major values, one entry per item in `items` order.
    pub rows: Vec<Vec<f64>>,
    /// Rows removed because a schema item was blank.
    pub dropped_rows: usize,
}

/// Survey responses divided by each item's maximum, so every value lies in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveyMatrix {
    pub items: Vec<ItemDescriptor>,
    pub rows: Vec<Vec<f64>>,
    /// Per-item divisor: the observed maximum over retained rows, or the
    /// schema's `scale_max` when one is given.
    pub raw_max: Vec<f64>,
    pub dropped_rows: usize,
}

impl SurveyMatrix {
    pub fn n_respondents(&self) -> usize {
        self.rows.len()
    }

    pub fn item_index(&self, id: &str) -> Option<usize> {
        self.items.iter().position(|it| it.id == id)
    }

    pub fn column(&self, id: &str) -> Result<Vec<f64>> {
        let j = self
            .item_index(id)
            .ok_or_else(|| Error::Domain(format!("unknown survey item '{id}'")))?;
        Ok(self.rows.iter().map(|r| r[j]).collect())
    }

    /// Column means, in the order of `ids`.
    pub fn means(&self, ids: &[String]) -> Result<Vec<f64>> {
        ids.iter()
            .map(|id| {
                let col = self.column(id)?;
                Ok(col.iter().sum::<f64>() / col.len() as f64)
            })
            .collect()
    }
}

/// Reads an item schema CSV with columns `id,classification,question` and an
/// optional fourth `scale_max` column.
pub fn load_schema(path: &Path) -> Result<Vec<ItemDescriptor>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut items = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() < 2 {
            return Err(Error::parse(
                path.display(),
                line,
                "expected id,classification[,question]",
            ));
        }
        let classification = rec[1]
            .parse()
            .map_err(|e: Error| Error::parse(path.display(), line, e.to_string()))?;
        let scale_max = match rec.get(3).filter(|c| !c.is_empty()) {
            Some(c) => Some(
                c.parse::<f64>()
                    .map_err(|_| Error::parse(path.display(), line, format!("scale_max '{c}' is not a number")))?,
            ),
            None => None,
        };
        items.push(ItemDescriptor {
            id: rec[0].to_string(),
            classification,
            question: rec.get(2).unwrap_or("").to_string(),
            scale_max,
        });
    }
    if items.is_empty() {
        return Err(Error::parse(path.display(), 1, "schema lists no items"));
    }
    Ok(items)
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::parse(path.display(), line, format!("{other:?}")),
    }
}

/// Reads the survey CSV, keeping the columns listed in `schema` and dropping
/// every respondent with a blank cell among them.
pub fn load_survey(path: &Path, schema: &[ItemDescriptor]) -> Result<RawSurvey> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut cols = Vec::with_capacity(schema.len());
    for item in schema {
        let j = header
            .iter()
            .position(|h| h == item.id)
            .ok_or_else(|| Error::parse(path.display(), 1, format!("header lacks schema item '{}'", item.id)))?;
        cols.push(j);
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let mut row = Vec::with_capacity(cols.len());
        let mut complete = true;
        for (&j, item) in cols.iter().zip(schema) {
            let cell = &rec[j];
            if cell.is_empty() {
                complete = false;
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    path.display(),
                    line,
                    format!("item '{}': '{cell}' is not a number", item.id),
                )
            })?;
            if !v.is_finite() {
                return Err(Error::parse(
                    path.display(),
                    line,
                    format!("item '{}': non-finite value", item.id),
                ));
            }
            row.push(v);
        }
        if complete {
            rows.push(row);
        } else {
            dropped += 1;
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyData { dropped });
    }
    Ok(RawSurvey {
        items: schema.to_vec(),
        rows,
        dropped_rows: dropped,
    })
}

/// Divides each item by its maximum over the retained rows (or by its
/// declared `scale_max`).
pub fn normalize_items(raw: RawSurvey) -> Result<SurveyMatrix> {
    let k = raw.items.len();
    let mut raw_max = vec![f64::NEG_INFINITY; k];
    for row in &raw.rows {
        for (j, &v) in row.iter().enumerate() {
            if v < 0.0 {
                return Err(Error::DegenerateItem(
                    raw.items[j].id.clone(),
                    format!("negative value {v} cannot be max-normalized"),
                ));
            }
            raw_max[j] = raw_max[j].max(v);
        }
    }
    for (item, m) in raw.items.iter().zip(raw_max.iter_mut()) {
        if !(*m > 0.0) {
            return Err(Error::DegenerateItem(item.id.clone(), "maximum is not positive".into()));
        }
        if let Some(scale) = item.scale_max {
            if !(scale >= *m) {
                return Err(Error::DegenerateItem(
                    item.id.clone(),
                    format!("observed maximum {m} exceeds scale_max {scale}"),
                ));
            }
            *m = scale;
        }
    }
    let rows = raw
        .rows
        .into_iter()
        .map(|row| row.iter().zip(&raw_max).map(|(v, m)| v / m).collect())
        .collect();
    Ok(SurveyMatrix {
        items: raw.items,
        rows,
        raw_max,
        dropped_rows: raw.dropped_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn schema3() -> Vec<ItemDescriptor> {
        vec![
            ItemDescriptor::new("y", Classification::Response, "well-being"),
            ItemDescriptor::new("x1", Classification::Human, "health"),
            ItemDescriptor::new("x3", Classification::Society, "trust"),
        ]
    }

    fn write_tmp(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    #[test]
    fn complete_file_drops_nothing() {
        let f = write_tmp("y,x1,x3\n1,2,3\n4,5,6\n");
        let s = load_survey(f.path(), &schema3()).unwrap();
        assert_eq!(s.dropped_rows, 0);
        assert_eq!(s.rows.len(), 2);
        assert_eq!(s.rows[1], vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn incomplete_rows_are_dropped() {
        let f = write_tmp("y,x1,x3,extra\n1,2,3,\n4,,6,1\n,5,6,1\n7,8,9,1\n");
        let s = load_survey(f.path(), &schema3()).unwrap();
        assert_eq!(s.dropped_rows, 2);
        assert_eq!(s.rows, vec![vec![1.0, 2.0, 3.0], vec![7.0, 8.0, 9.0]]);
    }

    #[test]
    fn every_row_missing_an_item_is_empty_data() {
        let f = write_tmp("y,x1,x3\n1,2,\n4,5,\n");
        let err = load_survey(f.path(), &schema3()).unwrap_err();
        assert!(matches!(err, Error::EmptyData { dropped: 2 }));
    }

    #[test]
    fn malformed_cell_reports_line() {
        let f = write_tmp("y,x1,x3\n1,2,3\n4,abc,6\n");
        match load_survey(f.path(), &schema3()).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("x1"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn ragged_row_is_parse_error() {
        let f = write_tmp("y,x1,x3\n1,2,3\n4,5\n");
        assert!(matches!(load_survey(f.path(), &schema3()), Err(Error::Parse { .. })));
    }

    #[test]
    fn missing_header_column() {
        let f = write_tmp("y,x1\n1,2\n");
        assert!(matches!(
            load_survey(f.path(), &schema3()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    fn raw(cols: &[&[f64]]) -> RawSurvey {
        let items = (0..cols.len())
            .map(|j| ItemDescriptor::new(&format!("q{j}"), Classification::Other, ""))
            .collect();
        let n = cols[0].len();
        RawSurvey {
            items,
            rows: (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect(),
            dropped_rows: 0,
        }
    }

    #[test]
    fn normalization_divides_by_max() {
        let m = normalize_items(raw(&[&[1.0, 3.0, 5.0], &[0.2, 1.0, 0.5], &[4.0, 4.0, 4.0]])).unwrap();
        let c0 = m.column("q0").unwrap();
        assert!((c0[0] - 0.2).abs() < 1e-15 && (c0[1] - 0.6).abs() < 1e-15 && c0[2] == 1.0);
        assert_eq!(m.column("q1").unwrap(), vec![0.2, 1.0, 0.5]);
        assert_eq!(m.column("q2").unwrap(), vec![1.0, 1.0, 1.0]);
        assert_eq!(m.raw_max, vec![5.0, 1.0, 4.0]);
    }

    #[test]
    fn constant_item_on_declared_scale() {
        let mut r = raw(&[&[4.0, 4.0, 4.0]]);
        r.items[0] = r.items[0].clone().with_scale_max(5.0);
        let m = normalize_items(r).unwrap();
        assert_eq!(m.column("q0").unwrap(), vec![0.8, 0.8, 0.8]);
        assert_eq!(m.raw_max, vec![5.0]);
    }

    #[test]
    fn value_above_declared_scale() {
        let mut r = raw(&[&[4.0, 6.0]]);
        r.items[0].scale_max = Some(5.0);
        assert!(matches!(normalize_items(r), Err(Error::DegenerateItem(..))));
    }

    #[test]
    fn zero_item_is_degenerate() {
        let err = normalize_items(raw(&[&[1.0, 2.0], &[0.0, 0.0]])).unwrap_err();
        assert!(matches!(err, Error::DegenerateItem(id, _) if id == "q1"));
    }

    #[test]
    fn classification_labels() {
        assert_eq!("Economy2".parse::<Classification>().unwrap(), Classification::Economy);
        assert_eq!("human 1".parse::<Classification>().unwrap(), Classification::Human);
        assert!("weather".parse::<Classification>().is_err());
    }
}
