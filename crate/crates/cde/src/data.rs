//! Labeled examples and their CSV form.
//!
//! Feature values are either a real number or unknown (`None`). In CSV an
//! unknown value is an empty field; the last column is always `label`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CdeError, Result};

/// A real-valued feature that may be unknown.
pub type Feature = Option<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub features: Vec<Feature>,
    pub label: f64,
}

impl LabeledExample {
    pub fn new(features: Vec<Feature>, label: f64) -> Self {
        Self { features, label }
    }
}

/// Checks that the dataset is nonempty and rectangular, returning the
/// shared feature count.
pub fn feature_count(data: &[LabeledExample]) -> Result<usize> {
    let first = data.first().ok_or(CdeError::EmptyDataset)?;
    let expected = first.features.len();
    for (index, ex) in data.iter().enumerate() {
        if ex.features.len() != expected {
            return Err(CdeError::FeatureLength {
                index,
                expected,
                found: ex.features.len(),
            });
        }
    }
    Ok(expected)
}

pub fn write_csv<W: Write>(out: W, names: &[String], data: &[LabeledExample]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = names.iter().map(String::as_str).collect();
    header.push("label");
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(names.len() + 1);
    for ex in data {
        row.clear();
        row.extend(
            ex.features
                .iter()
                .map(|f| f.map(|v| v.to_string()).unwrap_or_default()),
        );
        row.push(ex.label.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset written by [`write_csv`]; returns the feature names and rows.
pub fn read_csv<R: Read>(input: R) -> Result<(Vec<String>, Vec<LabeledExample>)> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.is_empty() || &headers[headers.len() - 1] != "label" {
        return Err(CdeError::InvalidParameter(
            "last csv column must be `label`".into(),
        ));
    }
    let names: Vec<String> = headers
        .iter()
        .take(headers.len() - 1)
        .map(str::to_owned)
        .collect();
    let mut data = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut features = Vec::with_capacity(names.len());
        for (i, field) in rec.iter().take(names.len()).enumerate() {
            if field.is_empty() {
                features.push(None);
            } else {
                features.push(Some(parse(&names[i], field)?));
            }
        }
        let label = parse("label", &rec[names.len()])?;
        data.push(LabeledExample { features, label });
    }
    Ok((names, data))
}

fn parse(column: &str, value: &str) -> Result<f64> {
    value.trim().parse().map_err(|_| CdeError::Parse {
        column: column.to_owned(),
        value: value.to_owned(),
    })
}
