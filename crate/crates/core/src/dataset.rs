//! Weighted discrete datasets and their line-delimited JSON file format.
//!
//! A dataset file is UTF-8, one JSON object per line. The optional first
//! line is a header carrying the point kind and provenance:
//!
//! ```text
//! {"format":"equicalib-dataset","kind":{"type":"vector","dim":2},"spec":"circle20","seed":0}
//! {"point":[0.98,0.15],"label":0,"weight":0.05}
//! ```
//!
//! Vector points are flat arrays; matrix and point-set inputs are arrays of rows.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights must sum to one within this tolerance.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Shape of the input points of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PointKind {
    Vector { dim: usize },
    /// Ordered rows; row order is part of the point's identity.
    Matrix { rows: usize, cols: usize },
    /// Unordered rows, compared as sets.
    Set { rows: usize, cols: usize },
}

impl PointKind {
    pub fn len(&self) -> usize {
        match *self {
            PointKind::Vector { dim } => dim,
            PointKind::Matrix { rows, cols } | PointKind::Set { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDataset {
    pub kind: PointKind,
    /// Flattened row-major points.
    pub points: Vec<Vec<f64>>,
    pub labels: Option<Vec<usize>>,
    pub targets: Option<Vec<Vec<f64>>>,
    pub weights: Vec<f64>,
}

pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

impl WeightedDataset {
    pub fn new(
        kind: PointKind,
        points: Vec<Vec<f64>>,
        labels: Option<Vec<usize>>,
        targets: Option<Vec<Vec<f64>>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let ds = WeightedDataset { kind, points, labels, targets, weights };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if self.weights.len() != n {
            return Err(Error::ShapeMismatch { expected: n, actual: self.weights.len() });
        }
        for p in &self.points {
            if p.len() != self.kind.len() {
                return Err(Error::ShapeMismatch { expected: self.kind.len(), actual: p.len() });
            }
        }
        if self.labels.is_some() && self.targets.is_some() {
            return Err(Error::invalid("a dataset carries labels or targets, not both"));
        }
        if let Some(l) = &self.labels {
            if l.len() != n {
                return Err(Error::ShapeMismatch { expected: n, actual: l.len() });
            }
        }
        if let Some(t) = &self.targets {
            if t.len() != n {
                return Err(Error::ShapeMismatch { expected: n, actual: t.len() });
            }
            if let Some(first) = t.first() {
                if let Some(bad) = t.iter().find(|v| v.len() != first.len()) {
                    return Err(Error::ShapeMismatch { expected: first.len(), actual: bad.len() });
                }
            }
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid(format!("weight {w} is negative or not finite")));
        }
        let total = crate::numeric::pairwise_sum(&self.weights);
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::WeightsNotNormalized(total));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Result<&[usize]> {
        self.labels.as_deref().ok_or_else(|| Error::invalid("dataset has no labels"))
    }

    pub fn targets(&self) -> Result<&[Vec<f64>]> {
        self.targets.as_deref().ok_or_else(|| Error::invalid("dataset has no targets"))
    }

    /// Number of classes: one more than the largest label.
    pub fn num_classes(&self) -> usize {
        self.labels
            .as_ref()
            .and_then(|l| l.iter().max())
            .map_or(0, |m| m + 1)
    }

    /// The samples at `indices`, with weights renormalized to sum to one.
    pub fn subset(&self, indices: &[usize]) -> Result<WeightedDataset> {
        let mass: f64 = indices.iter().map(|&i| self.weights[i]).sum();
        if indices.is_empty() || mass <= 0.0 {
            return Err(Error::Empty("subset has no mass".into()));
        }
        let mut weights: Vec<f64> = indices.iter().map(|&i| self.weights[i] / mass).collect();
        // absorb rounding so the subset passes validation
        let drift: f64 = 1.0 - weights.iter().sum::<f64>();
        weights[0] += drift;
        WeightedDataset::new(
            self.kind,
            indices.iter().map(|&i| self.points[i].clone()).collect(),
            self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
            self.targets.as_ref().map(|t| indices.iter().map(|&i| t[i].clone()).collect()),
            weights,
        )
    }
}

/// Provenance line written at the top of every dataset file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub kind: PointKind,
    #[serde(default)]
    pub spec: String,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl DatasetHeader {
    pub const FORMAT: &'static str = "equicalib-dataset";

    pub fn new(kind: PointKind, spec: impl Into<String>, seed: Option<u64>) -> Self {
        DatasetHeader { format: Self::FORMAT.to_string(), kind, spec: spec.into(), seed }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Flat(Vec<f64>),
    Rows(Vec<Vec<f64>>),
}

#[derive(Serialize, Deserialize)]
struct Record {
    point: PointRepr,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    label: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    target: Option<Vec<f64>>,
    #[serde(default)]
    weight: Option<f64>,
}

pub fn write_dataset<W: Write>(ds: &WeightedDataset, header: &DatasetHeader, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    serde_json::to_writer(&mut out, header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for i in 0..ds.len() {
        let point = match ds.kind {
            PointKind::Vector { .. } => PointRepr::Flat(ds.points[i].clone()),
            PointKind::Matrix { cols, .. } | PointKind::Set { cols, .. } => {
                PointRepr::Rows(ds.points[i].chunks(cols).map(<[f64]>::to_vec).collect())
            }
        };
        let rec = Record {
            point,
            label: ds.labels.as_ref().map(|l| l[i]),
            target: ds.targets.as_ref().map(|t| t[i].clone()),
            weight: Some(ds.weights[i]),
        };
        serde_json::to_writer(&mut out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_dataset(ds: &WeightedDataset, header: &DatasetHeader, path: impl AsRef<Path>) -> Result<()> {
    write_dataset(ds, header, File::create(path)?)
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<(Option<DatasetHeader>, WeightedDataset)> {
    let mut header: Option<DatasetHeader> = None;
    let mut kind: Option<PointKind> = None;
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if value.get("format").is_some() {
            if header.is_some() || !points.is_empty() {
                return Err(parse_err("header must be the first line".into()));
            }
            let h: DatasetHeader =
                serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
            if h.format != DatasetHeader::FORMAT {
                return Err(parse_err(format!("unknown format `{}`", h.format)));
            }
            kind = Some(h.kind);
            header = Some(h);
            continue;
        }
        let rec: Record = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        let (flat, inferred) = match rec.point {
            PointRepr::Flat(v) => {
                let k = PointKind::Vector { dim: v.len() };
                (v, k)
            }
            PointRepr::Rows(rows) => {
                let cols = rows.first().map_or(0, Vec::len);
                if rows.iter().any(|r| r.len() != cols) {
                    return Err(parse_err("ragged point rows".into()));
                }
                let k = PointKind::Matrix { rows: rows.len(), cols };
                (rows.concat(), k)
            }
        };
        let k = *kind.get_or_insert(inferred);
        if flat.len() != k.len() {
            return Err(parse_err(format!("point has {} values, expected {}", flat.len(), k.len())));
        }
        points.push(flat);
        labels.push(rec.label);
        targets.push(rec.target);
        weights.push(rec.weight.ok_or_else(|| parse_err("weights absent".into()))?);
    }
    let kind = kind.ok_or_else(|| Error::Empty("dataset file has no records".into()))?;
    let collect_opt = |what: &str, present: usize, n: usize| -> Result<bool> {
        if present != 0 && present != n {
            return Err(Error::invalid(format!("{what} present on only {present} of {n} records")));
        }
        Ok(present == n && n > 0)
    };
    let n = points.len();
    let has_labels = collect_opt("labels", labels.iter().flatten().count(), n)?;
    let has_targets = collect_opt("targets", targets.iter().flatten().count(), n)?;
    let ds = WeightedDataset::new(
        kind,
        points,
        has_labels.then(|| labels.into_iter().flatten().collect()),
        has_targets.then(|| targets.into_iter().flatten().collect()),
        weights,
    )?;
    Ok((header, ds))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<WeightedDataset> {
    Ok(read_dataset(BufReader::new(File::open(path)?))?.1)
}

pub fn load_dataset_with_header(path: impl AsRef<Path>) -> Result<(Option<DatasetHeader>, WeightedDataset)> {
    read_dataset(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn roundtrip(ds: &WeightedDataset) -> WeightedDataset {
        let mut buf = Vec::new();
        write_dataset(ds, &DatasetHeader::new(ds.kind, "test", Some(3)), &mut buf).unwrap();
        read_dataset(&buf[..]).unwrap().1
    }

    #[test]
    fn circle20_round_trips() {
        let ds = generators::circle20();
        assert_eq!(roundtrip(&ds), ds);
    }

    #[test]
    fn point_sets_keep_their_kind() {
        let ds = generators::pointcloud_gence().dataset;
        assert_eq!(roundtrip(&ds), ds);
    }

    #[test]
    fn missing_weight_is_reported_with_line() {
        let text = "{\"point\":[1.0,2.0],\"label\":0,\"weight\":0.5}\n{\"point\":[1.0,2.0],\"label\":1}\n";
        let err = read_dataset(text.as_bytes()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("weights absent") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn unnormalized_weights_rejected() {
        let text = "{\"point\":[1.0],\"weight\":0.45}\n{\"point\":[2.0],\"weight\":0.45}\n";
        let err = read_dataset(text.as_bytes()).unwrap_err();
        assert!(err.to_string().contains("weights not normalized"), "{err}");
    }

    #[test]
    fn malformed_json_has_line_number() {
        let text = "{\"point\":[1.0],\"weight\":1.0}\n{oops\n";
        match read_dataset(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn labels_and_targets_are_exclusive() {
        let r = WeightedDataset::new(
            PointKind::Vector { dim: 1 },
            vec![vec![0.0]],
            Some(vec![0]),
            Some(vec![vec![1.0]]),
            vec![1.0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn subset_renormalizes() {
        let ds = generators::circle20();
        let sub = ds.subset(&[0, 1, 2, 3]).unwrap();
        assert!((sub.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(sub.len(), 4);
    }
}
