//! Sampled-data ingestion: CSV and JSON sample files, and detection of the
//! uniform grid structure that lets sampled oracles answer the shifted
//! queries the test pipelines make without interpolation.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};

/// A set of (point, value) samples in `dim` variables.
#[derive(Debug, Clone)]
pub struct SampleSet {
    pub dim: usize,
    pub rows: Vec<(Vec<f64>, Complex64)>,
}

impl SampleSet {
    pub fn new(dim: usize, rows: Vec<(Vec<f64>, Complex64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if rows.is_empty() {
            return Err(Error::MalformedInput { line: None, message: "no samples".into() });
        }
        for (i, (p, v)) in rows.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::MalformedInput {
                    line: Some(i + 1),
                    message: format!("point has {} coordinates, expected {dim}", p.len()),
                });
            }
            if p.iter().any(|c| !c.is_finite()) || !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::MalformedInput {
                    line: Some(i + 1),
                    message: "non-finite sample".into(),
                });
            }
        }
        for i in 0..rows.len() {
            for j in (i + 1)..rows.len() {
                if rows[i].0 == rows[j].0 {
                    return Err(Error::MalformedInput {
                        line: Some(j + 1),
                        message: format!("duplicate point {:?}", rows[i].0),
                    });
                }
            }
        }
        Ok(Self { dim, rows })
    }
}

#[derive(Deserialize)]
struct SamplesJson {
    dim: usize,
    points: Vec<Vec<f64>>,
    values_re: Vec<f64>,
    values_im: Vec<f64>,
}

/// Load `{"dim": d, "points": [...], "values_re": [...], "values_im": [...]}`.
pub fn load_samples_json(text: &str) -> Result<SampleSet> {
    let parsed: SamplesJson = serde_json::from_str(text).map_err(|e| Error::MalformedInput {
        line: Some(e.line()),
        message: e.to_string(),
    })?;
    if parsed.points.len() != parsed.values_re.len()
        || parsed.points.len() != parsed.values_im.len()
    {
        return Err(Error::MalformedInput {
            line: None,
            message: format!(
                "points ({}), values_re ({}) and values_im ({}) must have equal lengths",
                parsed.points.len(),
                parsed.values_re.len(),
                parsed.values_im.len()
            ),
        });
    }
    let rows = parsed
        .points
        .into_iter()
        .zip(parsed.values_re.into_iter().zip(parsed.values_im))
        .map(|(p, (re, im))| (p, Complex64::new(re, im)))
        .collect();
    SampleSet::new(parsed.dim, rows)
}

/// Load CSV with header `x1,…,xd,re,im`.
pub fn load_samples_csv(text: &str) -> Result<SampleSet> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(Error::MalformedInput { line: None, message: "no samples".into() });
    };
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 3 || cols[cols.len() - 2] != "re" || cols[cols.len() - 1] != "im" {
        return Err(Error::MalformedInput {
            line: Some(1),
            message: "header must be x1,…,xd,re,im".into(),
        });
    }
    let dim = cols.len() - 2;
    for (i, c) in cols[..dim].iter().enumerate() {
        let expected = format!("x{}", i + 1);
        if *c != expected {
            return Err(Error::MalformedInput {
                line: Some(1),
                message: format!("column {} should be {expected}, found {c:?}", i + 1),
            });
        }
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != dim + 2 {
            return Err(Error::MalformedInput {
                line: Some(lineno + 1),
                message: format!("expected {} fields, found {}", dim + 2, fields.len()),
            });
        }
        let mut nums = Vec::with_capacity(dim + 2);
        for (fi, f) in fields.iter().enumerate() {
            let v: f64 = f.parse().map_err(|_| Error::MalformedInput {
                line: Some(lineno + 1),
                message: format!("field {} is not a number: {f:?}", fi + 1),
            })?;
            nums.push(v);
        }
        let value = Complex64::new(nums[dim], nums[dim + 1]);
        nums.truncate(dim);
        rows.push((nums, value));
    }
    SampleSet::new(dim, rows)
}

/// Load samples from a path, dispatching on the `format`.
pub fn load_samples(path: &Path, format: SampleFormat) -> Result<SampleSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    match format {
        SampleFormat::Json => load_samples_json(&text),
        SampleFormat::Csv => load_samples_csv(&text),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Json,
    Csv,
}

/// Guess the format from the file extension, defaulting to JSON.
pub fn format_from_path(path: &Path) -> SampleFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => SampleFormat::Csv,
        _ => SampleFormat::Json,
    }
}

/// Relative tolerance for deciding that sample coordinates sit on a uniform
/// grid, in units of the grid spacing.
const LATTICE_SNAP_TOL: f64 = 1e-6;

/// A complete uniform tensor grid of samples. Oracles backed by one answer
/// exactly at lattice points and report a domain error elsewhere, so test
/// grids must be built from lattice-aligned base points and steps.
#[derive(Debug, Clone)]
pub struct SampleLattice {
    dim: usize,
    origin: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    values: HashMap<Vec<i64>, Complex64>,
}

impl SampleLattice {
    /// Detect the grid structure of a sample set, or explain why there is
    /// none.
    pub fn detect(samples: &SampleSet) -> Result<Self> {
        let dim = samples.dim;
        let mut origin = Vec::with_capacity(dim);
        let mut spacing = Vec::with_capacity(dim);
        let mut counts = Vec::with_capacity(dim);
        for axis in 0..dim {
            let mut coords: Vec<f64> = samples.rows.iter().map(|(p, _)| p[axis]).collect();
            coords.sort_by(f64::total_cmp);
            coords.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * (1.0 + a.abs().max(b.abs())));
            if coords.len() < 2 {
                return Err(Error::MalformedInput {
                    line: None,
                    message: format!(
                        "axis {} has a single coordinate value; need a grid of at least 2",
                        axis + 1
                    ),
                });
            }
            let lo = coords[0];
            let hi = coords[coords.len() - 1];
            let n = coords.len();
            let delta = (hi - lo) / (n - 1) as f64;
            if delta <= 0.0 {
                return Err(Error::MalformedInput {
                    line: None,
                    message: format!("axis {} has zero spread", axis + 1),
                });
            }
            for (i, &c) in coords.iter().enumerate() {
                let expected = lo + i as f64 * delta;
                if (c - expected).abs() > LATTICE_SNAP_TOL * delta {
                    return Err(Error::MalformedInput {
                        line: None,
                        message: format!(
                            "axis {} is not uniformly spaced near coordinate {c}",
                            axis + 1
                        ),
                    });
                }
            }
            origin.push(lo);
            spacing.push(delta);
            counts.push(n);
        }
        let expected_total: usize = counts.iter().product();
        if samples.rows.len() != expected_total {
            return Err(Error::MalformedInput {
                line: None,
                message: format!(
                    "samples do not fill the grid: {} rows for a {:?} lattice",
                    samples.rows.len(),
                    counts
                ),
            });
        }
        let mut values = HashMap::with_capacity(samples.rows.len());
        for (p, v) in &samples.rows {
            let mut idx = Vec::with_capacity(dim);
            for axis in 0..dim {
                let t = (p[axis] - origin[axis]) / spacing[axis];
                let i = t.round();
                if (t - i).abs() > LATTICE_SNAP_TOL {
                    return Err(Error::MalformedInput {
                        line: None,
                        message: format!("point {p:?} is off the detected lattice"),
                    });
                }
                idx.push(i as i64);
            }
            values.insert(idx, *v);
        }
        if values.len() != expected_total {
            return Err(Error::MalformedInput {
                line: None,
                message: "samples do not cover every lattice cell".into(),
            });
        }
        Ok(Self { dim, origin, spacing, counts, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// The real point at integer lattice index.
    pub fn point(&self, idx: &[i64]) -> Vec<f64> {
        idx.iter()
            .enumerate()
            .map(|(axis, &i)| self.origin[axis] + i as f64 * self.spacing[axis])
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        let mut idx = Vec::with_capacity(self.dim);
        for axis in 0..self.dim {
            let t = (x[axis] - self.origin[axis]) / self.spacing[axis];
            let i = t.round();
            if (t - i).abs() > LATTICE_SNAP_TOL {
                return Err(Error::OracleDomain {
                    point: x.to_vec(),
                    reason: "point is off the sample lattice".into(),
                });
            }
            if i < 0.0 || i as usize >= self.counts[axis] {
                return Err(Error::OracleDomain {
                    point: x.to_vec(),
                    reason: "point is outside the sampled range".into(),
                });
            }
            idx.push(i as i64);
        }
        Ok(*self.values.get(&idx).expect("complete lattice"))
    }
}
