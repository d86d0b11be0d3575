//! Observed input/output data for a group of DMUs.
//!
//! CSV layout: header `id,x:<name>[unit],...,y:<name>[unit],...`, one row per DMU.
//! The JSON mirror is `{input_names, output_names, dmus: [{id, inputs, outputs}]}`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VgaError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DmuRecord {
    pub id: String,
    pub inputs: Vec<f64>,
    pub outputs: Vec<f64>,
}

/// Label of an input or output index, e.g. `Hrs` or `M3`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexName {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

impl IndexName {
    pub fn new(name: impl Into<String>, unit: Option<&str>) -> Self {
        Self {
            name: name.into(),
            unit: unit.map(str::to_string),
        }
    }

    fn parse(label: &str) -> Self {
        let label = label.trim();
        match (label.find('['), label.ends_with(']')) {
            (Some(open), true) => Self::new(label[..open].trim(), Some(&label[open + 1..label.len() - 1])),
            _ => Self::new(label, None),
        }
    }
}

impl fmt::Display for IndexName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.unit {
            Some(unit) => write!(f, "{}[{}]", self.name, unit),
            None => f.write_str(&self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub input_names: Vec<IndexName>,
    pub output_names: Vec<IndexName>,
    pub dmus: Vec<DmuRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    SizeRule { n: usize, m: usize, s: usize },
    DuplicateId(String),
    NegativeValue { id: String, index: String },
    NonFiniteValue { id: String, index: String },
    LengthMismatch { id: String },
    ZeroIndexColumn(String),
    EmptyId,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SizeRule { n, m, s } => {
                write!(f, "n must exceed m+s (n={n}, m={m}, s={s})")
            }
            Violation::DuplicateId(id) => write!(f, "duplicate id `{id}`"),
            Violation::NegativeValue { id, index } => write!(f, "negative value for {index} of `{id}`"),
            Violation::NonFiniteValue { id, index } => write!(f, "non-finite value for {index} of `{id}`"),
            Violation::LengthMismatch { id } => write!(f, "wrong number of values for `{id}`"),
            Violation::ZeroIndexColumn(index) => write!(f, "zero index column {index}"),
            Violation::EmptyId => f.write_str("empty DMU id"),
        }
    }
}

impl Dataset {
    /// Builds a dataset and checks every invariant.
    pub fn new(input_names: Vec<IndexName>, output_names: Vec<IndexName>, dmus: Vec<DmuRecord>) -> Result<Self> {
        let d = Self {
            input_names,
            output_names,
            dmus,
        };
        let violations = validate(&d);
        if violations.is_empty() {
            Ok(d)
        } else {
            Err(VgaError::Validation(violations))
        }
    }

    pub fn n(&self) -> usize {
        self.dmus.len()
    }

    pub fn m(&self) -> usize {
        self.input_names.len()
    }

    pub fn s(&self) -> usize {
        self.output_names.len()
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.dmus
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| VgaError::UnknownDmu(id.to_string()))
    }

    pub fn dmu(&self, id: &str) -> Result<&DmuRecord> {
        Ok(&self.dmus[self.index_of(id)?])
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.dmus.iter().map(|d| d.id.as_str())
    }

    pub fn input(&self, i: usize, j: usize) -> f64 {
        self.dmus[j].inputs[i]
    }

    pub fn output(&self, r: usize, j: usize) -> f64 {
        self.dmus[j].outputs[r]
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_error)?.clone();
        let mut cols = headers.iter();
        match cols.next() {
            Some(h) if h.eq_ignore_ascii_case("id") => {}
            _ => {
                return Err(VgaError::Parse {
                    line: 1,
                    message: "first column must be `id`".into(),
                })
            }
        }
        let mut input_names = Vec::new();
        let mut output_names = Vec::new();
        for h in cols {
            if let Some(rest) = h.strip_prefix("x:") {
                if !output_names.is_empty() {
                    return Err(VgaError::Parse {
                        line: 1,
                        message: format!("input column `{h}` after output columns"),
                    });
                }
                input_names.push(IndexName::parse(rest));
            } else if let Some(rest) = h.strip_prefix("y:") {
                output_names.push(IndexName::parse(rest));
            } else {
                return Err(VgaError::Parse {
                    line: 1,
                    message: format!("column `{h}` must start with `x:` or `y:`"),
                });
            }
        }
        let m = input_names.len();
        let mut dmus = Vec::new();
        for (k, record) in rdr.records().enumerate() {
            let line = k + 2;
            let record = record.map_err(csv_error)?;
            if record.len() != headers.len() {
                return Err(VgaError::Parse {
                    line,
                    message: format!("expected {} fields, found {}", headers.len(), record.len()),
                });
            }
            let values = record
                .iter()
                .skip(1)
                .map(|field| {
                    field.parse::<f64>().map_err(|_| VgaError::Parse {
                        line,
                        message: format!("`{field}` is not a number"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            dmus.push(DmuRecord {
                id: record[0].to_string(),
                inputs: values[..m].to_vec(),
                outputs: values[m..].to_vec(),
            });
        }
        Self::new(input_names, output_names, dmus)
    }

    pub fn to_csv_writer<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let header: Vec<String> = std::iter::once("id".to_string())
            .chain(self.input_names.iter().map(|n| format!("x:{n}")))
            .chain(self.output_names.iter().map(|n| format!("y:{n}")))
            .collect();
        wtr.write_record(&header).map_err(csv_error)?;
        for d in &self.dmus {
            let row: Vec<String> = std::iter::once(d.id.clone())
                .chain(d.inputs.iter().chain(&d.outputs).map(|v| v.to_string()))
                .collect();
            wtr.write_record(&row).map_err(csv_error)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let d: Dataset = serde_json::from_str(s)?;
        Self::new(d.input_names, d.output_names, d.dmus)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parses either format: JSON when the text starts with `{`, CSV otherwise.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            Self::from_json_str(text)
        } else {
            Self::from_csv_reader(text.as_bytes())
        }
    }

    /// A copy without the listed DMUs. Remaining DMUs keep their relative order.
    pub fn exclude(&self, ids: &BTreeSet<String>) -> Result<Self> {
        exclude_dmus(self, ids)
    }
}

pub(crate) fn csv_error(e: csv::Error) -> VgaError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    VgaError::Parse {
        line,
        message: e.to_string(),
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    Dataset::from_csv_reader(file)
}

pub fn write_csv(d: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    d.to_csv_writer(file)
}

/// Loads a dataset, choosing the format from the extension (`.json` or CSV otherwise).
pub fn load_path(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        Dataset::from_json_str(&text)
    } else {
        Dataset::from_csv_reader(text.as_bytes())
    }
}

/// Every invariant violation of `d`; empty when the dataset is valid.
pub fn validate(d: &Dataset) -> Vec<Violation> {
    let (m, s, n) = (d.m(), d.s(), d.n());
    let mut out = Vec::new();
    if n <= m + s {
        out.push(Violation::SizeRule { n, m, s });
    }
    let mut seen = HashSet::new();
    for dmu in &d.dmus {
        if dmu.id.trim().is_empty() {
            out.push(Violation::EmptyId);
        }
        if !seen.insert(dmu.id.as_str()) {
            out.push(Violation::DuplicateId(dmu.id.clone()));
        }
        if dmu.inputs.len() != m || dmu.outputs.len() != s {
            out.push(Violation::LengthMismatch { id: dmu.id.clone() });
            continue;
        }
        let labelled = d
            .input_names
            .iter()
            .zip(&dmu.inputs)
            .chain(d.output_names.iter().zip(&dmu.outputs));
        for (name, &v) in labelled {
            if !v.is_finite() {
                out.push(Violation::NonFiniteValue {
                    id: dmu.id.clone(),
                    index: name.to_string(),
                });
            } else if v < 0.0 {
                out.push(Violation::NegativeValue {
                    id: dmu.id.clone(),
                    index: name.to_string(),
                });
            }
        }
    }
    let well_formed: Vec<&DmuRecord> = d
        .dmus
        .iter()
        .filter(|x| x.inputs.len() == m && x.outputs.len() == s)
        .collect();
    for (i, name) in d.input_names.iter().enumerate() {
        if !well_formed.iter().any(|x| x.inputs[i] > 0.0) {
            out.push(Violation::ZeroIndexColumn(name.to_string()));
        }
    }
    for (r, name) in d.output_names.iter().enumerate() {
        if !well_formed.iter().any(|x| x.outputs[r] > 0.0) {
            out.push(Violation::ZeroIndexColumn(name.to_string()));
        }
    }
    out
}

pub fn exclude_dmus(d: &Dataset, ids: &BTreeSet<String>) -> Result<Dataset> {
    for id in ids {
        d.index_of(id)?;
    }
    let dmus = d.dmus.iter().filter(|x| !ids.contains(&x.id)).cloned().collect();
    Dataset::new(d.input_names.clone(), d.output_names.clone(), dmus)
}

/// The six-unit, two-input, two-output example used throughout the documentation
/// and tests (units K, A, B, D, G, H).
pub fn example_dataset() -> Dataset {
    let rows: [(&str, [f64; 2], [f64; 2]); 6] = [
        ("K", [1.6, 145.0], [1036.0, 49.0]),
        ("A", [2.3, 120.0], [1327.0, 97.0]),
        ("B", [1.0, 29.0], [567.0, 89.0]),
        ("D", [1.9, 281.0], [2446.0, 97.0]),
        ("G", [1.8, 250.0], [1794.0, 57.0]),
        ("H", [2.5, 100.0], [1000.0, 70.0]),
    ];
    Dataset::new(
        vec![IndexName::new("x1", Some("ton")), IndexName::new("x2", Some("Hrs"))],
        vec![IndexName::new("y1", Some("M3")), IndexName::new("y2", Some("°c"))],
        rows.iter()
            .map(|(id, x, y)| DmuRecord {
                id: id.to_string(),
                inputs: x.to_vec(),
                outputs: y.to_vec(),
            })
            .collect(),
    )
    .expect("example data is valid")
}
