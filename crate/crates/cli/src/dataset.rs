//! Labelled sample matrices on disk.
//!
//! Format: UTF-8 CSV with a header row. The first column is named `label`;
//! the remaining header cells are feature ids. Values use a decimal point
//! and may be written in scientific notation.

use std::collections::HashSet;
use std::io::Write;
use std::path::Path;

use robustnn::Population;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("labels: {0}")]
    Label(String),
    #[error("duplicate feature id `{0}`")]
    DuplicateFeature(String),
    #[error("header: {0}")]
    Header(String),
}

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_ids: Vec<String>,
    pub samples: Vec<Vec<f64>>,
    pub labels: Vec<String>,
}

/// The two label values; the first one encountered plays the X role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classes {
    pub x: String,
    pub y: String,
}

impl Classes {
    pub fn name(&self, pop: Population) -> &str {
        match pop {
            Population::X => &self.x,
            Population::Y => &self.y,
        }
    }
}

impl Dataset {
    pub fn p(&self) -> usize {
        self.feature_ids.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn classes(&self) -> Result<Classes, DatasetError> {
        let mut seen: Vec<&String> = Vec::new();
        for l in &self.labels {
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        match seen.as_slice() {
            [x, y] => Ok(Classes {
                x: (*x).clone(),
                y: (*y).clone(),
            }),
            [] | [_] => Err(DatasetError::Label(format!(
                "need two classes, found {}",
                seen.len()
            ))),
            _ => Err(DatasetError::Label(format!(
                "need exactly two classes, found {}: {}",
                seen.len(),
                seen.iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            ))),
        }
    }

    /// Rows of each class, in file order.
    pub fn split(&self) -> Result<(Classes, Rows, Rows), DatasetError> {
        let classes = self.classes()?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (row, label) in self.samples.iter().zip(&self.labels) {
            if *label == classes.x {
                xs.push(row.clone());
            } else {
                ys.push(row.clone());
            }
        }
        Ok((classes, xs, ys))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut out = csv::WriterBuilder::new().from_writer(w);
        out.write_record(
            std::iter::once("label").chain(self.feature_ids.iter().map(|s| s.as_str())),
        )?;
        for (row, label) in self.samples.iter().zip(&self.labels) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.write_record(
                std::iter::once(label.as_str()).chain(cells.iter().map(|s| s.as_str())),
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> anyhow::Result<()> {
        let file = std::fs::File::create(path).map_err(|e| DatasetError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        self.write_csv(std::io::BufWriter::new(file))?;
        Ok(())
    }
}

fn parse_error(line: u64, message: impl Into<String>) -> DatasetError {
    DatasetError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a labelled table without checking the class count.
pub fn read_table<R: std::io::Read>(reader: R) -> Result<Dataset, DatasetError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| parse_error(1, e.to_string()))?
        .clone();
    let mut cells = header.iter();
    match cells.next() {
        Some(first) if first.trim() == "label" => {}
        _ => return Err(DatasetError::Header("first column must be `label`".into())),
    }
    let feature_ids: Vec<String> = cells.map(|s| s.trim().to_string()).collect();
    if feature_ids.is_empty() {
        return Err(DatasetError::Header("no feature columns".into()));
    }
    let mut seen = HashSet::new();
    for id in &feature_ids {
        if id.is_empty() {
            return Err(DatasetError::Header("empty feature id".into()));
        }
        if !seen.insert(id) {
            return Err(DatasetError::DuplicateFeature(id.clone()));
        }
    }
    let mut samples = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record =
            record.map_err(|e| parse_error(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != feature_ids.len() + 1 {
            return Err(parse_error(
                line,
                format!(
                    "expected {} cells, found {}",
                    feature_ids.len() + 1,
                    record.len()
                ),
            ));
        }
        let label = record[0].trim();
        if label.is_empty() {
            return Err(parse_error(line, "empty label"));
        }
        let row = record
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, cell)| {
                let v: f64 = cell.trim().parse().map_err(|_| {
                    parse_error(
                        line,
                        format!("column `{}`: `{cell}` is not a number", feature_ids[j]),
                    )
                })?;
                if v.is_nan() {
                    return Err(parse_error(
                        line,
                        format!("column `{}` is NaN", feature_ids[j]),
                    ));
                }
                Ok(v)
            })
            .collect::<Result<Vec<f64>, _>>()?;
        labels.push(label.to_string());
        samples.push(row);
    }
    Ok(Dataset {
        feature_ids,
        samples,
        labels,
    })
}

/// Reads and validates a two-class dataset.
pub fn load_dataset(path: &Path) -> Result<Dataset, DatasetError> {
    let data = load_table(path)?;
    data.classes()?;
    Ok(data)
}

pub fn load_table(path: &Path) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|e| DatasetError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    read_table(std::io::BufReader::new(file))
}
