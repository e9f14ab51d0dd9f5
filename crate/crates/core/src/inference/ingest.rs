use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition_laws::Partition;

/// Record layout of a species-label file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One label column. The first record is skipped when `header` is set.
    Csv { header: bool },
    /// One JSON object per line with a `label` field (string or number).
    Jsonl,
    /// One label per line.
    Plain,
}

/// Observed species labels together with the partition they induce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesSample {
    labels: Vec<String>,
    partition: Partition,
}

impl SpeciesSample {
    /// Reduces labels to block sizes. Two observations share a block exactly
    /// when their labels are equal.
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut sizes: Vec<usize> = Vec::new();
        for label in &labels {
            let next = sizes.len();
            let slot = *index.entry(label.as_str()).or_insert(next);
            if slot == next {
                sizes.push(0);
            }
            sizes[slot] += 1;
        }
        let partition = Partition::from_block_sizes(&sizes)?;
        Ok(SpeciesSample { labels, partition })
    }

    /// A sample with synthetic labels `s1, s2, …`, one per block.
    pub fn from_partition(partition: &Partition) -> Self {
        let mut labels = Vec::with_capacity(partition.n());
        for (i, size) in partition.block_sizes().into_iter().enumerate() {
            labels.extend(std::iter::repeat_n(format!("s{}", i + 1), size));
        }
        SpeciesSample { labels, partition: partition.clone() }
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    /// Number of distinct species j.
    pub fn num_species(&self) -> usize {
        self.partition.num_blocks()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Writes the labels in `format`, readable back by [`ingest_reader`].
    pub fn emit<W: Write>(&self, format: InputFormat, mut out: W) -> Result<()> {
        match format {
            InputFormat::Csv { header } => {
                let mut writer = csv::Writer::from_writer(out);
                if header {
                    writer.write_record(["label"]).map_err(csv_io)?;
                }
                for label in &self.labels {
                    writer.write_record([label]).map_err(csv_io)?;
                }
                writer.flush()?;
            }
            InputFormat::Jsonl => {
                for label in &self.labels {
                    serde_json::to_writer(&mut out, &serde_json::json!({ "label": label }))?;
                    out.write_all(b"\n")?;
                }
            }
            InputFormat::Plain => {
                for label in &self.labels {
                    if label.contains('\n') || label.trim() != label || label.is_empty() {
                        return Err(Error::InvalidParams(format!("label {label:?} cannot be written as plain text")));
                    }
                    writeln!(out, "{label}")?;
                }
            }
        }
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Reads a sample from a file.
pub fn ingest(path: impl AsRef<Path>, format: InputFormat) -> Result<SpeciesSample> {
    ingest_reader(File::open(path)?, format)
}

/// Reads a sample from any byte stream. Blank lines are ignored; any other
/// malformed record is reported with its 1-based line number.
pub fn ingest_reader<R: Read>(reader: R, format: InputFormat) -> Result<SpeciesSample> {
    let labels = match format {
        InputFormat::Csv { header } => read_csv(reader, header)?,
        InputFormat::Jsonl => read_lines(reader, parse_json_label)?,
        InputFormat::Plain => read_lines(reader, |s| Ok(s.to_string()))?,
    };
    SpeciesSample::from_labels(labels)
}

fn read_lines<R: Read>(reader: R, parse: impl Fn(&str) -> std::result::Result<String, String>) -> Result<Vec<String>> {
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        labels.push(parse(trimmed).map_err(|msg| Error::Parse { line: i + 1, msg })?);
    }
    Ok(labels)
}

fn parse_json_label(line: &str) -> std::result::Result<String, String> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
    match value.get("label") {
        Some(serde_json::Value::String(s)) => Ok(s.clone()),
        Some(serde_json::Value::Number(x)) => Ok(x.to_string()),
        Some(other) => Err(format!("label must be a string or number, got {other}")),
        None => Err("missing \"label\" field".into()),
    }
}

fn read_csv<R: Read>(reader: R, header: bool) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(header).flexible(true).from_reader(reader);
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 1 {
            return Err(Error::Parse { line, msg: format!("expected one label column, found {}", record.len()) });
        }
        let label = record[0].trim();
        if label.is_empty() {
            return Err(Error::Parse { line, msg: "empty label".into() });
        }
        labels.push(label.to_string());
    }
    Ok(labels)
}
