//! The results JSONL file: one `ScoreRecord` per line, appended as units finish.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use vbench2_core::ScoreRecord;

use crate::error::{invalid, CliError};

/// Reads a results file; a torn final line (no trailing newline) is cut off.
pub fn load_results(path: &Path) -> Result<Vec<ScoreRecord>, CliError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    let mut records = Vec::new();
    let mut good_len = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        offset += line.len();
        let complete = line.ends_with('\n');
        let body = line.trim();
        if body.is_empty() {
            good_len = offset;
            continue;
        }
        if !complete {
            break;
        }
        match serde_json::from_str::<ScoreRecord>(body) {
            Ok(r) => {
                records.push(r);
                good_len = offset;
            }
            Err(e) => {
                return Err(invalid(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    records.len() + 1
                )))
            }
        }
    }
    if good_len < text.len() {
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(CliError::io(format!("truncating {}", path.display())))?;
        f.set_len(good_len as u64)
            .map_err(CliError::io(format!("truncating {}", path.display())))?;
    }
    Ok(records)
}

/// Serialized appender; every batch is flushed before returning.
pub struct ResultsWriter {
    out: BufWriter<File>,
    context: String,
}

impl ResultsWriter {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let context = format!("writing {}", path.display());
        let f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(CliError::io(context.clone()))?;
        Ok(Self {
            out: BufWriter::new(f),
            context,
        })
    }

    pub fn append(&mut self, records: &[ScoreRecord]) -> Result<(), CliError> {
        for r in records {
            let line = serde_json::to_string(r).expect("records serialize");
            writeln!(self.out, "{line}").map_err(CliError::io(self.context.clone()))?;
        }
        self.out.flush().map_err(CliError::io(self.context.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use vbench2_core::{DimensionId, ScoreValue};

    fn rec(i: usize) -> ScoreRecord {
        ScoreRecord {
            prompt_id: format!("p{i}"),
            dimension: DimensionId::Mechanics,
            model: "m".into(),
            sample: 0,
            value: ScoreValue::Score(1.0),
            evidence: serde_json::Value::Null,
        }
    }

    #[test]
    fn roundtrip_and_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        assert!(load_results(&path).unwrap().is_empty());
        let mut w = ResultsWriter::open(&path).unwrap();
        w.append(&[rec(0), rec(1)]).unwrap();
        drop(w);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"prompt_id\": \"p2\", \"dimen").unwrap();
        drop(f);
        let got = load_results(&path).unwrap();
        assert_eq!(got, vec![rec(0), rec(1)]);
        let mut w = ResultsWriter::open(&path).unwrap();
        w.append(&[rec(2)]).unwrap();
        assert_eq!(load_results(&path).unwrap(), vec![rec(0), rec(1), rec(2)]);
    }

    #[test]
    fn corrupt_middle_line_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        std::fs::write(&path, "not json\n{}\n").unwrap();
        assert!(matches!(load_results(&path), Err(CliError::Validation(_))));
    }
}
