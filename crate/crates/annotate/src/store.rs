//! Durable label log.
//!
//! Every mutation is appended as one JSON line and synced to disk before the
//! call returns. Opening a store replays the log (last write wins per
//! `(word_id, column)`) and rewrites it compactly, one line per live label
//! in key order. A torn final line, as left by a crash mid-append, is
//! dropped during replay.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Valid,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredLabel {
    pub label: Label,
    /// Milliseconds since the Unix epoch at write time.
    pub timestamp: u64,
}

#[derive(Serialize, Deserialize)]
struct LogEntry {
    word_id: String,
    column: usize,
    /// `None` records a deletion.
    label: Option<Label>,
    timestamp: u64,
}

#[derive(Debug)]
pub struct LabelStore {
    path: PathBuf,
    labels: BTreeMap<(String, usize), StoredLabel>,
    file: File,
}

fn now_millis() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn io_err(path: &Path, e: std::io::Error) -> ServiceError {
    ServiceError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

impl LabelStore {
    /// Opens (creating if needed) the log at `path`, replays and compacts it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let path = path.as_ref().to_path_buf();
        let labels = match fs::read_to_string(&path) {
            Ok(text) => replay(&path, &text)?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(io_err(&path, e)),
        };
        write_compacted(&path, &labels)?;
        let file = OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| io_err(&path, e))?;
        Ok(LabelStore { path, labels, file })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, word_id: &str, column: usize) -> Option<StoredLabel> {
        self.labels.get(&(word_id.to_string(), column)).copied()
    }

    /// Live labels of one word, by column.
    pub fn word_labels(&self, word_id: &str) -> BTreeMap<usize, StoredLabel> {
        self.labels
            .range((word_id.to_string(), 0)..=(word_id.to_string(), usize::MAX))
            .map(|((_, c), l)| (*c, *l))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn snapshot(&self) -> BTreeMap<(String, usize), StoredLabel> {
        self.labels.clone()
    }

    pub fn set(&mut self, word_id: &str, column: usize, label: Label) -> Result<(), ServiceError> {
        let timestamp = now_millis();
        self.append(LogEntry {
            word_id: word_id.to_string(),
            column,
            label: Some(label),
            timestamp,
        })?;
        self.labels
            .insert((word_id.to_string(), column), StoredLabel { label, timestamp });
        Ok(())
    }

    pub fn remove(&mut self, word_id: &str, column: usize) -> Result<(), ServiceError> {
        if self.get(word_id, column).is_none() {
            return Ok(());
        }
        self.append(LogEntry {
            word_id: word_id.to_string(),
            column,
            label: None,
            timestamp: now_millis(),
        })?;
        self.labels.remove(&(word_id.to_string(), column));
        Ok(())
    }

    fn append(&mut self, entry: LogEntry) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(&entry).expect("log entries serialize");
        line.push(b'\n');
        self.file.write_all(&line).map_err(|e| io_err(&self.path, e))?;
        self.file.sync_data().map_err(|e| io_err(&self.path, e))
    }
}

fn replay(path: &Path, text: &str) -> Result<BTreeMap<(String, usize), StoredLabel>, ServiceError> {
    let mut labels = BTreeMap::new();
    let lines: Vec<&str> = text.lines().collect();
    let torn_tail = !text.is_empty() && !text.ends_with('\n');
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let entry: LogEntry = match serde_json::from_str(line) {
            Ok(e) => e,
            Err(_) if torn_tail && i + 1 == lines.len() => {
                log::warn!("{}: dropping incomplete final line", path.display());
                break;
            }
            Err(e) => {
                return Err(ServiceError::CorruptLog(format!("{}:{}: {e}", path.display(), i + 1)));
            }
        };
        let key = (entry.word_id, entry.column);
        match entry.label {
            Some(label) => {
                labels.insert(
                    key,
                    StoredLabel {
                        label,
                        timestamp: entry.timestamp,
                    },
                );
            }
            None => {
                labels.remove(&key);
            }
        }
    }
    Ok(labels)
}

fn write_compacted(path: &Path, labels: &BTreeMap<(String, usize), StoredLabel>) -> Result<(), ServiceError> {
    let mut out = Vec::new();
    for ((word_id, column), l) in labels {
        let entry = LogEntry {
            word_id: word_id.clone(),
            column: *column,
            label: Some(l.label),
            timestamp: l.timestamp,
        };
        serde_json::to_writer(&mut out, &entry).expect("log entries serialize");
        out.push(b'\n');
    }
    let tmp = path.with_extension("compact.tmp");
    let mut f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(&out).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_write_wins_and_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        {
            let mut s = LabelStore::open(&path).unwrap();
            s.set("a", 3, Label::Valid).unwrap();
            s.set("a", 3, Label::Invalid).unwrap();
            s.set("b", 1, Label::Valid).unwrap();
            s.remove("b", 1).unwrap();
            s.set("a", 9, Label::Valid).unwrap();
        }
        let s = LabelStore::open(&path).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("a", 3).unwrap().label, Label::Invalid);
        assert!(s.get("b", 1).is_none());
        assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 2);
    }

    #[test]
    fn compaction_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        {
            let mut s = LabelStore::open(&path).unwrap();
            s.set("z", 1, Label::Valid).unwrap();
            s.set("a", 2, Label::Invalid).unwrap();
        }
        LabelStore::open(&path).unwrap();
        let once = fs::read(&path).unwrap();
        LabelStore::open(&path).unwrap();
        assert_eq!(fs::read(&path).unwrap(), once);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        fs::write(
            &path,
            "{\"word_id\":\"a\",\"column\":1,\"label\":\"valid\",\"timestamp\":5}\n{\"word_id\":\"a\",\"col",
        )
        .unwrap();
        let s = LabelStore::open(&path).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn corrupt_middle_line_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("labels.jsonl");
        fs::write(&path, "garbage\n{\"word_id\":\"a\",\"column\":1,\"label\":\"valid\",\"timestamp\":5}\n").unwrap();
        assert!(matches!(LabelStore::open(&path), Err(ServiceError::CorruptLog(_))));
    }
}
