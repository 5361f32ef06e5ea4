use radsched_core::domain::{Assignment, Patient};
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

/// One committed booking, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRecord {
    /// State version after the booking; records are numbered from 1.
    pub version: u64,
    pub patient: Patient,
    pub assignment: Assignment,
    pub forced: bool,
    pub suggestion_id: Option<String>,
    pub at_ms: u64,
}

/// Append-only booking log.
#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: Mutex<File>,
}

impl Journal {
    /// Opens `path` for appending, cutting off a torn final line first.
    pub fn open(path: &Path) -> std::io::Result<Self> {
        if let Ok(bytes) = std::fs::read(path) {
            if !bytes.is_empty() && bytes.last() != Some(&b'\n') {
                let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
                tracing::warn!(path = %path.display(), dropped = bytes.len() - keep, "truncating torn journal tail");
                OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(Journal { path: path.to_path_buf(), file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Every complete record. A torn final line, left by a crash during a
    /// write, is skipped.
    pub fn read_all(path: &Path) -> radsched_core::Result<Vec<JournalRecord>> {
        let lines: Vec<String> = match File::open(path) {
            Ok(f) => BufReader::new(f).lines().collect::<std::io::Result<_>>()?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let last = lines.len().saturating_sub(1);
        let mut out = Vec::with_capacity(lines.len());
        for (i, line) in lines.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(line) {
                Ok(r) => out.push(r),
                Err(e) if i == last => {
                    tracing::warn!(line = i + 1, error = %e, "skipping torn journal record")
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    }

    pub fn append(&self, record: &JournalRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record).map_err(std::io::Error::other)?;
        line.push('\n');
        let mut file = self.file.lock().unwrap_or_else(|e| e.into_inner());
        file.write_all(line.as_bytes())?;
        file.sync_data()
    }
}
