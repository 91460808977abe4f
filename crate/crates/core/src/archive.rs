//! Append-only archive of compositions.
//!
//! An archive is a directory holding `compositions.jsonl` (one record per
//! line) and `index.txt` (one dedup key per line). The index is derived data
//! and can always be rebuilt from the records.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::aesthetics::FeatureBreakdown;
use crate::conventions::ConventionReport;
use crate::solver::{SolutionTree, Stipulation};

pub const RECORDS_FILE: &str = "compositions.jsonl";
pub const INDEX_FILE: &str = "index.txt";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionRecord {
    pub fen: String,
    pub stipulation: Stipulation,
    pub composer_version: String,
    pub location_label: String,
    pub utc_timestamp: String,
    pub main_line: Vec<String>,
    pub solution_tree: SolutionTree,
    pub aesthetics_score: f64,
    pub aesthetics_breakdown: FeatureBreakdown,
    pub convention_report: ConventionReport,
    pub seed: u64,
    pub candidate_index: u64,
    pub dedup_key: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ArchiveError {
    #[error("archive I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("{file}:{line}: malformed record: {message}")]
    Malformed { file: String, line: usize, message: String },
}

pub struct Archive {
    dir: PathBuf,
    records: File,
    index: File,
    keys: HashSet<String>,
    len: usize,
}

impl Archive {
    /// Open or create an archive directory. A trailing partial line left
    /// by an interrupted writer is truncated. The index is rebuilt when it
    /// disagrees with the records.
    pub fn open(dir: &Path) -> Result<Archive, ArchiveError> {
        fs::create_dir_all(dir)?;
        let records_path = dir.join(RECORDS_FILE);
        truncate_partial_line(&records_path)?;
        let records = read_records(&records_path)?;
        let keys: HashSet<String> = records.iter().map(|r| r.dedup_key.clone()).collect();
        let index_path = dir.join(INDEX_FILE);
        let indexed: Option<Vec<String>> = fs::read_to_string(&index_path)
            .ok()
            .map(|t| t.lines().map(str::to_owned).collect());
        let expected: Vec<String> = records.iter().map(|r| r.dedup_key.clone()).collect();
        if indexed.as_ref() != Some(&expected) {
            write_index(&index_path, &expected)?;
        }
        Ok(Archive {
            dir: dir.to_owned(),
            records: OpenOptions::new().create(true).append(true).open(&records_path)?,
            index: OpenOptions::new().create(true).append(true).open(&index_path)?,
            keys,
            len: records.len(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains_key(&self, key: &str) -> bool {
        self.keys.contains(key)
    }

    /// Append one record as a single line. Returns `false` without writing
    /// when its dedup key is already present.
    pub fn append(&mut self, record: &CompositionRecord) -> Result<bool, ArchiveError> {
        if self.keys.contains(&record.dedup_key) {
            return Ok(false);
        }
        let mut line = serde_json::to_string(record).map_err(io::Error::from)?;
        line.push('\n');
        self.records.write_all(line.as_bytes())?;
        self.records.flush()?;
        writeln!(self.index, "{}", record.dedup_key)?;
        self.index.flush()?;
        self.keys.insert(record.dedup_key.clone());
        self.len += 1;
        Ok(true)
    }

    pub fn sync(&mut self) -> Result<(), ArchiveError> {
        self.records.sync_all()?;
        self.index.sync_all()?;
        Ok(())
    }

    pub fn records(&self) -> Result<Vec<CompositionRecord>, ArchiveError> {
        read_records(&self.dir.join(RECORDS_FILE))
    }

    /// Rewrite the index from the records file.
    pub fn rebuild_index(dir: &Path) -> Result<usize, ArchiveError> {
        let records = read_records(&dir.join(RECORDS_FILE))?;
        let keys: Vec<String> = records.into_iter().map(|r| r.dedup_key).collect();
        write_index(&dir.join(INDEX_FILE), &keys)?;
        Ok(keys.len())
    }
}

fn write_index(path: &Path, keys: &[String]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp)?;
    for k in keys {
        writeln!(f, "{k}")?;
    }
    f.sync_all()?;
    fs::rename(tmp, path)
}

fn truncate_partial_line(path: &Path) -> io::Result<()> {
    let Ok(bytes) = fs::read(path) else {
        return Ok(());
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    OpenOptions::new().write(true).open(path)?.set_len(keep as u64)
}

pub fn read_records(path: &Path) -> Result<Vec<CompositionRecord>, ArchiveError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| ArchiveError::Malformed {
            file: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}
