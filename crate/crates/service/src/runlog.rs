//! Append-only JSON-lines log of completed runs.
//!
//! Each record is serialized to one buffer and written with a single
//! `write` on a file opened in append mode, then synced. A crash can at
//! worst leave a torn final line without its newline; readers drop it, so a
//! record is either fully present or absent.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::thread;

use cr_core::engine::{DiagnosisResult, Status, TraceEvent};
use cr_core::{ContextInfo, Ontology};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tokio::sync::{mpsc, oneshot};

use crate::render;

pub const LOG_PATH_ENV: &str = "CR_LOG_PATH";
pub const DEFAULT_LOG_PATH: &str = "cr-runs.jsonl";

/// Label for runs answered by a person rather than a scenario file.
pub const INTERACTIVE: &str = "interactive";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyRef {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: Status,
    pub answer: Option<String>,
    pub negated: bool,
    pub confidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// UTC, RFC 3339.
    pub timestamp: String,
    pub ontology: OntologyRef,
    pub ci: ContextInfo,
    pub scenario: String,
    pub result: RunSummary,
    /// Hex SHA-256 of the JSON trace.
    pub trace_digest: String,
}

impl RunRecord {
    pub fn new(
        ontology: &Ontology,
        ci: ContextInfo,
        scenario: impl Into<String>,
        result: &DiagnosisResult,
    ) -> Self {
        Self {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            ontology: OntologyRef {
                name: ontology.name().to_string(),
                version: ontology.version().to_string(),
            },
            ci,
            scenario: scenario.into(),
            result: RunSummary {
                status: result.status,
                answer: result.answer.clone(),
                negated: result.negated,
                confidence: render::confidence(result.confidence),
            },
            trace_digest: trace_digest(&result.trace),
        }
    }
}

pub fn trace_digest(trace: &[TraceEvent]) -> String {
    let bytes = serde_json::to_vec(trace).expect("trace events serialize");
    format!("{:x}", Sha256::digest(bytes))
}

#[derive(Debug, Clone)]
pub struct RunLog {
    path: PathBuf,
}

impl RunLog {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    /// `$CR_LOG_PATH`, or `cr-runs.jsonl` in the working directory.
    pub fn from_env() -> Self {
        Self::new(
            std::env::var_os(LOG_PATH_ENV)
                .map_or_else(|| PathBuf::from(DEFAULT_LOG_PATH), PathBuf::from),
        )
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &RunRecord) -> io::Result<()> {
        let mut line = serde_json::to_vec(record)?;
        line.push(b'\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        file.write_all(&line)?;
        file.sync_data()
    }

    /// All complete records, oldest first. A missing file is an empty log.
    pub fn read(&self) -> io::Result<Vec<RunRecord>> {
        let file = match File::open(&self.path) {
            Ok(file) => file,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e),
        };
        let mut records = Vec::new();
        let mut reader = BufReader::new(file);
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            if !line.ends_with('\n') {
                tracing::warn!(path = %self.path.display(), "dropping torn final record");
                break;
            }
            match serde_json::from_str(&line) {
                Ok(record) => records.push(record),
                Err(e) => {
                    tracing::warn!(path = %self.path.display(), error = %e, "skipping unreadable record")
                }
            }
        }
        Ok(records)
    }
}

type Job = (RunRecord, oneshot::Sender<io::Result<()>>);

/// Single writer thread fed by a queue. `append` resolves once the record
/// is on disk.
#[derive(Debug, Clone)]
pub struct LogQueue {
    tx: mpsc::UnboundedSender<Job>,
    log: RunLog,
}

impl LogQueue {
    pub fn spawn(log: RunLog) -> Self {
        let (tx, mut rx) = mpsc::unbounded_channel::<Job>();
        let writer = log.clone();
        thread::Builder::new()
            .name("run-log".into())
            .spawn(move || {
                while let Some((record, ack)) = rx.blocking_recv() {
                    let _ = ack.send(writer.append(&record));
                }
            })
            .expect("spawn run-log writer");
        Self { tx, log }
    }

    pub async fn append(&self, record: RunRecord) -> io::Result<()> {
        let (ack, done) = oneshot::channel();
        self.tx
            .send((record, ack))
            .map_err(|_| io::Error::other("run-log writer stopped"))?;
        done.await
            .map_err(|_| io::Error::other("run-log writer stopped"))?
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }
}
