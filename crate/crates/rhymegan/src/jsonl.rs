//! Line-delimited JSON training log.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use rhymegan_core::training::{EpochRecord, StepRecord};

use crate::error::{io_err, Result};

pub const TRAIN_LOG_FILE: &str = "train_log.jsonl";

pub struct JsonlWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

fn unix_time() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let file = File::create(path).map_err(io_err(path))?;
        Ok(JsonlWriter {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    /// Writes `record` with `type` and `time` fields merged in.
    pub fn write<T: Serialize>(&mut self, kind: &str, record: &T) -> Result<()> {
        let mut value = serde_json::to_value(record).expect("records serialize");
        if let Value::Object(map) = &mut value {
            map.insert("type".into(), json!(kind));
            map.insert("time".into(), json!(unix_time()));
        }
        let line = serde_json::to_string(&value).expect("records serialize");
        writeln!(self.out, "{line}").map_err(io_err(&self.path))
    }

    pub fn step(&mut self, record: &StepRecord) -> Result<()> {
        self.write("step", record)
    }

    /// Epoch records are flushed immediately so a killed run keeps its history.
    pub fn epoch(&mut self, record: &EpochRecord) -> Result<()> {
        self.write("epoch", record)?;
        self.flush()
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(io_err(&self.path))
    }
}
