use serde::Serialize;
use std::path::Path;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: Status,
    pub ms: u64,
}

/// One sample's terminal record.
#[derive(Debug, Clone, Serialize)]
pub struct SampleRecord {
    pub id: String,
    pub status: Status,
    pub stages: Vec<StageRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

impl SampleRecord {
    pub fn new(id: &str) -> Self {
        SampleRecord { id: id.to_string(), status: Status::Ok, stages: Vec::new(), error: None, flags: Vec::new() }
    }

    /// Times `f` as stage `name`; a failure also fails the sample.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T, String>) -> Result<T, String> {
        let t = Instant::now();
        let r = f();
        let status = if r.is_ok() { Status::Ok } else { Status::Failed };
        self.stages.push(StageRecord { stage: name.to_string(), status, ms: t.elapsed().as_millis() as u64 });
        if let Err(e) = &r {
            self.fail(format!("{name}: {e}"));
        }
        r
    }

    pub fn fail(&mut self, msg: String) {
        self.status = Status::Failed;
        if self.error.is_none() {
            self.error = Some(msg);
        }
    }
}

/// Per-run record written next to the outputs. Timings make it differ
/// between runs; the outputs themselves do not.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config_digest: String,
    pub jobs: usize,
    pub samples: Vec<SampleRecord>,
}

impl RunManifest {
    pub fn failed(&self) -> usize {
        self.samples.iter().filter(|s| s.status == Status::Failed).count()
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        if let Some(p) = path.parent() {
            std::fs::create_dir_all(p)?;
        }
        std::fs::write(path, serde_json::to_string_pretty(self).expect("manifest serializes") + "\n")
    }
}
