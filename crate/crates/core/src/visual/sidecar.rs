use super::VisualError;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::Duration;

/// Tolerance on the unit norm of returned vectors.
const NORM_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SidecarSpec {
    /// Command line of the embedding process, shell-style quoted.
    pub command: Option<String>,
    pub timeout_secs: u64,
}

impl Default for SidecarSpec {
    fn default() -> Self {
        SidecarSpec { command: None, timeout_secs: 120 }
    }
}

/// Running embedding process speaking newline-delimited JSON on its
/// standard streams: `{"paths": [..]}` in, `{"vectors": [[..]], "dim": n}`
/// or `{"error": ".."}` out.
pub struct Sidecar {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
}

impl Sidecar {
    pub fn spawn(spec: &SidecarSpec) -> Result<Sidecar, VisualError> {
        let template = spec.command.as_deref().ok_or_else(|| VisualError::SidecarUnavailable("no sidecar command configured".into()))?;
        let args = shlex::split(template).filter(|a| !a.is_empty()).ok_or_else(|| VisualError::SidecarUnavailable(format!("cannot split {template:?}")))?;
        let mut child = Command::new(&args[0])
            .args(&args[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| VisualError::SidecarUnavailable(format!("{}: {e}", args[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Sidecar { child, stdin, lines: rx, timeout: Duration::from_secs(spec.timeout_secs) })
    }

    /// Unit-norm embeddings, one per path, in request order.
    pub fn embed(&mut self, paths: &[&Path]) -> Result<Vec<Vec<f64>>, VisualError> {
        let req = json!({ "paths": paths.iter().map(|p| p.to_string_lossy()).collect::<Vec<_>>() });
        writeln!(self.stdin, "{req}").and_then(|_| self.stdin.flush()).map_err(|e| VisualError::SidecarUnavailable(format!("write failed: {e}")))?;
        let line = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(VisualError::SidecarUnavailable(format!("read failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => return Err(VisualError::SidecarUnavailable(format!("no response within {} s", self.timeout.as_secs()))),
            Err(RecvTimeoutError::Disconnected) => return Err(VisualError::SidecarUnavailable("sidecar closed its output".into())),
        };
        parse_response(&line, paths.len())
    }

    /// Cosine similarity of the two images' embeddings.
    pub fn ves(&mut self, a: &Path, b: &Path) -> Result<f64, VisualError> {
        let v = self.embed(&[a, b])?;
        Ok(cosine(&v[0], &v[1]))
    }
}

impl Drop for Sidecar {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Dot product; the vectors are unit-norm so this is the cosine.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn parse_response(line: &str, expected: usize) -> Result<Vec<Vec<f64>>, VisualError> {
    let bad = |m: String| VisualError::ProtocolError(m);
    let v: Value = serde_json::from_str(line).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    if let Some(err) = v.get("error") {
        return Err(bad(format!("sidecar reported: {}", err.as_str().map(str::to_string).unwrap_or_else(|| err.to_string()))));
    }
    let dim = v.get("dim").and_then(Value::as_u64).ok_or_else(|| bad("missing dim".into()))? as usize;
    let rows = v.get("vectors").and_then(Value::as_array).ok_or_else(|| bad("missing vectors".into()))?;
    if rows.len() != expected {
        return Err(bad(format!("expected {expected} vectors, got {}", rows.len())));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let vals = row.as_array().ok_or_else(|| bad(format!("vector {i} is not an array")))?;
        let vec: Option<Vec<f64>> = vals.iter().map(Value::as_f64).collect();
        let vec = vec.ok_or_else(|| bad(format!("vector {i} has non-numeric entries")))?;
        if vec.len() != dim {
            return Err(bad(format!("vector {i} has length {}, dim is {dim}", vec.len())));
        }
        let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(bad(format!("vector {i} has norm {norm}")));
        }
        out.push(vec);
    }
    Ok(out)
}
