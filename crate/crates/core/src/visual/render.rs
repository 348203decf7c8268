use super::{load_image, ImageBuffer, VisualError};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

/// Screenshots are taken at twice the design's top-level frame size.
pub const SCREENSHOT_SCALE: u32 = 2;

/// External headless-browser command. Placeholders `{input_url}`,
/// `{width}`, `{height}` and `{output_png}` are substituted per argument
/// after shell-style splitting, so paths with spaces stay one argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RendererSpec {
    pub command: Option<String>,
    pub timeout_secs: u64,
    /// Concurrent renders allowed by the CLI.
    pub pool_size: usize,
}

impl Default for RendererSpec {
    fn default() -> Self {
        RendererSpec { command: None, timeout_secs: 60, pool_size: 4 }
    }
}

pub fn screenshot_viewport(design_w: f64, design_h: f64) -> (u32, u32) {
    let d = |v: f64| (v.max(1.0).round() as u32) * SCREENSHOT_SCALE;
    (d(design_w), d(design_h))
}

/// `file://` URL of an absolute path, percent-encoding anything unsafe.
pub fn file_url(path: &Path) -> String {
    let mut out = String::from("file://");
    for b in path.to_string_lossy().bytes() {
        if b.is_ascii_alphanumeric() || b"-._~/".contains(&b) {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}

fn build_command(spec: &RendererSpec, url: &str, viewport: (u32, u32), out: &Path) -> Result<Command, VisualError> {
    let template = spec.command.as_deref().ok_or_else(|| VisualError::RendererUnavailable("no renderer command configured".into()))?;
    let parts = shlex::split(template).filter(|p| !p.is_empty()).ok_or_else(|| VisualError::RendererUnavailable(format!("cannot split command template {template:?}")))?;
    let out_s = out.to_string_lossy();
    let args: Vec<String> = parts
        .iter()
        .map(|p| {
            p.replace("{input_url}", url)
                .replace("{width}", &viewport.0.to_string())
                .replace("{height}", &viewport.1.to_string())
                .replace("{output_png}", &out_s)
        })
        .collect();
    let mut cmd = Command::new(&args[0]);
    cmd.args(&args[1..]).stdin(Stdio::null()).stdout(Stdio::null()).stderr(Stdio::piped());
    Ok(cmd)
}

/// Renders `html_path` with the browser viewport at 2x `design_size` and
/// writes the screenshot to `output_png`. One process per call.
pub fn render_page_to(html_path: &Path, design_size: (f64, f64), spec: &RendererSpec, output_png: &Path) -> Result<ImageBuffer, VisualError> {
    let abs = std::fs::canonicalize(html_path).map_err(|e| VisualError::RendererUnavailable(format!("input {}: {e}", html_path.display())))?;
    let viewport = screenshot_viewport(design_size.0, design_size.1);
    let _ = std::fs::remove_file(output_png);
    let mut cmd = build_command(spec, &file_url(&abs), viewport, output_png)?;
    let mut child = cmd.spawn().map_err(|e| VisualError::RendererUnavailable(format!("spawn failed: {e}")))?;
    let deadline = Instant::now() + Duration::from_secs(spec.timeout_secs);
    let status = loop {
        match child.try_wait() {
            Ok(Some(s)) => break s,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(VisualError::RenderTimeout(spec.timeout_secs));
            }
            Ok(None) => std::thread::sleep(Duration::from_millis(10)),
            Err(e) => return Err(VisualError::RendererUnavailable(e.to_string())),
        }
    };
    if !status.success() {
        let mut stderr = String::new();
        if let Some(mut s) = child.stderr.take() {
            let _ = std::io::Read::read_to_string(&mut s, &mut stderr);
        }
        return Err(VisualError::RendererUnavailable(format!("renderer exited with {status}: {}", stderr.trim())));
    }
    load_image(output_png)
}

static RENDER_SEQ: AtomicU64 = AtomicU64::new(0);

/// Like [`render_page_to`] with a throwaway output file.
pub fn render_page(html_path: &Path, design_size: (f64, f64), spec: &RendererSpec) -> Result<ImageBuffer, VisualError> {
    let n = RENDER_SEQ.fetch_add(1, Ordering::Relaxed);
    let out: PathBuf = std::env::temp_dir().join(format!("figui-render-{}-{n}.png", std::process::id()));
    let result = render_page_to(html_path, design_size, spec, &out);
    let _ = std::fs::remove_file(&out);
    result
}
