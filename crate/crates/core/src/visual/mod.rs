//! Pixel MAE, external page rendering, the embedding sidecar client used
//! for VES, and a preview rasterizer for design documents.
//!
//! Images are RGB. Anything with alpha is composited onto white when it is
//! loaded, so MAE never sees transparency.

mod preview;
mod render;
mod sidecar;

pub use preview::{rasterize, PreviewError};
pub use render::{file_url, render_page, render_page_to, screenshot_viewport, RendererSpec, SCREENSHOT_SCALE};
pub use sidecar::{cosine, Sidecar, SidecarSpec};

use image::imageops::{self, FilterType};
use serde::Serialize;
use std::path::Path;

/// Row-major 8-bit RGB.
pub type ImageBuffer = image::RgbImage;

#[derive(Debug, thiserror::Error)]
pub enum VisualError {
    #[error("image has zero width or height")]
    EmptyImage,
    #[error("renderer unavailable: {0}")]
    RendererUnavailable(String),
    #[error("renderer timed out after {0} s")]
    RenderTimeout(u64),
    #[error("could not decode image: {0}")]
    DecodeFailure(String),
    #[error("embedding sidecar unavailable: {0}")]
    SidecarUnavailable(String),
    #[error("embedding sidecar protocol error: {0}")]
    ProtocolError(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityRecord {
    pub mae: f64,
    /// Only set when the sidecar ran.
    pub ves: Option<f64>,
    pub render_viewport: (u32, u32),
    /// Pixel MAE can disagree with human judgement (small shifts of large
    /// high-contrast areas score badly while looking right).
    pub caveat: &'static str,
}

pub const MAE_CAVEAT: &str = "pixel MAE penalises small offsets of high-contrast regions more than viewers do";

impl FidelityRecord {
    pub fn new(mae: f64, ves: Option<f64>, render_viewport: (u32, u32)) -> Self {
        FidelityRecord { mae, ves, render_viewport, caveat: MAE_CAVEAT }
    }
}

/// Composites straight-alpha RGBA onto white.
pub fn flatten_on_white(img: &image::RgbaImage) -> ImageBuffer {
    ImageBuffer::from_fn(img.width(), img.height(), |x, y| {
        let p = img.get_pixel(x, y).0;
        let a = p[3] as f64 / 255.0;
        let c = |v: u8| (v as f64 * a + 255.0 * (1.0 - a)).round() as u8;
        image::Rgb([c(p[0]), c(p[1]), c(p[2])])
    })
}

pub fn decode_image(bytes: &[u8]) -> Result<ImageBuffer, VisualError> {
    let img = image::load_from_memory(bytes).map_err(|e| VisualError::DecodeFailure(e.to_string()))?;
    Ok(flatten_on_white(&img.to_rgba8()))
}

pub fn load_image(path: &Path) -> Result<ImageBuffer, VisualError> {
    let bytes = std::fs::read(path).map_err(|e| VisualError::DecodeFailure(format!("{}: {e}", path.display())))?;
    decode_image(&bytes)
}

/// Mean absolute error over all channel samples, in `[0, 1]`. `b` is
/// bilinearly resized to `a`'s size first when they differ.
pub fn mae(a: &ImageBuffer, b: &ImageBuffer) -> Result<f64, VisualError> {
    if a.width() == 0 || a.height() == 0 || b.width() == 0 || b.height() == 0 {
        return Err(VisualError::EmptyImage);
    }
    let resized;
    let b = if a.dimensions() != b.dimensions() {
        resized = imageops::resize(b, a.width(), a.height(), FilterType::Triangle);
        &resized
    } else {
        b
    };
    let sum: u64 = a.as_raw().iter().zip(b.as_raw()).map(|(&x, &y)| x.abs_diff(y) as u64).sum();
    Ok(sum as f64 / (a.as_raw().len() as f64 * 255.0))
}
