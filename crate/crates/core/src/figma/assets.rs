use serde_json::Value;
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssetKind {
    Png,
    Svg,
}

impl AssetKind {
    pub fn extension(&self) -> &'static str {
        match self {
            AssetKind::Png => "png",
            AssetKind::Svg => "svg",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AssetError {
    #[error("asset {key:?} is neither a decodable bitmap nor an SVG document")]
    UnsupportedFormat { key: String },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("definitions file {path}: {message}")]
    Definitions { path: String, message: String },
}

/// Component, component-set and style JSON definitions fetched alongside a
/// page and not yet embedded into its document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Definitions {
    pub components: BTreeMap<String, Value>,
    pub component_sets: BTreeMap<String, Value>,
    pub styles: BTreeMap<String, Value>,
}

impl Definitions {
    pub fn is_empty(&self) -> bool {
        self.components.is_empty() && self.component_sets.is_empty() && self.styles.is_empty()
    }
}

/// Asset files of one sample, keyed by raw reference (image hash, SVG asset
/// id) before integration and by local relative path afterwards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssetStore {
    pub assets: BTreeMap<String, Vec<u8>>,
    pub kinds: BTreeMap<String, AssetKind>,
    /// Duplicate reference -> primary reference. Never chained.
    pub dedup_map: BTreeMap<String, String>,
    pub definitions: Definitions,
}

pub fn sniff_kind(bytes: &[u8]) -> Option<AssetKind> {
    if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
        return Some(AssetKind::Png);
    }
    let head = String::from_utf8_lossy(&bytes[..bytes.len().min(512)]);
    let head = head.trim_start_matches('\u{feff}').trim_start();
    if head.starts_with("<svg") || (head.starts_with("<?xml") && head.contains("<svg")) {
        return Some(AssetKind::Svg);
    }
    None
}

impl AssetStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: impl Into<String>, bytes: Vec<u8>, kind: AssetKind) {
        let key = key.into();
        self.kinds.insert(key.clone(), kind);
        self.assets.insert(key, bytes);
    }

    /// Inserts bytes of any supported format. PNG and SVG are stored as-is,
    /// other bitmaps are re-encoded as PNG.
    pub fn insert_detect(&mut self, key: impl Into<String>, bytes: Vec<u8>) -> Result<AssetKind, AssetError> {
        let key = key.into();
        if let Some(kind) = sniff_kind(&bytes) {
            self.insert(key, bytes, kind);
            return Ok(kind);
        }
        let img = image::load_from_memory(&bytes).map_err(|_| AssetError::UnsupportedFormat { key: key.clone() })?;
        let mut png = Vec::new();
        img.write_to(&mut io::Cursor::new(&mut png), image::ImageFormat::Png)
            .map_err(|_| AssetError::UnsupportedFormat { key: key.clone() })?;
        self.insert(key, png, AssetKind::Png);
        Ok(AssetKind::Png)
    }

    pub fn get(&self, key: &str) -> Option<&[u8]> {
        self.assets.get(key).map(Vec::as_slice)
    }

    /// Looks a reference up directly or through one level of `dedup_map`.
    pub fn resolve(&self, key: &str) -> Option<(&str, &[u8])> {
        if let Some((k, v)) = self.assets.get_key_value(key) {
            return Some((k.as_str(), v.as_slice()));
        }
        let primary = self.dedup_map.get(key)?;
        self.assets.get_key_value(primary.as_str()).map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    /// Loads a raw asset directory: every file becomes an entry keyed by its
    /// file stem (the Figma image hash or node id it was downloaded for).
    pub fn load_raw_dir(dir: &Path) -> Result<AssetStore, AssetError> {
        let mut store = AssetStore::new();
        if !dir.is_dir() {
            return Ok(store);
        }
        for path in sorted_files(dir)? {
            let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
            let bytes = read(&path)?;
            store.insert_detect(stem.to_string(), bytes)?;
        }
        Ok(store)
    }

    /// Loads a refined sample's `assets/` directory, keyed by the relative
    /// path `assets/<file>`.
    pub fn load_local_dir(sample_dir: &Path) -> Result<AssetStore, AssetError> {
        let mut store = AssetStore::new();
        let dir = sample_dir.join("assets");
        if !dir.is_dir() {
            return Ok(store);
        }
        for path in sorted_files(&dir)? {
            let Some(name) = path.file_name().and_then(|s| s.to_str()) else { continue };
            let bytes = read(&path)?;
            store.insert_detect(format!("assets/{name}"), bytes)?;
        }
        Ok(store)
    }

    /// Reads `{"components": {...}, "componentSets": {...}, "styles": {...}}`.
    pub fn load_definitions(&mut self, path: &Path) -> Result<(), AssetError> {
        let bytes = read(path)?;
        let err = |message: String| AssetError::Definitions { path: path.display().to_string(), message };
        let v: Value = serde_json::from_slice(&bytes).map_err(|e| err(e.to_string()))?;
        let section = |k: &str| -> Result<BTreeMap<String, Value>, AssetError> {
            match v.get(k) {
                None => Ok(BTreeMap::new()),
                Some(Value::Object(m)) => Ok(m.iter().map(|(k, v)| (k.clone(), v.clone())).collect()),
                Some(_) => Err(err(format!("`{k}` must be an object"))),
            }
        };
        self.definitions.components.extend(section("components")?);
        self.definitions.component_sets.extend(section("componentSets")?);
        self.definitions.styles.extend(section("styles")?);
        Ok(())
    }

    /// Writes every entry whose key is a relative path under `root`.
    pub fn write_local(&self, root: &Path) -> Result<(), AssetError> {
        for (key, bytes) in &self.assets {
            let dest = root.join(key);
            if let Some(parent) = dest.parent() {
                fs::create_dir_all(parent).map_err(|source| AssetError::Io { path: parent.display().to_string(), source })?;
            }
            fs::write(&dest, bytes).map_err(|source| AssetError::Io { path: dest.display().to_string(), source })?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, AssetError> {
    fs::read(path).map_err(|source| AssetError::Io { path: path.display().to_string(), source })
}

fn sorted_files(dir: &Path) -> Result<Vec<std::path::PathBuf>, AssetError> {
    let rd = fs::read_dir(dir).map_err(|source| AssetError::Io { path: dir.display().to_string(), source })?;
    let mut files: Vec<_> = rd.filter_map(Result::ok).map(|e| e.path()).filter(|p| p.is_file()).collect();
    files.sort();
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sniffs_png_and_svg() {
        assert_eq!(sniff_kind(b"\x89PNG\r\n\x1a\n...."), Some(AssetKind::Png));
        assert_eq!(sniff_kind(b"  <svg xmlns='x'/>"), Some(AssetKind::Svg));
        assert_eq!(sniff_kind(b"<?xml version='1.0'?><svg/>"), Some(AssetKind::Svg));
        assert_eq!(sniff_kind(b"GIF89a"), None);
    }

    #[test]
    fn resolve_follows_one_dedup_level() {
        let mut s = AssetStore::new();
        s.insert("a", b"<svg/>".to_vec(), AssetKind::Svg);
        s.dedup_map.insert("b".into(), "a".into());
        assert_eq!(s.resolve("b").map(|(k, _)| k), Some("a"));
        assert!(s.resolve("c").is_none());
    }

    #[test]
    fn jpeg_is_reencoded_as_png() {
        let img = image::RgbImage::from_pixel(2, 2, image::Rgb([10, 20, 30]));
        let mut jpg = Vec::new();
        image::DynamicImage::ImageRgb8(img)
            .write_to(&mut io::Cursor::new(&mut jpg), image::ImageFormat::Jpeg)
            .unwrap();
        let mut s = AssetStore::new();
        assert_eq!(s.insert_detect("x", jpg).unwrap(), AssetKind::Png);
        assert_eq!(sniff_kind(s.get("x").unwrap()), Some(AssetKind::Png));
        assert!(s.insert_detect("y", b"garbage".to_vec()).is_err());
    }
}
