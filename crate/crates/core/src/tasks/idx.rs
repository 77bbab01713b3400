//! IDX container parsing (the MNIST file format). All integers are
//! big-endian; pixel bytes are scaled to [0, 1] by dividing by 255.
//! Files whose name ends in `.gz` are decompressed first.

use flate2::read::GzDecoder;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, thiserror::Error)]
pub enum IdxError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: wrong magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic { path: PathBuf, expected: u32, found: u32 },
    #[error("{path}: truncated, need {expected} bytes but file has {found}")]
    Truncated { path: PathBuf, expected: usize, found: usize },
    #[error("{path}: {extra} unexpected bytes after the payload")]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
}

/// Images and labels from one IDX pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IdxData {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `[count × rows·cols]`, values in [0, 1].
    pub features: Vec<f64>,
    pub labels: Vec<u32>,
}

impl IdxData {
    pub fn dim(&self) -> usize {
        self.rows * self.cols
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>, IdxError> {
    let io = |source| IdxError::Io { path: path.to_path_buf(), source };
    let raw = fs::read(path).map_err(io)?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        GzDecoder::new(raw.as_slice()).read_to_end(&mut out).map_err(io)?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn parse_header(path: &Path, bytes: &[u8], magic: u32, dims: usize) -> Result<Vec<usize>, IdxError> {
    let header = 4 + 4 * dims;
    if bytes.len() < 4 {
        return Err(IdxError::Truncated { path: path.into(), expected: header, found: bytes.len() });
    }
    let found = be_u32(bytes, 0);
    if found != magic {
        return Err(IdxError::BadMagic { path: path.into(), expected: magic, found });
    }
    if bytes.len() < header {
        return Err(IdxError::Truncated { path: path.into(), expected: header, found: bytes.len() });
    }
    let sizes: Vec<usize> = (0..dims).map(|k| be_u32(bytes, 4 + 4 * k) as usize).collect();
    let expected = header + sizes.iter().product::<usize>();
    if bytes.len() < expected {
        return Err(IdxError::Truncated { path: path.into(), expected, found: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(IdxError::TrailingBytes { path: path.into(), extra: bytes.len() - expected });
    }
    Ok(sizes)
}

pub fn parse_images(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Vec<f64>), IdxError> {
    let sizes = parse_header(path, bytes, IMAGES_MAGIC, 3)?;
    let features = bytes[16..].iter().map(|&b| f64::from(b) / 255.0).collect();
    Ok((sizes[1], sizes[2], features))
}

pub fn parse_labels(path: &Path, bytes: &[u8]) -> Result<Vec<u32>, IdxError> {
    parse_header(path, bytes, LABELS_MAGIC, 1)?;
    Ok(bytes[8..].iter().map(|&b| u32::from(b)).collect())
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<IdxData, IdxError> {
    let (rows, cols, features) = parse_images(images_path, &read_bytes(images_path)?)?;
    let labels = parse_labels(labels_path, &read_bytes(labels_path)?)?;
    let images = features.len().checked_div(rows * cols).unwrap_or(0);
    if images != labels.len() {
        return Err(IdxError::CountMismatch { images, labels: labels.len() });
    }
    Ok(IdxData { rows, cols, features, labels })
}

/// Serializes images as an uncompressed IDX image file.
pub fn encode_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let count = pixels.len() / (rows * cols);
    let mut out = Vec::with_capacity(16 + pixels.len());
    for word in [IMAGES_MAGIC, count as u32, rows as u32, cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(pixels);
    out
}

/// Serializes labels as an uncompressed IDX label file.
pub fn encode_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// Finds `stem` or `stem.gz` inside `dir`.
pub fn locate(dir: &Path, stem: &str) -> PathBuf {
    let plain = dir.join(stem);
    if plain.exists() {
        return plain;
    }
    let gz = dir.join(format!("{stem}.gz"));
    if gz.exists() {
        gz
    } else {
        plain
    }
}
