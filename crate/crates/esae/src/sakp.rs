//! Semantic-aware key preprocessing: turns one frame's detections into a
//! canonical byte digest that sender and receiver can derive independently.
//!
//! The pipeline is top-K selection by confidence, grid quantization of box
//! centers, and a sorted `class:grid` encoding. Every step is deterministic
//! and invariant under permutation of the input detections, which is what
//! lets two endpoints agree on key material from bit-level divergent frames.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Digest text reserved for frames with no detections.
pub const EMPTY_DIGEST: &str = "EMPTY";

/// One detected object with normalized geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Class index in `[0, num_classes)`.
    #[serde(rename = "c")]
    pub class_id: u32,
    /// Detector confidence in `[0, 1]`.
    #[serde(rename = "p")]
    pub confidence: f64,
    /// Box center, normalized to `[0, 1]`.
    pub cx: f64,
    /// Box center, normalized to `[0, 1]`.
    pub cy: f64,
    /// Box width, normalized to `(0, 1]`.
    pub w: f64,
    /// Box height, normalized to `(0, 1]`.
    pub h: f64,
}

impl Detection {
    pub fn validate(&self, num_classes: u32) -> Result<()> {
        if self.class_id >= num_classes {
            return Err(Error::InputDomain(format!(
                "class_id {} out of range for {} classes",
                self.class_id, num_classes
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::InputDomain(format!(
                "confidence {} outside [0,1]",
                self.confidence
            )));
        }
        for (name, v) in [("cx", self.cx), ("cy", self.cy)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InputDomain(format!("{name} {v} outside [0,1]")));
            }
        }
        for (name, v) in [("w", self.w), ("h", self.h)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InputDomain(format!("{name} {v} outside (0,1]")));
            }
        }
        Ok(())
    }
}

/// All detections of one frame. Detection order carries no meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameDetections {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(rename = "dets")]
    pub detections: Vec<Detection>,
}

impl FrameDetections {
    pub fn new(frame_index: u64, detections: Vec<Detection>) -> Self {
        FrameDetections {
            frame_index,
            detections,
        }
    }

    pub fn validate(&self, num_classes: u32) -> Result<()> {
        for det in &self.detections {
            det.validate(num_classes)?;
        }
        Ok(())
    }
}

/// Grid layout used for center quantization. `rows * cols` is the cell
/// count Q; rows and cols are explicit so non-square layouts are
/// well-defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
}

impl GridSpec {
    pub fn new(rows: u32, cols: u32) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config(format!(
                "grid must have at least one row and column, got {rows}x{cols}"
            )));
        }
        rows.checked_mul(cols)
            .ok_or_else(|| Error::Config(format!("grid {rows}x{cols} overflows cell count")))?;
        Ok(GridSpec { rows, cols })
    }

    /// Square layout for a perfect-square cell count (900 -> 30x30).
    pub fn square(cells: u32) -> Result<Self> {
        let side = (cells as f64).sqrt().round() as u32;
        if side == 0 || side * side != cells {
            return Err(Error::Config(format!(
                "cell count {cells} is not a perfect square; give rows x cols explicitly"
            )));
        }
        GridSpec::new(side, side)
    }

    /// Total cell count Q.
    pub fn cells(&self) -> u32 {
        self.rows * self.cols
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

/// Digest-pipeline parameters shared by both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SakpConfig {
    /// Number of top-confidence detections per frame, K.
    pub top_k: u32,
    pub grid: GridSpec,
    /// Class-vocabulary size N.
    pub num_classes: u32,
    /// Digest-history window T used for key derivation.
    pub window: u32,
}

impl Default for SakpConfig {
    fn default() -> Self {
        SakpConfig {
            top_k: 5,
            grid: GridSpec { rows: 30, cols: 30 },
            num_classes: 80,
            window: 1,
        }
    }
}

impl SakpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be >= 1".into()));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::Config("num_classes must be >= 2".into()));
        }
        GridSpec::new(self.grid.rows, self.grid.cols)?;
        Ok(())
    }
}

/// Canonical byte digest of one frame; the KDF password material.
///
/// Canonical digests match `c:g|c:g|...` (decimal, sorted by grid index then
/// class id) or equal `"EMPTY"`. The protocol additionally reserves the
/// non-canonical token `"AUTHFAIL"` for undecryptable frames.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub struct SemanticDigest {
    text: String,
    pair_count: usize,
}

impl SemanticDigest {
    /// Wraps raw digest text, e.g. from a fixture file or a reserved token.
    /// `pair_count` is recovered from the text when it is canonical.
    pub fn from_text(text: impl Into<String>) -> Self {
        let text = text.into();
        let pair_count = canonical_pairs(&text).map_or(0, |p| p.len());
        SemanticDigest { text, pair_count }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn bytes(&self) -> &[u8] {
        self.text.as_bytes()
    }

    /// Number of `(class, grid)` pairs encoded, `min(K, detections present)`.
    pub fn pair_count(&self) -> usize {
        self.pair_count
    }
}

impl fmt::Display for SemanticDigest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl From<String> for SemanticDigest {
    fn from(text: String) -> Self {
        SemanticDigest::from_text(text)
    }
}

impl From<SemanticDigest> for String {
    fn from(d: SemanticDigest) -> String {
        d.text
    }
}

/// Parses digest text as `class:grid` pairs. Returns `Some(vec![])` for the
/// empty-frame marker, `None` for anything outside the canonical grammar.
pub fn canonical_pairs(text: &str) -> Option<Vec<(u64, u64)>> {
    if text == EMPTY_DIGEST {
        return Some(Vec::new());
    }
    let mut pairs = Vec::new();
    for part in text.split('|') {
        let (c, g) = part.split_once(':')?;
        if c.is_empty() || g.is_empty() {
            return None;
        }
        if !c.bytes().all(|b| b.is_ascii_digit()) || !g.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        pairs.push((c.parse().ok()?, g.parse().ok()?));
    }
    Some(pairs)
}

/// Maps a normalized box center to its grid cell index, row-major.
///
/// Centers exactly on the far edge (coordinate 1.0) clamp into the last
/// row/column so the mapping is total on `[0,1]^2`.
pub fn grid_index(cx: f64, cy: f64, grid: &GridSpec) -> Result<u32> {
    if !(0.0..=1.0).contains(&cx) || !(0.0..=1.0).contains(&cy) {
        return Err(Error::InputDomain(format!(
            "center ({cx}, {cy}) outside [0,1]^2"
        )));
    }
    let row = ((cy * grid.rows as f64) as u32).min(grid.rows - 1);
    let col = ((cx * grid.cols as f64) as u32).min(grid.cols - 1);
    Ok(row * grid.cols + col)
}

/// Selects the `k` highest-confidence detections, descending confidence.
///
/// Ties on confidence break toward the lower class id, then the lower grid
/// index; both endpoints must order identically or keys diverge.
pub fn select_top_k(frame: &FrameDetections, k: u32, grid: &GridSpec) -> Result<Vec<Detection>> {
    let mut ranked: Vec<(Detection, u32)> = frame
        .detections
        .iter()
        .map(|d| grid_index(d.cx, d.cy, grid).map(|g| (d.clone(), g)))
        .collect::<Result<_>>()?;
    ranked.sort_by(|(a, ga), (b, gb)| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.class_id.cmp(&b.class_id))
            .then_with(|| ga.cmp(gb))
    });
    ranked.truncate(k as usize);
    Ok(ranked.into_iter().map(|(d, _)| d).collect())
}

/// Runs the full digest pipeline on one frame: select top-K, quantize
/// centers, sort pairs by `(grid, class)`, encode as `class:grid|...`.
/// Independent of input order; an empty frame yields `"EMPTY"`.
pub fn canonical_digest(frame: &FrameDetections, cfg: &SakpConfig) -> Result<SemanticDigest> {
    frame.validate(cfg.num_classes)?;
    let selected = select_top_k(frame, cfg.top_k, &cfg.grid)?;
    let mut pairs: Vec<(u32, u32)> = selected
        .iter()
        .map(|d| grid_index(d.cx, d.cy, &cfg.grid).map(|g| (g, d.class_id)))
        .collect::<Result<_>>()?;
    pairs.sort_unstable();
    if pairs.is_empty() {
        return Ok(SemanticDigest {
            text: EMPTY_DIGEST.to_string(),
            pair_count: 0,
        });
    }
    let text = pairs
        .iter()
        .map(|(g, c)| format!("{c}:{g}"))
        .collect::<Vec<_>>()
        .join("|");
    let pair_count = pairs.len();
    Ok(SemanticDigest { text, pair_count })
}

/// Reads a JSONL detection log: one frame per line,
/// `{"frame": n, "dets": [{"c", "p", "cx", "cy", "w", "h"}]}`.
/// Rejects out-of-range values and non-increasing frame indices.
pub fn read_detection_log(reader: impl BufRead, num_classes: u32) -> Result<Vec<FrameDetections>> {
    let mut frames: Vec<FrameDetections> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: FrameDetections = serde_json::from_str(&line)
            .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 1)))?;
        frame
            .validate(num_classes)
            .map_err(|e| Error::Data(format!("line {}: {e}", lineno + 1)))?;
        if let Some(prev) = frames.last() {
            if frame.frame_index <= prev.frame_index {
                return Err(Error::Data(format!(
                    "line {}: frame index {} not strictly increasing (previous {})",
                    lineno + 1,
                    frame.frame_index,
                    prev.frame_index
                )));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// Writes frames in the JSONL detection-log format accepted by
/// [`read_detection_log`].
pub fn write_detection_log(mut writer: impl Write, frames: &[FrameDetections]) -> Result<()> {
    for frame in frames {
        let line = serde_json::to_string(frame)
            .map_err(|e| Error::Data(format!("serialize frame {}: {e}", frame.frame_index)))?;
        writeln!(writer, "{line}")?;
    }
    Ok(())
}
