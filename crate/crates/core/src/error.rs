//! Error type shared across the codec.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame dimensions {width}x{height}: {reason}")]
    InvalidDimensions {
        width: usize,
        height: usize,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },

    #[error("truncated input: needed {needed} more bytes")]
    Truncated { needed: usize },

    #[error("unsupported container version {got} (expected {expected})")]
    VersionMismatch { got: u16, expected: u16 },

    #[error("trailing bytes after end of stream ({count} bytes)")]
    TrailingBytes { count: usize },

    #[error("coded stream exhausted before all symbols were decoded")]
    StreamExhausted,

    #[error("symbol {symbol} outside alphabet of size {alphabet}")]
    SymbolOutOfRange { symbol: i64, alphabet: usize },

    #[error("malformed stream: {0}")]
    MalformedStream(String),

    #[error("quantization parameter {qp} not in the allowed set")]
    QpNotAllowed { qp: i32 },

    #[error("unsupported feature granularity {side}")]
    UnsupportedGranularity { side: usize },

    #[error("keypoint count mismatch: {a} vs {b}")]
    KeypointCountMismatch { a: usize, b: usize },

    #[error("keypoint track is empty or too short")]
    EmptyTrack,

    #[error("frame index {index} out of range ({len} frames)")]
    FrameIndexOutOfRange { index: usize, len: usize },

    #[error("requested layer {layer} is not present in the stream")]
    LayerAbsent { layer: String },

    #[error("enhancement payload checksum mismatch at frame {frame}, level {level}")]
    ChecksumMismatch { frame: usize, level: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
