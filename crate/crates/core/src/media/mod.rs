//! Frame/video data model, raw-file I/O, synthetic sequence generation and
//! the shared resampling/warping primitives.

mod frame;
mod io;
pub(crate) mod sampling;
mod synth;

pub use frame::{Frame, MotionField, OcclusionMap, VideoSequence};
pub use io::{read_raw_video, write_raw_video, PGRV_HEADER_LEN, PGRV_MAGIC};
pub use sampling::{downsample_band_limited, upsample_bilinear, upsample_bilinear_grid, warp_bilinear};
pub use synth::{generate_synthetic_sequence, MotionMode, SyntheticSpec};
