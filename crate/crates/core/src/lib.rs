//! Non-linear character segmentation of cursive handwritten words.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`imgproc`]: Otsu binarization, shear-search slant correction and
//!    Zhang–Suen thinning.
//! 2. [`segmenter`]: uniform over-segmentation, rejection of cuts that cross
//!    loops, width-based merging into character boundaries and core-zone
//!    detection.
//! 3. [`neural`]: an MLP and an RBF network, averaged into an ensemble that
//!    votes each surviving cut valid or invalid from its [`features`].
//! 4. [`pathtrace`]: a minimum-cost, row-by-row path from each validated cut
//!    that steers around ink, followed by per-character extraction.
//!
//! [`corpus`] holds the dataset model, a synthetic word generator and the
//! segmentation-rate evaluation; [`pipeline`] composes the stages for one
//! word.

pub mod corpus;
pub mod error;
pub mod features;
pub mod imgproc;
pub mod neural;
pub mod pathtrace;
pub mod pipeline;
pub mod segmenter;

pub use error::{Error, Result};
