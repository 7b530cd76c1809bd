//! Unsupervised phoneme mining for continuous signing captured as pose keypoints.
//!
//! The pipeline runs in stages, each a module:
//!
//! - [`ingest`]: keypoint frames and shoulder-based normalization
//! - [`phonology`]: per-frame orientation sector and location level of each hand
//! - [`segment`]: phoneme boundaries at sign changes of hand acceleration
//! - [`metric`]: weighted edit distance between phonemes and the affinity matrix
//! - [`cluster`]: grouping and DBSCAN clustering, silhouette, 2-D projection
//! - [`seqmatch`]: repeated spans of consecutive phonemes
//! - [`synth`]: scripted synthetic signing with ground truth
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! command-line tool and parallel drivers live in the `phonoclust` crate.
#![no_std]

extern crate alloc;

pub mod cluster;
pub mod ingest;
pub mod metric;
pub mod phonology;
pub mod segment;
pub mod seqmatch;
pub mod synth;

pub use ingest::{Keypoint, KeypointFrame, Point, PoseSequence, Side};
pub use metric::{AffinityMatrix, SimilarityConfig};
pub use phonology::{LocationLevel, Orientation, PhonoFrame, PhonoSymbol};
pub use segment::Phoneme;
