//! File formats, OpenPose loading, parallel drivers and the command-line
//! front end for `phonoclust-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod openpose;
pub mod parallel;

pub use error::DataError;
