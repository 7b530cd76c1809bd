//! OpenPose per-frame JSON exports.
//!
//! Each file holds `people[]`, and each person carries flat `[x, y, c, ...]`
//! arrays for the BODY_25 skeleton and both hands. Only the first person is
//! used. Missing arrays yield undetected keypoints.

use std::path::{Path, PathBuf};

use phonoclust_core::ingest::{BODY_POINTS, HAND_POINTS};
use phonoclust_core::{Keypoint, KeypointFrame};
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::error::DataError;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed JSON: {0}")]
    MalformedJson(#[from] serde_json::Error),
    #[error("no person detected")]
    NoPersonDetected,
    #[error("{field} has {found} values, expected {expected}")]
    BadLength {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{field} contains a non-finite value")]
    NonFinite { field: &'static str },
}

#[derive(Deserialize)]
struct Document {
    people: Vec<Person>,
}

#[derive(Deserialize)]
struct Person {
    #[serde(default)]
    pose_keypoints_2d: Vec<f64>,
    #[serde(default)]
    hand_left_keypoints_2d: Vec<f64>,
    #[serde(default)]
    hand_right_keypoints_2d: Vec<f64>,
}

fn triples<const N: usize>(field: &'static str, flat: &[f64]) -> Result<[Keypoint; N], ParseError> {
    let mut out = [Keypoint::MISSING; N];
    if flat.is_empty() {
        return Ok(out);
    }
    if flat.len() != 3 * N {
        return Err(ParseError::BadLength {
            field,
            expected: 3 * N,
            found: flat.len(),
        });
    }
    if flat.iter().any(|v| !v.is_finite()) {
        return Err(ParseError::NonFinite { field });
    }
    for (slot, t) in out.iter_mut().zip(flat.chunks_exact(3)) {
        *slot = Keypoint::new(t[0], t[1], t[2]);
    }
    Ok(out)
}

/// Reads the first detected person of one OpenPose frame document.
pub fn parse_keypoint_file(bytes: &[u8], frame_index: usize) -> Result<KeypointFrame, ParseError> {
    let doc: Document = serde_json::from_slice(bytes)?;
    let person = doc.people.first().ok_or(ParseError::NoPersonDetected)?;
    Ok(KeypointFrame {
        frame_index,
        body: triples::<BODY_POINTS>("pose_keypoints_2d", &person.pose_keypoints_2d)?,
        left_hand: triples::<HAND_POINTS>("hand_left_keypoints_2d", &person.hand_left_keypoints_2d)?,
        right_hand: triples::<HAND_POINTS>("hand_right_keypoints_2d", &person.hand_right_keypoints_2d)?,
    })
}

/// Splits `<prefix>_<12 digits>_keypoints.json` into prefix and frame number.
pub fn split_frame_file_name(name: &str) -> Option<(&str, usize)> {
    let stem = name.strip_suffix("_keypoints.json")?;
    let (prefix, digits) = stem.rsplit_once('_')?;
    if digits.len() != 12 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Some((prefix, digits.parse().ok()?))
}

/// Frames loaded from an export directory.
#[derive(Debug)]
pub struct DirectoryLoad {
    pub prefix: String,
    /// Contiguous from the lowest file number to the highest.
    pub frames: Vec<KeypointFrame>,
    /// Frame numbers with no file on disk.
    pub missing_files: Vec<usize>,
    /// Frame numbers whose file lists no person.
    pub empty_frames: Vec<usize>,
}

/// Loads every frame file of one video, parsing in parallel.
///
/// Gaps and person-less frames become all-zero frames so indices stay aligned
/// with the source video.
pub fn load_directory(dir: &Path) -> Result<DirectoryLoad, DataError> {
    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    let mut prefix: Option<String> = None;
    let entries = std::fs::read_dir(dir).map_err(|e| DataError::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| DataError::io(dir, e))?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        let Some((p, index)) = split_frame_file_name(name) else {
            continue;
        };
        match &prefix {
            None => prefix = Some(p.to_owned()),
            Some(existing) if existing != p => {
                return Err(DataError::new(
                    dir,
                    format!("mixed file prefixes {existing:?} and {p:?}"),
                ));
            }
            Some(_) => {}
        }
        files.push((index, path));
    }
    let prefix = prefix.ok_or_else(|| DataError::new(dir, "no *_keypoints.json files"))?;
    files.sort_unstable();

    let parsed: Vec<(usize, Option<KeypointFrame>)> = files
        .par_iter()
        .map(|(index, path)| {
            let bytes = std::fs::read(path).map_err(|e| DataError::io(path, e))?;
            match parse_keypoint_file(&bytes, *index) {
                Ok(frame) => Ok((*index, Some(frame))),
                Err(ParseError::NoPersonDetected) => Ok((*index, None)),
                Err(ParseError::MalformedJson(e)) => Err(DataError::json(path, e)),
                Err(e) => Err(DataError::new(path, e)),
            }
        })
        .collect::<Result<_, _>>()?;

    let first = parsed[0].0;
    let last = parsed[parsed.len() - 1].0;
    let mut frames = Vec::with_capacity(last - first + 1);
    let mut missing_files = Vec::new();
    let mut empty_frames = Vec::new();
    let mut next = parsed.into_iter().peekable();
    for index in first..=last {
        match next.next_if(|(i, _)| *i == index) {
            Some((_, Some(frame))) => frames.push(frame),
            Some((_, None)) => {
                empty_frames.push(index);
                frames.push(KeypointFrame::empty(index));
            }
            None => {
                missing_files.push(index);
                frames.push(KeypointFrame::empty(index));
            }
        }
    }
    Ok(DirectoryLoad {
        prefix,
        frames,
        missing_files,
        empty_frames,
    })
}
