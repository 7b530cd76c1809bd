//! Scripted synthetic signing with known ground truth.
//!
//! A script is a list of segments. In each segment the right hand travels in
//! a straight line to a target position over `travel_frames` steps and then
//! holds there for `hold_frames` frames, pointing in the segment's
//! orientation sector. The step sizes along a travel rise by one unit per
//! step up to a single peak and then fall, so the centroid speed has exactly
//! one interior maximum per travel and is zero during holds. The body stays
//! at canonical positions (shoulders at `(-0.5, 0)` and `(0.5, 0)`), and the
//! left hand is not detected.
//!
//! Repeats replay a range of segments at later points of the timeline, which
//! is how verse structure is scripted. Randomness (keypoint jitter, symbol
//! corruption) comes from a ChaCha8 generator seeded by the script, so output
//! is reproducible across platforms.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

use crate::ingest::{body, hand, Keypoint, KeypointFrame, Point, PoseSequence, BODY_POINTS, HAND_POINTS};
use crate::phonology::{LocationLevel, Orientation, PhonoSymbol, LANDMARKS};
use crate::segment::Phoneme;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid script: {0}")]
    InvalidScript(String),
}

fn invalid(msg: impl Into<String>) -> SynthError {
    SynthError::InvalidScript(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScriptSegment {
    pub target: Point,
    pub sector: Orientation,
    pub hold_frames: usize,
    /// Zero only when the hand is already at `target`.
    pub travel_frames: usize,
}

/// Plays `segments` again right before each index in `insert_before`
/// (an index equal to the segment count appends at the end).
#[derive(Clone, Debug, PartialEq)]
pub struct Repeat {
    pub segments: Range<usize>,
    pub insert_before: Vec<usize>,
}

impl Repeat {
    /// Total number of occurrences, the original included.
    pub fn count(&self) -> usize {
        self.insert_before.len() + 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Script {
    pub segments: Vec<ScriptSegment>,
    pub repeats: Vec<Repeat>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Starting hand position; defaults to the first segment's target.
    pub start: Option<Point>,
    pub fps: f64,
}

impl Script {
    pub fn new(segments: Vec<ScriptSegment>) -> Self {
        Self {
            segments,
            repeats: Vec::new(),
            noise_sigma: 0.0,
            seed: 0,
            start: None,
            fps: PoseSequence::DEFAULT_FPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    /// Frames where the speed-sign rule cuts the noiseless trajectory.
    pub true_boundaries: Vec<usize>,
    /// For each repeat, the frame range of every occurrence in timeline order.
    pub verse_spans: Vec<Vec<Range<usize>>>,
    /// Intended right-hand symbol of each frame.
    pub symbols_per_frame: Vec<PhonoSymbol>,
}

/// Canonical BODY_25 positions; lower-body points are left undetected.
pub fn canonical_body() -> [Keypoint; BODY_POINTS] {
    let mut b = [Keypoint::MISSING; BODY_POINTS];
    let mut set = |i: usize, x: f64, y: f64| b[i] = Keypoint::new(x, y, 1.0);
    set(body::NOSE, 0.0, -0.55);
    set(body::NECK, 0.0, 0.0);
    set(body::RIGHT_SHOULDER, -0.5, 0.0);
    set(3, -0.65, 0.75);
    set(4, -0.55, 1.35);
    set(body::LEFT_SHOULDER, 0.5, 0.0);
    set(6, 0.65, 0.75);
    set(7, 0.55, 1.35);
    set(body::MID_HIP, 0.0, 1.6);
    set(body::RIGHT_HIP, -0.3, 1.6);
    set(body::LEFT_HIP, 0.3, 1.6);
    set(body::RIGHT_EYE, -0.12, -0.75);
    set(body::LEFT_EYE, 0.12, -0.75);
    set(17, -0.3, -0.65);
    set(18, 0.3, -0.65);
    b
}

/// Level of the canonical landmark nearest to `at` (ties go to the higher level index).
pub fn canonical_level(at: Point) -> LocationLevel {
    let body = canonical_body();
    let mut best = (f64::INFINITY, LocationLevel::Eye);
    for l in LANDMARKS {
        let d = body[l.body_index].position().distance(at);
        if d < best.0 || (d == best.0 && l.level > best.1) {
            best = (d, l.level);
        }
    }
    best.1
}

/// Hand keypoints with centroid `at`, wrist-to-knuckle pointing along `sector`.
fn hand_pose(at: Point, sector: Orientation) -> [Keypoint; HAND_POINTS] {
    // local frame: u along the hand, v across it
    let mut local = [(0.0f64, 0.0f64); HAND_POINTS];
    local[hand::WRIST] = (-0.08, 0.0);
    for (finger, across) in [-0.03, -0.01, 0.01, 0.03].into_iter().enumerate() {
        let base = 5 + 4 * finger;
        for joint in 0..4 {
            local[base + joint] = (0.02 + 0.025 * joint as f64, across);
        }
    }
    for (joint, slot) in local[1..5].iter_mut().enumerate() {
        *slot = (-0.05 + 0.02 * joint as f64, -0.04 - 0.01 * joint as f64);
    }
    let angle = sector.angle();
    let (sin, cos) = (libm::sin(angle), libm::cos(angle));
    let mut rotated = local.map(|(a, b)| (a * cos - b * sin, a * sin + b * cos));
    let n = HAND_POINTS as f64;
    let mean_x = rotated.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = rotated.iter().map(|p| p.1).sum::<f64>() / n;
    for p in rotated.iter_mut() {
        p.0 -= mean_x;
        p.1 -= mean_y;
    }
    rotated.map(|(dx, dy)| Keypoint::new(at.x + dx, at.y + dy, 1.0))
}

/// Relative step sizes of a travel: rising by one to a single peak, then falling.
fn step_profile(len: usize) -> (Vec<f64>, usize) {
    let peak = (len - 1) / 2;
    let steps = (0..len)
        .map(|k| {
            if k <= peak {
                (k + 1) as f64
            } else {
                (len - k) as f64 - 0.5
            }
        })
        .collect();
    (steps, peak)
}

struct Timeline {
    segments: Vec<ScriptSegment>,
    /// Expanded-segment ranges of each occurrence, per repeat.
    occurrences: Vec<Vec<Range<usize>>>,
}

fn expand(script: &Script) -> Result<Timeline, SynthError> {
    let n = script.segments.len();
    for (k, r) in script.repeats.iter().enumerate() {
        if r.segments.start >= r.segments.end || r.segments.end > n {
            return Err(invalid(alloc::format!("repeat {k} has an empty or out-of-range segment range")));
        }
        for other in &script.repeats[..k] {
            if r.segments.start < other.segments.end && other.segments.start < r.segments.end {
                return Err(invalid(alloc::format!("repeat {k} overlaps an earlier repeat")));
            }
        }
    }
    for (k, r) in script.repeats.iter().enumerate() {
        for &p in &r.insert_before {
            if p > n {
                return Err(invalid(alloc::format!("repeat {k} inserts past the end")));
            }
            if script.repeats.iter().any(|o| o.segments.start < p && p < o.segments.end) {
                return Err(invalid(alloc::format!("repeat {k} inserts inside a repeated range")));
            }
        }
    }

    let mut segments = Vec::new();
    let mut occurrences: Vec<Vec<(usize, Range<usize>)>> = script.repeats.iter().map(|_| Vec::new()).collect();
    let mut originals: Vec<Option<usize>> = script.repeats.iter().map(|_| None).collect();
    for p in 0..=n {
        for (k, r) in script.repeats.iter().enumerate() {
            for _ in r.insert_before.iter().filter(|&&q| q == p) {
                let start = segments.len();
                segments.extend_from_slice(&script.segments[r.segments.clone()]);
                occurrences[k].push((start, start..segments.len()));
            }
        }
        if p == n {
            break;
        }
        for (k, r) in script.repeats.iter().enumerate() {
            if r.segments.start == p {
                originals[k] = Some(segments.len());
            }
        }
        segments.push(script.segments[p]);
        for (k, r) in script.repeats.iter().enumerate() {
            if r.segments.end == p + 1 {
                let start = originals[k].expect("range start precedes its end");
                occurrences[k].push((start, start..segments.len()));
            }
        }
    }
    let occurrences = occurrences
        .into_iter()
        .map(|mut occ| {
            occ.sort_by_key(|(start, _)| *start);
            occ.into_iter().map(|(_, r)| r).collect()
        })
        .collect();
    Ok(Timeline { segments, occurrences })
}

fn validate(script: &Script) -> Result<(), SynthError> {
    if script.segments.is_empty() {
        return Err(invalid("no segments"));
    }
    if !(script.noise_sigma >= 0.0 && script.noise_sigma.is_finite()) {
        return Err(invalid("noise_sigma must be a finite non-negative number"));
    }
    if !(script.fps > 0.0 && script.fps.is_finite()) {
        return Err(invalid("fps must be positive"));
    }
    for (k, s) in script.segments.iter().enumerate() {
        if s.hold_frames == 0 {
            return Err(invalid(alloc::format!("segment {k} needs at least one hold frame")));
        }
        if !(s.target.x.is_finite() && s.target.y.is_finite()) {
            return Err(invalid(alloc::format!("segment {k} has a non-finite target")));
        }
    }
    Ok(())
}

/// Renders the script into keypoint frames and the matching ground truth.
pub fn generate(script: &Script) -> Result<(PoseSequence, GroundTruth), SynthError> {
    validate(script)?;
    let timeline = expand(script)?;
    let mut position = script.start.unwrap_or(timeline.segments[0].target);
    let mut sector = timeline.segments[0].sector;

    // noiseless right-hand track: (centroid, sector) per frame
    let mut track = alloc::vec![(position, sector)];
    let mut boundaries = Vec::new();
    let mut segment_starts = Vec::with_capacity(timeline.segments.len() + 1);
    for (k, seg) in timeline.segments.iter().enumerate() {
        // speed index of the first step equals the frame count so far minus one
        let base = track.len() - 1;
        segment_starts.push(base);
        let dx = seg.target.x - position.x;
        let dy = seg.target.y - position.y;
        let distance = libm::hypot(dx, dy);
        if seg.travel_frames == 0 {
            if distance != 0.0 {
                return Err(invalid(alloc::format!(
                    "segment {k} of the expanded timeline moves without travel frames"
                )));
            }
        } else {
            if distance < 1e-6 {
                return Err(invalid(alloc::format!(
                    "segment {k} of the expanded timeline travels a zero distance"
                )));
            }
            sector = seg.sector;
            let (steps, peak) = step_profile(seg.travel_frames);
            let total: f64 = steps.iter().sum();
            let mut covered = 0.0;
            for step in &steps[..steps.len() - 1] {
                covered += step;
                let f = covered / total;
                track.push((Point::new(position.x + dx * f, position.y + dy * f), sector));
            }
            track.push((seg.target, sector));
            let len = seg.travel_frames;
            if base >= 2 {
                boundaries.push(base);
            }
            if base + peak >= 1 {
                boundaries.push(base + peak + 1);
            }
            boundaries.push(base + len + 1);
        }
        sector = seg.sector;
        position = seg.target;
        for _ in 0..seg.hold_frames {
            track.push((position, sector));
        }
    }
    segment_starts.push(track.len() - 1);
    // a travel ending one hold frame before the end has no derivative after it
    let speeds = track.len() - 1;
    boundaries.retain(|&b| b < speeds);
    boundaries.sort_unstable();
    boundaries.dedup();

    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let noise = (script.noise_sigma > 0.0)
        .then(|| Normal::new(0.0, script.noise_sigma).expect("sigma validated"));
    let frames = track
        .iter()
        .enumerate()
        .map(|(i, &(at, s))| {
            let mut frame = KeypointFrame::empty(i);
            frame.body = canonical_body();
            frame.right_hand = hand_pose(at, s);
            if let Some(normal) = &noise {
                for kp in frame.body.iter_mut().chain(frame.right_hand.iter_mut()) {
                    if kp.is_detected() {
                        kp.x += normal.sample(&mut rng);
                        kp.y += normal.sample(&mut rng);
                    }
                }
            }
            frame
        })
        .collect();
    let sequence = PoseSequence::new(frames, script.fps, "synthetic").map_err(|e| invalid(alloc::format!("{e}")))?;

    let symbols_per_frame = track
        .iter()
        .map(|&(at, s)| PhonoSymbol::new(s, canonical_level(at)))
        .collect();
    let verse_spans = timeline
        .occurrences
        .iter()
        .map(|occ| {
            occ.iter()
                .map(|r| segment_starts[r.start]..segment_starts[r.end])
                .collect()
        })
        .collect();
    Ok((
        sequence,
        GroundTruth {
            true_boundaries: boundaries,
            verse_spans,
            symbols_per_frame,
        },
    ))
}

/// Replaces each symbol, with probability `rate`, by a uniformly drawn different symbol.
pub fn corrupt_symbols(phonemes: &mut [Phoneme], rate: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in phonemes.iter_mut() {
        for s in p.symbols_mut() {
            if rng.random::<f64>() < rate {
                let other = rng.random_range(0..PhonoSymbol::ALPHABET - 1);
                let index = if other >= s.index() { other + 1 } else { other };
                *s = PhonoSymbol::from_index(index).expect("index in alphabet");
            }
        }
    }
}
