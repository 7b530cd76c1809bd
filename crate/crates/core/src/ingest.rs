//! Typed keypoint frames and signer-geometry normalization.
//!
//! Frames follow the OpenPose layout: 25 body points (BODY_25) and 21 points
//! per hand, all in 2-D image coordinates with `y` growing downward. A point
//! that was not detected is stored as `(0, 0, 0)` and never takes part in
//! geometric computations.
//!
//! Normalization scales every frame uniformly so that the shoulder distance
//! becomes a fixed target and translates it so the mid-shoulder point lands
//! on a target center. Parameters are computed per frame; frames whose
//! shoulders are unusable borrow the parameters of the most recent frame that
//! had usable shoulders.

use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Number of body keypoints in the BODY_25 layout.
pub const BODY_POINTS: usize = 25;
/// Number of keypoints per hand.
pub const HAND_POINTS: usize = 21;

/// BODY_25 indices used by the pipeline.
pub mod body {
    pub const NOSE: usize = 0;
    pub const NECK: usize = 1;
    pub const RIGHT_SHOULDER: usize = 2;
    pub const LEFT_SHOULDER: usize = 5;
    pub const MID_HIP: usize = 8;
    pub const RIGHT_HIP: usize = 9;
    pub const LEFT_HIP: usize = 12;
    pub const RIGHT_EYE: usize = 15;
    pub const LEFT_EYE: usize = 16;
}

/// Hand keypoint indices used by the pipeline.
pub mod hand {
    pub const WRIST: usize = 0;
    /// Head of the middle-finger metacarpal.
    pub const MIDDLE_MCP: usize = 9;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("shoulders are undetected or coincident")]
    DegenerateShoulders,
    #[error("no frame in the sequence has usable shoulders")]
    NoValidFrame,
    #[error("pose sequence has no frames")]
    EmptySequence,
    #[error("frame rate must be positive and finite, got {0}")]
    InvalidFps(f64),
    #[error("frame {position} has index {found}, expected {expected}")]
    NonContiguousFrames {
        position: usize,
        expected: usize,
        found: usize,
    },
    #[error("frame {frame}: keypoint confidence {confidence} outside [0, 1]")]
    InvalidConfidence { frame: usize, confidence: f64 },
    #[error("normalization target must have a positive shoulder distance")]
    InvalidTarget,
}

/// Which hand of the signer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Right,
    Left,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Right, Side::Left];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Right => "right",
            Side::Left => "left",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

impl Keypoint {
    pub const MISSING: Keypoint = Keypoint {
        x: 0.0,
        y: 0.0,
        confidence: 0.0,
    };

    /// Builds a keypoint; a zero confidence collapses the point to `(0, 0, 0)`.
    pub fn new(x: f64, y: f64, confidence: f64) -> Self {
        if confidence > 0.0 {
            Self { x, y, confidence }
        } else {
            Self::MISSING
        }
    }

    pub fn is_detected(&self) -> bool {
        self.confidence > 0.0
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeypointFrame {
    pub frame_index: usize,
    pub body: [Keypoint; BODY_POINTS],
    pub left_hand: [Keypoint; HAND_POINTS],
    pub right_hand: [Keypoint; HAND_POINTS],
}

impl KeypointFrame {
    /// A frame in which nothing was detected.
    pub fn empty(frame_index: usize) -> Self {
        Self {
            frame_index,
            body: [Keypoint::MISSING; BODY_POINTS],
            left_hand: [Keypoint::MISSING; HAND_POINTS],
            right_hand: [Keypoint::MISSING; HAND_POINTS],
        }
    }

    pub fn hand(&self, side: Side) -> &[Keypoint; HAND_POINTS] {
        match side {
            Side::Right => &self.right_hand,
            Side::Left => &self.left_hand,
        }
    }

    pub fn hand_mut(&mut self, side: Side) -> &mut [Keypoint; HAND_POINTS] {
        match side {
            Side::Right => &mut self.right_hand,
            Side::Left => &mut self.left_hand,
        }
    }

    /// Body, left hand and right hand keypoints in that order.
    pub fn keypoints(&self) -> impl Iterator<Item = &Keypoint> {
        self.body
            .iter()
            .chain(self.left_hand.iter())
            .chain(self.right_hand.iter())
    }

    fn keypoints_mut(&mut self) -> impl Iterator<Item = &mut Keypoint> {
        self.body
            .iter_mut()
            .chain(self.left_hand.iter_mut())
            .chain(self.right_hand.iter_mut())
    }

    /// Shoulder distance, if both shoulders are detected.
    pub fn shoulder_distance(&self) -> Option<f64> {
        let right = self.body[body::RIGHT_SHOULDER];
        let left = self.body[body::LEFT_SHOULDER];
        (right.is_detected() && left.is_detected())
            .then(|| right.position().distance(left.position()))
    }
}

/// Canonical frame of reference that normalization maps every signer onto.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationTarget {
    pub shoulder_distance: f64,
    pub center: Point,
}

impl Default for NormalizationTarget {
    fn default() -> Self {
        Self {
            shoulder_distance: 1.0,
            center: Point::ORIGIN,
        }
    }
}

/// Uniform scale followed by translation: `(x, y) -> (x * r_x + t_x, y * r_y + t_y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizationParams {
    pub scale_x: f64,
    pub scale_y: f64,
    pub shift_x: f64,
    pub shift_y: f64,
    pub target_shoulder_distance: f64,
    pub target_center: Point,
}

impl NormalizationParams {
    pub fn apply_keypoint(&self, kp: Keypoint) -> Keypoint {
        if !kp.is_detected() {
            return Keypoint::MISSING;
        }
        Keypoint {
            x: kp.x * self.scale_x + self.shift_x,
            y: kp.y * self.scale_y + self.shift_y,
            confidence: kp.confidence,
        }
    }

    pub fn apply(&self, frame: &KeypointFrame) -> KeypointFrame {
        let mut out = frame.clone();
        for kp in out.keypoints_mut() {
            *kp = self.apply_keypoint(*kp);
        }
        out
    }
}

/// Derives the parameters that map this frame's shoulders onto `target`.
pub fn compute_normalization(
    frame: &KeypointFrame,
    target: NormalizationTarget,
) -> Result<NormalizationParams, IngestError> {
    if !(target.shoulder_distance > 0.0 && target.shoulder_distance.is_finite()) {
        return Err(IngestError::InvalidTarget);
    }
    let right = frame.body[body::RIGHT_SHOULDER];
    let left = frame.body[body::LEFT_SHOULDER];
    let measured = frame
        .shoulder_distance()
        .ok_or(IngestError::DegenerateShoulders)?;
    if !(measured > 0.0 && measured.is_finite()) {
        return Err(IngestError::DegenerateShoulders);
    }
    let scale = target.shoulder_distance / measured;
    let mid_x = (right.x + left.x) / 2.0;
    let mid_y = (right.y + left.y) / 2.0;
    Ok(NormalizationParams {
        scale_x: scale,
        scale_y: scale,
        shift_x: target.center.x - mid_x * scale,
        shift_y: target.center.y - mid_y * scale,
        target_shoulder_distance: target.shoulder_distance,
        target_center: target.center,
    })
}

/// An ordered, contiguous run of frames from one video.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseSequence {
    frames: Vec<KeypointFrame>,
    fps: f64,
    source_id: String,
}

impl PoseSequence {
    pub const DEFAULT_FPS: f64 = 25.0;

    pub fn new(
        frames: Vec<KeypointFrame>,
        fps: f64,
        source_id: impl Into<String>,
    ) -> Result<Self, IngestError> {
        if frames.is_empty() {
            return Err(IngestError::EmptySequence);
        }
        if !(fps > 0.0 && fps.is_finite()) {
            return Err(IngestError::InvalidFps(fps));
        }
        let first = frames[0].frame_index;
        for (position, frame) in frames.iter().enumerate() {
            let expected = first + position;
            if frame.frame_index != expected {
                return Err(IngestError::NonContiguousFrames {
                    position,
                    expected,
                    found: frame.frame_index,
                });
            }
            if let Some(kp) = frame
                .keypoints()
                .find(|kp| !(0.0..=1.0).contains(&kp.confidence))
            {
                return Err(IngestError::InvalidConfidence {
                    frame: frame.frame_index,
                    confidence: kp.confidence,
                });
            }
        }
        Ok(Self {
            frames,
            fps,
            source_id: source_id.into(),
        })
    }

    pub fn frames(&self) -> &[KeypointFrame] {
        &self.frames
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn source_id(&self) -> &str {
        &self.source_id
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn into_frames(self) -> Vec<KeypointFrame> {
        self.frames
    }
}

/// Normalizes every frame of `seq`.
///
/// Frames without usable shoulders reuse the parameters of the most recent
/// frame that had them; frames before the first usable one take the first
/// usable frame's parameters.
pub fn normalize_sequence(
    seq: &PoseSequence,
    target: NormalizationTarget,
) -> Result<PoseSequence, IngestError> {
    let per_frame: Vec<Option<NormalizationParams>> = seq
        .frames
        .iter()
        .map(|f| match compute_normalization(f, target) {
            Ok(p) => Ok(Some(p)),
            Err(IngestError::DegenerateShoulders) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_, _>>()?;
    let mut current = per_frame
        .iter()
        .flatten()
        .copied()
        .next()
        .ok_or(IngestError::NoValidFrame)?;
    let frames = seq
        .frames
        .iter()
        .zip(&per_frame)
        .map(|(frame, params)| {
            if let Some(p) = params {
                current = *p;
            }
            current.apply(frame)
        })
        .collect();
    Ok(PoseSequence {
        frames,
        fps: seq.fps,
        source_id: seq.source_id.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn frame_with_shoulders(index: usize, right: (f64, f64), left: (f64, f64)) -> KeypointFrame {
        let mut f = KeypointFrame::empty(index);
        f.body[body::RIGHT_SHOULDER] = Keypoint::new(right.0, right.1, 0.9);
        f.body[body::LEFT_SHOULDER] = Keypoint::new(left.0, left.1, 0.8);
        f
    }

    #[test]
    fn identity_params_when_already_canonical_size() {
        let f = frame_with_shoulders(0, (100.0, 100.0), (200.0, 100.0));
        let target = NormalizationTarget {
            shoulder_distance: 100.0,
            center: Point::new(150.0, 100.0),
        };
        let p = compute_normalization(&f, target).unwrap();
        assert_eq!((p.scale_x, p.scale_y), (1.0, 1.0));
        assert_eq!((p.shift_x, p.shift_y), (0.0, 0.0));
    }

    #[test]
    fn doubling_scale_and_shift() {
        let f = frame_with_shoulders(0, (0.0, 0.0), (50.0, 0.0));
        let target = NormalizationTarget {
            shoulder_distance: 100.0,
            center: Point::ORIGIN,
        };
        let p = compute_normalization(&f, target).unwrap();
        assert_eq!((p.scale_x, p.scale_y), (2.0, 2.0));
        assert_eq!((p.shift_x, p.shift_y), (-50.0, 0.0));
        // applying the params must yield the target geometry
        let g = p.apply(&f);
        assert!((g.shoulder_distance().unwrap() - 100.0).abs() < 1e-9);
        let r = g.body[body::RIGHT_SHOULDER];
        let l = g.body[body::LEFT_SHOULDER];
        assert!(((r.x + l.x) / 2.0).abs() < 1e-9);
        assert!(((r.y + l.y) / 2.0).abs() < 1e-9);
    }

    #[test]
    fn undetected_shoulders_are_degenerate() {
        let f = KeypointFrame::empty(0);
        assert_eq!(
            compute_normalization(&f, NormalizationTarget::default()),
            Err(IngestError::DegenerateShoulders)
        );
        let f = frame_with_shoulders(0, (5.0, 5.0), (5.0, 5.0));
        assert_eq!(
            compute_normalization(&f, NormalizationTarget::default()),
            Err(IngestError::DegenerateShoulders)
        );
    }

    #[test]
    fn missing_points_stay_missing() {
        let f = frame_with_shoulders(0, (0.0, 0.0), (50.0, 0.0));
        let p = compute_normalization(&f, NormalizationTarget::default()).unwrap();
        let g = p.apply(&f);
        assert_eq!(g.body[body::NOSE], Keypoint::MISSING);
        assert_eq!(g.right_hand, [Keypoint::MISSING; HAND_POINTS]);
        assert_eq!(g.body[body::RIGHT_SHOULDER].confidence, 0.9);
    }

    #[test]
    fn carry_forward_for_undetected_shoulders() {
        let a = frame_with_shoulders(0, (0.0, 0.0), (50.0, 0.0));
        let mut b = KeypointFrame::empty(1);
        b.right_hand[0] = Keypoint::new(25.0, 10.0, 1.0);
        let seq = PoseSequence::new(vec![a.clone(), b], 25.0, "t").unwrap();
        let out = normalize_sequence(&seq, NormalizationTarget::default()).unwrap();
        let p = compute_normalization(&a, NormalizationTarget::default()).unwrap();
        let expected = p.apply_keypoint(Keypoint::new(25.0, 10.0, 1.0));
        assert_eq!(out.frames()[1].right_hand[0], expected);
    }

    #[test]
    fn leading_invalid_frames_use_first_valid_params() {
        let mut a = KeypointFrame::empty(0);
        a.right_hand[0] = Keypoint::new(10.0, 0.0, 1.0);
        let b = frame_with_shoulders(1, (0.0, 0.0), (10.0, 0.0));
        let seq = PoseSequence::new(vec![a, b], 25.0, "t").unwrap();
        let out = normalize_sequence(&seq, NormalizationTarget::default()).unwrap();
        let kp = out.frames()[0].right_hand[0];
        assert!((kp.x - 0.5).abs() < 1e-12 && kp.y.abs() < 1e-12);
    }

    #[test]
    fn no_valid_frame_is_an_error() {
        let seq = PoseSequence::new(vec![KeypointFrame::empty(0)], 25.0, "t").unwrap();
        assert_eq!(
            normalize_sequence(&seq, NormalizationTarget::default()),
            Err(IngestError::NoValidFrame)
        );
    }

    #[test]
    fn sequence_validation() {
        assert_eq!(
            PoseSequence::new(vec![], 25.0, "t"),
            Err(IngestError::EmptySequence)
        );
        assert_eq!(
            PoseSequence::new(vec![KeypointFrame::empty(0)], 0.0, "t"),
            Err(IngestError::InvalidFps(0.0))
        );
        let err = PoseSequence::new(
            vec![KeypointFrame::empty(3), KeypointFrame::empty(5)],
            25.0,
            "t",
        );
        assert!(matches!(err, Err(IngestError::NonContiguousFrames { .. })));
        let mut f = KeypointFrame::empty(0);
        f.body[0].confidence = 1.5;
        assert!(matches!(
            PoseSequence::new(vec![f], 25.0, "t"),
            Err(IngestError::InvalidConfidence { .. })
        ));
    }

    #[test]
    fn zero_confidence_collapses_point() {
        assert_eq!(Keypoint::new(3.0, 4.0, 0.0), Keypoint::MISSING);
    }
}
