//! Per-frame phonological descriptors: hand orientation sector and location level.
//!
//! Orientation is the direction from the wrist (hand keypoint 0) to the head
//! of the middle-finger metacarpal (hand keypoint 9), measured with the
//! two-argument arctangent in image coordinates and split into eight sectors
//! of π/4 centered on the compass directions. Because image `y` grows
//! downward, sector 0 points right, sector 2 points down, sector 4 points
//! left and sector 6 points up.
//!
//! Location is the body level (eyes, shoulders, hips) of the landmark closest
//! to the hand centroid.

use core::f64::consts::{FRAC_PI_4, FRAC_PI_8, TAU};

use alloc::vec::Vec;

use thiserror::Error;

use crate::ingest::{body, hand, Keypoint, KeypointFrame, Point, PoseSequence, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhonologyError {
    #[error("neither hand is present in the frame")]
    EmptyFrame,
}

/// One of eight orientation sectors; sector `k` is centered on angle `k·π/4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Orientation(u8);

impl Orientation {
    pub const COUNT: usize = 8;

    pub fn new(sector: u8) -> Option<Self> {
        ((sector as usize) < Self::COUNT).then_some(Self(sector))
    }

    pub fn sector(self) -> u8 {
        self.0
    }

    /// Sector containing `angle` (radians, any range).
    pub fn from_angle(angle: f64) -> Self {
        let mut shifted = libm::fmod(angle + FRAC_PI_8, TAU);
        if shifted < 0.0 {
            shifted += TAU;
        }
        let sector = libm::floor(shifted / FRAC_PI_4) as u8;
        // wrapping a tiny negative value can land exactly on TAU
        Self(sector.min(7))
    }

    /// Central angle of the sector.
    pub fn angle(self) -> f64 {
        f64::from(self.0) * FRAC_PI_4
    }

    /// Number of sector steps between `self` and `other` around the circle (0..=4).
    pub fn circular_distance(self, other: Self) -> u8 {
        let diff = self.0.abs_diff(other.0);
        diff.min(Self::COUNT as u8 - diff)
    }
}

/// Vertical body level of a hand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocationLevel {
    Eye = 0,
    Shoulder = 1,
    Abdomen = 2,
}

impl LocationLevel {
    pub const COUNT: usize = 3;
    pub const ALL: [LocationLevel; 3] = [Self::Eye, Self::Shoulder, Self::Abdomen];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }
}

/// A (orientation, location) pair describing one hand in one frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhonoSymbol {
    pub orientation: Orientation,
    pub location: LocationLevel,
}

impl PhonoSymbol {
    /// Size of the full symbol alphabet.
    pub const ALPHABET: usize = Orientation::COUNT * LocationLevel::COUNT;

    pub fn new(orientation: Orientation, location: LocationLevel) -> Self {
        Self {
            orientation,
            location,
        }
    }

    /// Dense index in `0..ALPHABET`.
    pub fn index(self) -> usize {
        self.orientation.0 as usize * LocationLevel::COUNT + self.location as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        if index >= Self::ALPHABET {
            return None;
        }
        let orientation = Orientation((index / LocationLevel::COUNT) as u8);
        let location = LocationLevel::from_index((index % LocationLevel::COUNT) as u8)?;
        Some(Self::new(orientation, location))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct HandState {
    pub centroid: Option<Point>,
    pub orientation: Option<Orientation>,
    pub location: Option<LocationLevel>,
}

impl HandState {
    pub const ABSENT: HandState = HandState {
        centroid: None,
        orientation: None,
        location: None,
    };

    pub fn is_present(&self) -> bool {
        self.centroid.is_some()
    }

    /// The full symbol, when both parameters could be measured.
    pub fn symbol(&self) -> Option<PhonoSymbol> {
        Some(PhonoSymbol::new(self.orientation?, self.location?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhonoFrame {
    pub frame_index: usize,
    pub right: HandState,
    pub left: HandState,
}

impl PhonoFrame {
    pub fn hand(&self, side: Side) -> &HandState {
        match side {
            Side::Right => &self.right,
            Side::Left => &self.left,
        }
    }
}

/// A body keypoint used as a location reference and the level it stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Landmark {
    pub body_index: usize,
    pub level: LocationLevel,
}

/// Location landmarks: eyes, shoulders, mid-hip and hips.
pub const LANDMARKS: [Landmark; 7] = [
    Landmark { body_index: body::RIGHT_EYE, level: LocationLevel::Eye },
    Landmark { body_index: body::LEFT_EYE, level: LocationLevel::Eye },
    Landmark { body_index: body::RIGHT_SHOULDER, level: LocationLevel::Shoulder },
    Landmark { body_index: body::LEFT_SHOULDER, level: LocationLevel::Shoulder },
    Landmark { body_index: body::MID_HIP, level: LocationLevel::Abdomen },
    Landmark { body_index: body::RIGHT_HIP, level: LocationLevel::Abdomen },
    Landmark { body_index: body::LEFT_HIP, level: LocationLevel::Abdomen },
];

/// Landmark-to-centroid distances; rows follow [`LANDMARKS`], columns are
/// right then left hand. `None` marks an entry whose landmark or centroid is
/// missing.
#[derive(Clone, Debug, PartialEq)]
pub struct LocationMatrix {
    entries: [[Option<f64>; 2]; LANDMARKS.len()],
}

impl LocationMatrix {
    fn column(side: Side) -> usize {
        match side {
            Side::Right => 0,
            Side::Left => 1,
        }
    }

    pub fn get(&self, landmark: usize, side: Side) -> Option<f64> {
        self.entries[landmark][Self::column(side)]
    }

    pub fn rows(&self) -> &[[Option<f64>; 2]] {
        &self.entries
    }
}

/// Mean position of the detected keypoints, or `None` when none are detected.
pub fn hand_centroid(points: &[Keypoint]) -> Option<Point> {
    let (sum_x, sum_y, count) = points
        .iter()
        .filter(|kp| kp.is_detected())
        .fold((0.0, 0.0, 0usize), |(sx, sy, n), kp| (sx + kp.x, sy + kp.y, n + 1));
    (count > 0).then(|| Point::new(sum_x / count as f64, sum_y / count as f64))
}

pub fn orientation_of(points: &[Keypoint]) -> Option<Orientation> {
    let wrist = points.get(hand::WRIST)?;
    let knuckle = points.get(hand::MIDDLE_MCP)?;
    if !wrist.is_detected() || !knuckle.is_detected() {
        return None;
    }
    let dx = knuckle.x - wrist.x;
    let dy = knuckle.y - wrist.y;
    if dx == 0.0 && dy == 0.0 {
        return None;
    }
    Some(Orientation::from_angle(libm::atan2(dy, dx)))
}

pub fn location_matrix(
    frame: &KeypointFrame,
    right: Option<Point>,
    left: Option<Point>,
) -> Result<LocationMatrix, PhonologyError> {
    if right.is_none() && left.is_none() {
        return Err(PhonologyError::EmptyFrame);
    }
    let mut entries = [[None; 2]; LANDMARKS.len()];
    for (row, landmark) in entries.iter_mut().zip(LANDMARKS.iter()) {
        let kp = frame.body[landmark.body_index];
        if !kp.is_detected() {
            continue;
        }
        let at = kp.position();
        row[0] = right.map(|c| at.distance(c));
        row[1] = left.map(|c| at.distance(c));
    }
    Ok(LocationMatrix { entries })
}

/// Level of the nearest landmark. Equal distances resolve to the higher level
/// index (Abdomen over Shoulder over Eye).
pub fn location_level(matrix: &LocationMatrix, side: Side) -> Option<LocationLevel> {
    let mut best: Option<(f64, LocationLevel)> = None;
    for (i, landmark) in LANDMARKS.iter().enumerate() {
        let Some(d) = matrix.get(i, side) else {
            continue;
        };
        best = match best {
            Some((bd, bl)) if d > bd || (d == bd && landmark.level <= bl) => Some((bd, bl)),
            _ => Some((d, landmark.level)),
        };
    }
    best.map(|(_, level)| level)
}

/// Describes both hands of one frame.
pub fn phono_frame(frame: &KeypointFrame) -> PhonoFrame {
    let right_c = hand_centroid(&frame.right_hand);
    let left_c = hand_centroid(&frame.left_hand);
    let matrix = location_matrix(frame, right_c, left_c).ok();
    let state = |side: Side, centroid: Option<Point>| match (centroid, &matrix) {
        (Some(c), Some(m)) => HandState {
            centroid: Some(c),
            orientation: orientation_of(frame.hand(side)),
            location: location_level(m, side),
        },
        _ => HandState::ABSENT,
    };
    PhonoFrame {
        frame_index: frame.frame_index,
        right: state(Side::Right, right_c),
        left: state(Side::Left, left_c),
    }
}

pub fn extract_phonology(seq: &PoseSequence) -> Vec<PhonoFrame> {
    seq.frames().iter().map(phono_frame).collect()
}
