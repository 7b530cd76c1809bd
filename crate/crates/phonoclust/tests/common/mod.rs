//! Fixture builders shared by the integration targets.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

use phonoclust_core::phonology::{extract_phonology, LocationLevel};
use phonoclust_core::segment::{segment_hand, SegmentConfig};
use phonoclust_core::synth::{canonical_level, generate, Repeat, Script, ScriptSegment};
use phonoclust_core::{KeypointFrame, Orientation, PhonoSymbol, Phoneme, Point, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym(sector: u8, level: u8) -> PhonoSymbol {
    PhonoSymbol::new(Orientation::new(sector).unwrap(), LocationLevel::from_index(level).unwrap())
}

pub fn random_symbol(r: &mut impl Rng) -> PhonoSymbol {
    PhonoSymbol::from_index(r.random_range(0..PhonoSymbol::ALPHABET)).unwrap()
}

pub fn random_phoneme(r: &mut impl Rng, start: usize, len: usize) -> Phoneme {
    let symbols = (0..len).map(|_| random_symbol(r)).collect();
    Phoneme::new(Side::Right, start, start + len, symbols).unwrap()
}

fn random_target(r: &mut impl Rng, avoid: Point) -> Point {
    loop {
        let p = Point::new(r.random_range(-0.6..0.6), r.random_range(-0.9..1.5));
        if p.distance(avoid) > 0.1 {
            return p;
        }
    }
}

/// Random travel-and-hold segments.
pub fn random_segments(
    r: &mut impl Rng,
    count: usize,
    from: Point,
    holds: std::ops::Range<usize>,
    travels: std::ops::Range<usize>,
) -> Vec<ScriptSegment> {
    let mut at = from;
    (0..count)
        .map(|_| {
            at = random_target(r, at);
            ScriptSegment {
                target: at,
                sector: Orientation::new(r.random_range(0..8)).unwrap(),
                hold_frames: r.random_range(holds.clone()),
                travel_frames: r.random_range(travels.clone()),
            }
        })
        .collect()
}

pub fn random_script(seed: u64, count: usize) -> Script {
    let mut r = rng(seed);
    let mut segments = vec![ScriptSegment {
        target: Point::new(0.0, 1.2),
        sector: Orientation::new(2).unwrap(),
        hold_frames: 4,
        travel_frames: 0,
    }];
    segments.extend(random_segments(&mut r, count, Point::new(0.0, 1.2), 1..7, 1..10));
    let mut script = Script::new(segments);
    script.seed = seed;
    script
}

/// Right-hand phonemes of a generated script.
pub fn phonemes_of(script: &Script, cfg: SegmentConfig) -> Vec<Phoneme> {
    let (seq, _) = generate(script).unwrap();
    let frames = extract_phonology(&seq);
    segment_hand(&frames, Side::Right, cfg).unwrap().phonemes
}

/// A hold at a fixed symbol, used to fence off verse occurrences.
fn fence(sector: u8, target: Point) -> ScriptSegment {
    ScriptSegment {
        target,
        sector: Orientation::new(sector).unwrap(),
        hold_frames: 6,
        travel_frames: 6,
    }
}

/// A verse of `verse_len` segments played three times inside random filler,
/// about `frames` frames long in total. The phonemes right before and after
/// each occurrence are pairwise dissimilar holds, so a repeat can be
/// recovered without bleeding into the surrounding material.
pub fn planted_verse_script(seed: u64, verse_len: usize, frames: usize) -> Script {
    let mut r = rng(seed);
    let eye = Point::new(0.0, -0.75);
    let shoulder = Point::new(-0.5, 0.05);
    let abdomen = Point::new(0.0, 1.4);
    assert_eq!(canonical_level(eye), LocationLevel::Eye);
    assert_eq!(canonical_level(shoulder), LocationLevel::Shoulder);
    assert_eq!(canonical_level(abdomen), LocationLevel::Abdomen);
    let (a, b, c) = (fence(0, eye), fence(3, shoulder), fence(6, abdomen));

    // about 11.5 frames per random segment
    let filler_segments = (frames.saturating_sub(3 * verse_len * 12)) / 12;
    let part = filler_segments / 4;
    let mut segments = Vec::new();
    segments.push(ScriptSegment {
        target: Point::new(0.0, 1.2),
        sector: Orientation::new(2).unwrap(),
        hold_frames: 4,
        travel_frames: 0,
    });
    let mut extend_random = |segments: &mut Vec<ScriptSegment>, n: usize| {
        let from = segments.last().map(|s: &ScriptSegment| s.target).unwrap();
        segments.extend(random_segments(&mut r, n, from, 4..8, 5..9));
    };
    extend_random(&mut segments, part);
    segments.push(a);
    let verse_start = segments.len();
    extend_random(&mut segments, verse_len);
    let verse_end = segments.len();
    segments.push(b);
    extend_random(&mut segments, part);
    segments.push(b);
    let second = segments.len();
    segments.push(c);
    extend_random(&mut segments, part);
    segments.push(c);
    let third = segments.len();
    segments.push(a);
    extend_random(&mut segments, part);

    let mut script = Script::new(segments);
    script.repeats = vec![Repeat {
        segments: verse_start..verse_end,
        insert_before: vec![second, third],
    }];
    script.seed = seed;
    script
}

pub fn iou(a: std::ops::Range<usize>, b: std::ops::Range<usize>) -> f64 {
    let inter = a.end.min(b.end).saturating_sub(a.start.max(b.start));
    let union = a.end.max(b.end) - a.start.min(b.start);
    inter as f64 / union as f64
}

fn flat(points: &[phonoclust_core::Keypoint]) -> String {
    let mut s = String::from("[");
    for (i, k) in points.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{},{},{}", k.x, k.y, k.confidence);
    }
    s.push(']');
    s
}

/// Writes frames as an OpenPose export, leaving out frames listed in `skip`
/// and writing an empty `people` array for those in `empty`.
pub fn write_openpose_dir(dir: &Path, prefix: &str, frames: &[KeypointFrame], skip: &[usize], empty: &[usize]) {
    std::fs::create_dir_all(dir).unwrap();
    for f in frames {
        if skip.contains(&f.frame_index) {
            continue;
        }
        let body = if empty.contains(&f.frame_index) {
            r#"{"version":1.3,"people":[]}"#.to_owned()
        } else {
            format!(
                r#"{{"version":1.3,"people":[{{"person_id":[-1],"pose_keypoints_2d":{},"face_keypoints_2d":[],"hand_left_keypoints_2d":{},"hand_right_keypoints_2d":{}}}]}}"#,
                flat(&f.body),
                flat(&f.left_hand),
                flat(&f.right_hand)
            )
        };
        let name = format!("{prefix}_{:012}_keypoints.json", f.frame_index);
        std::fs::write(dir.join(name), body).unwrap();
    }
}
