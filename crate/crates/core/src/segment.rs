//! Temporal segmentation of a phonology stream into phonemes.
//!
//! The hand-centroid speed `f(t) = |c(t+1) - c(t)|` is differenced into
//! `f'(t) = f(t+1) - f(t)`, and a boundary is placed at frame `t + 1` whenever
//! `sign(f'(t-1)) != sign(f'(t))` with `sign` in {-1, 0, +1}. Plateaus (holds)
//! therefore start and end a segment. Stretches where the hand is missing
//! contribute a boundary at each edge of the valid region.

use alloc::vec::Vec;

use thiserror::Error;

use crate::ingest::Side;
use crate::phonology::{PhonoFrame, PhonoSymbol};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SegmentError {
    #[error("need at least 2 frames to measure speed, got {0}")]
    TooShort(usize),
    #[error("phoneme frame range {start}..{end} does not match {symbols} symbols")]
    InvalidPhoneme {
        start: usize,
        end: usize,
        symbols: usize,
    },
}

/// Per-frame centroid speed of one hand, in canonical units per frame.
///
/// `values[t]` measures the motion from frame `t` to `t + 1`; `None` marks a
/// step where either endpoint has no centroid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpeedSeries {
    values: Vec<Option<f64>>,
}

impl SpeedSeries {
    pub fn from_values(values: Vec<Option<f64>>) -> Self {
        Self { values }
    }

    /// Series with every value valid.
    pub fn from_dense(values: &[f64]) -> Self {
        Self {
            values: values.iter().copied().map(Some).collect(),
        }
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Number of frames the series was measured over.
    pub fn frame_count(&self) -> usize {
        self.values.len() + 1
    }

    /// Centered 3-tap moving average. Values whose neighbours are missing or
    /// out of range are kept as they are.
    pub fn smoothed(&self) -> SpeedSeries {
        let v = &self.values;
        let values = (0..v.len())
            .map(|t| {
                let here = v[t]?;
                match (t.checked_sub(1).and_then(|p| v[p]), v.get(t + 1).copied().flatten()) {
                    (Some(prev), Some(next)) => Some((prev + here + next) / 3.0),
                    _ => Some(here),
                }
            })
            .collect();
        SpeedSeries { values }
    }
}

pub fn speed_series(frames: &[PhonoFrame], side: Side) -> Result<SpeedSeries, SegmentError> {
    if frames.len() < 2 {
        return Err(SegmentError::TooShort(frames.len()));
    }
    let values = frames
        .windows(2)
        .map(|w| {
            let a = w[0].hand(side).centroid?;
            let b = w[1].hand(side).centroid?;
            Some(a.distance(b))
        })
        .collect();
    Ok(SpeedSeries { values })
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Boundary frame positions (relative to the first frame of the series), sorted.
pub fn segment_boundaries(series: &SpeedSeries) -> Vec<usize> {
    let values = series.values();
    let frames = series.frame_count();
    let mut out = Vec::new();
    let mut t = 0;
    while t < values.len() {
        if values[t].is_none() {
            t += 1;
            continue;
        }
        let start = t;
        while t < values.len() && values[t].is_some() {
            t += 1;
        }
        // valid speeds [start, t) cover frames [start, t + 1)
        let run: Vec<f64> = values[start..t].iter().map(|v| v.unwrap_or(0.0)).collect();
        if start > 0 {
            out.push(start);
        }
        let derivative: Vec<i8> = run.windows(2).map(|w| sign(w[1] - w[0])).collect();
        for (k, pair) in derivative.windows(2).enumerate() {
            if pair[0] != pair[1] {
                // pair[1] is f'(start + k + 1)
                out.push(start + k + 2);
            }
        }
        if t + 1 < frames {
            out.push(t + 1);
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// A contiguous run of frames of one hand with its per-frame symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phoneme {
    hand: Side,
    start_frame: usize,
    end_frame: usize,
    symbols: Vec<PhonoSymbol>,
}

impl Phoneme {
    pub fn new(
        hand: Side,
        start_frame: usize,
        end_frame: usize,
        symbols: Vec<PhonoSymbol>,
    ) -> Result<Self, SegmentError> {
        if end_frame <= start_frame || symbols.len() != end_frame - start_frame {
            return Err(SegmentError::InvalidPhoneme {
                start: start_frame,
                end: end_frame,
                symbols: symbols.len(),
            });
        }
        Ok(Self {
            hand,
            start_frame,
            end_frame,
            symbols,
        })
    }

    pub fn hand(&self) -> Side {
        self.hand
    }

    /// First frame, inclusive.
    pub fn start_frame(&self) -> usize {
        self.start_frame
    }

    /// One past the last frame.
    pub fn end_frame(&self) -> usize {
        self.end_frame
    }

    pub fn len(&self) -> usize {
        self.end_frame - self.start_frame
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn symbols(&self) -> &[PhonoSymbol] {
        &self.symbols
    }

    pub fn symbols_mut(&mut self) -> &mut [PhonoSymbol] {
        &mut self.symbols
    }
}

/// Cuts `frames` at `boundaries` (positions into `frames`) and keeps the
/// segments that are fully described and at least `min_len` frames long.
pub fn phonemes_from_boundaries(
    frames: &[PhonoFrame],
    boundaries: &[usize],
    side: Side,
    min_len: usize,
) -> Vec<Phoneme> {
    let mut cuts: Vec<usize> = boundaries
        .iter()
        .copied()
        .filter(|&b| b > 0 && b < frames.len())
        .collect();
    cuts.sort_unstable();
    cuts.dedup();

    let mut out = Vec::new();
    let mut start = 0;
    for end in cuts.into_iter().chain(core::iter::once(frames.len())) {
        let segment = &frames[start..end];
        let symbols: Option<Vec<PhonoSymbol>> =
            segment.iter().map(|f| f.hand(side).symbol()).collect();
        if let Some(symbols) = symbols {
            if !symbols.is_empty() && symbols.len() >= min_len {
                out.push(Phoneme {
                    hand: side,
                    start_frame: segment[0].frame_index,
                    end_frame: segment[0].frame_index + symbols.len(),
                    symbols,
                });
            }
        }
        start = end;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SegmentConfig {
    pub min_len: usize,
    pub smoothing: bool,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        Self {
            min_len: 3,
            smoothing: true,
        }
    }
}

/// Boundaries and phonemes of one hand.
#[derive(Clone, Debug, PartialEq)]
pub struct HandSegmentation {
    pub hand: Side,
    /// Boundary frame indices (absolute, i.e. offset by the first frame index).
    pub boundaries: Vec<usize>,
    pub phonemes: Vec<Phoneme>,
}

pub fn segment_hand(
    frames: &[PhonoFrame],
    side: Side,
    cfg: SegmentConfig,
) -> Result<HandSegmentation, SegmentError> {
    let mut series = speed_series(frames, side)?;
    if cfg.smoothing {
        series = series.smoothed();
    }
    let relative = segment_boundaries(&series);
    let phonemes = phonemes_from_boundaries(frames, &relative, side, cfg.min_len);
    let first = frames[0].frame_index;
    Ok(HandSegmentation {
        hand: side,
        boundaries: relative.into_iter().map(|b| b + first).collect(),
        phonemes,
    })
}

/// `(length_frames, count)` pairs sorted by length.
pub fn length_histogram<'a>(phonemes: impl IntoIterator<Item = &'a Phoneme>) -> Vec<(usize, usize)> {
    let mut lengths: Vec<usize> = phonemes.into_iter().map(Phoneme::len).collect();
    lengths.sort_unstable();
    let mut out: Vec<(usize, usize)> = Vec::new();
    for len in lengths {
        match out.last_mut() {
            Some((l, c)) if *l == len => *c += 1,
            _ => out.push((len, 1)),
        }
    }
    out
}
