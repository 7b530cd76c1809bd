//! Discovery of repeated spans of consecutive phonemes within one video.
//!
//! Matching proceeds in rounds. Round 1 pairs up similar phonemes that do not
//! overlap in time. Round `r + 1` grows a pair of length-`r` spans `(i, j)`
//! into `(i..i+r+1, j..j+r+1)` when the shifted pair `(i + 1, j + 1)` also
//! matched in round `r` and the concatenated symbol sequences of the longer
//! spans are still similar. Rounds stop when nothing new matches or the
//! maximum span length is reached. Only maximal matches are reported: a
//! match is dropped if both of its spans lie inside the spans of a longer
//! match.
//!
//! Input phonemes must belong to one hand and be sorted by start frame.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::metric::{EditDistance, SimilarityConfig};
use crate::phonology::PhonoSymbol;
use crate::segment::Phoneme;

/// Default cap on span length, in phonemes.
pub const DEFAULT_MAX_LEN: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub struct PhonemeSpan {
    /// Phoneme index range `[first, end)` into the matched list.
    pub phonemes: core::ops::Range<usize>,
    pub start_frame: usize,
    pub end_frame: usize,
    pub symbols: Vec<PhonoSymbol>,
}

impl PhonemeSpan {
    pub fn frames(&self) -> core::ops::Range<usize> {
        self.start_frame..self.end_frame
    }

    pub fn phoneme_count(&self) -> usize {
        self.phonemes.len()
    }

    /// Whether both phoneme ranges of `self` lie inside `other`.
    fn within(&self, other: &PhonemeSpan) -> bool {
        other.phonemes.start <= self.phonemes.start && self.phonemes.end <= other.phonemes.end
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpanMatch {
    pub a: PhonemeSpan,
    pub b: PhonemeSpan,
    /// `1 - distance` between the concatenated symbol sequences.
    pub similarity: f64,
}

impl SpanMatch {
    pub fn contained_in(&self, other: &SpanMatch) -> bool {
        self.a.within(&other.a) && self.b.within(&other.b)
    }
}

/// Phoneme symbols laid end to end, so any run of consecutive phonemes is a slice.
struct FlatSymbols<'a> {
    phonemes: &'a [Phoneme],
    symbols: Vec<PhonoSymbol>,
    offsets: Vec<usize>,
}

impl<'a> FlatSymbols<'a> {
    fn new(phonemes: &'a [Phoneme]) -> Self {
        let mut symbols = Vec::new();
        let mut offsets = Vec::with_capacity(phonemes.len() + 1);
        offsets.push(0);
        for p in phonemes {
            symbols.extend_from_slice(p.symbols());
            offsets.push(symbols.len());
        }
        Self {
            phonemes,
            symbols,
            offsets,
        }
    }

    fn span(&self, first: usize, len: usize) -> &[PhonoSymbol] {
        &self.symbols[self.offsets[first]..self.offsets[first + len]]
    }

    /// The two spans exist and do not share any frame.
    fn disjoint(&self, i: usize, j: usize, len: usize) -> bool {
        j + len <= self.phonemes.len()
            && self.phonemes[i + len - 1].end_frame() <= self.phonemes[j].start_frame()
    }

    fn make_span(&self, first: usize, len: usize) -> PhonemeSpan {
        PhonemeSpan {
            phonemes: first..first + len,
            start_frame: self.phonemes[first].start_frame(),
            end_frame: self.phonemes[first + len - 1].end_frame(),
            symbols: self.span(first, len).to_vec(),
        }
    }
}

/// Matched pairs of one round, sorted by `(i, j)`.
#[derive(Default)]
struct Round {
    len: usize,
    pairs: Vec<(usize, usize)>,
    distances: Vec<f64>,
}

impl Round {
    fn contains(&self, pair: (usize, usize)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }
}

pub fn match_spans(phonemes: &[Phoneme], cfg: &SimilarityConfig, max_len: usize) -> Vec<SpanMatch> {
    if phonemes.len() < 2 || max_len == 0 {
        return Vec::new();
    }
    let flat = FlatSymbols::new(phonemes);
    let mut dp = EditDistance::new();
    let del = cfg.deletion_cost();
    let mut distance = |a: &[PhonoSymbol], b: &[PhonoSymbol]| {
        dp.normalized(a, b, del).expect("phonemes are never empty")
    };

    let mut first = Round {
        len: 1,
        ..Round::default()
    };
    let n = phonemes.len();
    for i in 0..n {
        for j in i + 1..n {
            if !flat.disjoint(i, j, 1) {
                continue;
            }
            let d = distance(flat.span(i, 1), flat.span(j, 1));
            if cfg.accepts(d) {
                first.pairs.push((i, j));
                first.distances.push(d);
            }
        }
    }

    let mut rounds = Vec::new();
    let mut current = first;
    while !current.pairs.is_empty() {
        let len = current.len + 1;
        let mut next = Round {
            len,
            ..Round::default()
        };
        if len <= max_len {
            for &(i, j) in &current.pairs {
                if !flat.disjoint(i, j, len) || !current.contains((i + 1, j + 1)) {
                    continue;
                }
                let d = distance(flat.span(i, len), flat.span(j, len));
                if cfg.accepts(d) {
                    next.pairs.push((i, j));
                    next.distances.push(d);
                }
            }
        }
        rounds.push(current);
        current = next;
    }

    maximal_matches(&flat, &rounds)
}

fn maximal_matches(flat: &FlatSymbols<'_>, rounds: &[Round]) -> Vec<SpanMatch> {
    // rounds[k] holds spans of length k + 1
    let mut dominated: Vec<Vec<bool>> = rounds.iter().map(|r| alloc::vec![false; r.pairs.len()]).collect();

    // same diagonal: a longer match extends this one by a phoneme on either side
    for k in 0..rounds.len().saturating_sub(1) {
        let longer = &rounds[k + 1];
        for (idx, &(i, j)) in rounds[k].pairs.iter().enumerate() {
            let left = i > 0 && longer.contains((i - 1, j - 1));
            if longer.contains((i, j)) || left {
                dominated[k][idx] = true;
            }
        }
    }

    // other diagonals: scan the shorter spans that fit inside each diagonal-maximal match
    for k_long in 1..rounds.len() {
        let long_len = rounds[k_long].len;
        for (idx_long, &(i0, j0)) in rounds[k_long].pairs.iter().enumerate() {
            if dominated[k_long][idx_long] {
                continue;
            }
            for k in 0..k_long {
                let len = rounds[k].len;
                let slack = long_len - len;
                for i in i0..=i0 + slack {
                    for j in j0..=j0 + slack {
                        if j - j0 == i - i0 {
                            continue;
                        }
                        if let Ok(pos) = rounds[k].pairs.binary_search(&(i, j)) {
                            dominated[k][pos] = true;
                        }
                    }
                }
            }
        }
    }

    let mut out = Vec::new();
    for (k, round) in rounds.iter().enumerate() {
        for (idx, &(i, j)) in round.pairs.iter().enumerate() {
            if dominated[k][idx] {
                continue;
            }
            out.push(SpanMatch {
                a: flat.make_span(i, round.len),
                b: flat.make_span(j, round.len),
                similarity: 1.0 - round.distances[idx],
            });
        }
    }
    out.sort_by(|x, y| {
        (x.a.start_frame, x.b.start_frame, x.a.end_frame, x.b.end_frame)
            .cmp(&(y.a.start_frame, y.b.start_frame, y.a.end_frame, y.b.end_frame))
    });
    out
}

fn seconds(frame: usize, fps: f64) -> f64 {
    frame as f64 / fps
}

/// Plain-text table of matches: frame ranges, times and similarity.
pub fn span_report(matches: &[SpanMatch], fps: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:<16} {:<26} {:>10}",
        "frames_a", "frames_b", "seconds", "similarity"
    );
    for m in matches {
        let range = |s: &PhonemeSpan| format!("{}-{}", s.start_frame, s.end_frame);
        let time = |s: &PhonemeSpan| {
            format!(
                "{:.1}s\u{2013}{:.1}s",
                seconds(s.start_frame, fps),
                seconds(s.end_frame, fps)
            )
        };
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:<26} {:>10.4}",
            range(&m.a),
            range(&m.b),
            format!("{} vs {}", time(&m.a), time(&m.b)),
            m.similarity
        );
    }
    out
}
