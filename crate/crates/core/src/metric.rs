//! Phonological symbol distance, weighted edit distance between phonemes, and
//! the pairwise affinity matrix.
//!
//! Two symbols differ by the circular distance between orientation sectors
//! (0..=4) and the absolute difference between location levels (0..=2). Each
//! is scaled to [0, 1] and the two are averaged. That value is the
//! substitution cost of a Levenshtein alignment whose insertions and
//! deletions cost `deletion_cost`; dividing by `max(|p|, |q|) * deletion_cost`
//! keeps the phoneme distance in [0, 1].
//!
//! The normalized distance is symmetric and zero on identical sequences but
//! does not satisfy the triangle inequality in general.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::phonology::{PhonoSymbol, Orientation, LocationLevel};
use crate::segment::Phoneme;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("cannot compare an empty symbol sequence")]
    EmptyPhoneme,
    #[error("similarity threshold must lie in [0, 1], got {0}")]
    InvalidThreshold(f64),
    #[error("deletion cost must be finite and at least 1, got {0}")]
    InvalidDeletionCost(f64),
    #[error("affinity matrix needs at least one item")]
    EmptyMatrix,
    #[error("affinity matrix entry ({row}, {col}) = {value} breaks symmetry, zero diagonal or [0, 1] range")]
    InvalidEntry { row: usize, col: usize, value: f64 },
    #[error("expected {expected} matrix entries, got {found}")]
    ShapeMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymbolCost {
    pub orientation_distance: u8,
    pub location_distance: u8,
    pub combined: f64,
}

pub fn symbol_distance(a: PhonoSymbol, b: PhonoSymbol) -> SymbolCost {
    let orientation_distance = a.orientation.circular_distance(b.orientation);
    let location_distance = a.location.index().abs_diff(b.location.index());
    let max_orientation = (Orientation::COUNT / 2) as f64;
    let max_location = (LocationLevel::COUNT - 1) as f64;
    let combined = (f64::from(orientation_distance) / max_orientation
        + f64::from(location_distance) / max_location)
        / 2.0;
    SymbolCost {
        orientation_distance,
        location_distance,
        combined,
    }
}

/// Substitution costs for every pair of symbols, indexed by [`PhonoSymbol::index`].
#[derive(Clone, Debug)]
pub struct CostTable {
    costs: [[f64; PhonoSymbol::ALPHABET]; PhonoSymbol::ALPHABET],
}

impl CostTable {
    pub fn new() -> Self {
        let mut costs = [[0.0; PhonoSymbol::ALPHABET]; PhonoSymbol::ALPHABET];
        for (i, row) in costs.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let a = PhonoSymbol::from_index(i).expect("index in alphabet");
                let b = PhonoSymbol::from_index(j).expect("index in alphabet");
                *cell = symbol_distance(a, b).combined;
            }
        }
        Self { costs }
    }

    #[inline]
    pub fn get(&self, a: PhonoSymbol, b: PhonoSymbol) -> f64 {
        self.costs[a.index()][b.index()]
    }
}

impl Default for CostTable {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilarityConfig {
    threshold: f64,
    deletion_cost: f64,
}

impl SimilarityConfig {
    pub const DEFAULT_DELETION_COST: f64 = 1.0;

    pub fn new(threshold: f64, deletion_cost: f64) -> Result<Self, MetricError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(MetricError::InvalidThreshold(threshold));
        }
        // a cost below 1 would let a single substitution exceed the normalizer
        if !(deletion_cost >= 1.0 && deletion_cost.is_finite()) {
            return Err(MetricError::InvalidDeletionCost(deletion_cost));
        }
        Ok(Self {
            threshold,
            deletion_cost,
        })
    }

    pub fn with_threshold(threshold: f64) -> Result<Self, MetricError> {
        Self::new(threshold, Self::DEFAULT_DELETION_COST)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn deletion_cost(&self) -> f64 {
        self.deletion_cost
    }

    /// Whether a pair at `distance` counts as similar.
    #[inline]
    pub fn accepts(&self, distance: f64) -> bool {
        1.0 - distance >= self.threshold
    }
}

impl Default for SimilarityConfig {
    fn default() -> Self {
        Self {
            threshold: 0.5,
            deletion_cost: Self::DEFAULT_DELETION_COST,
        }
    }
}

/// Reusable edit-distance workspace.
#[derive(Clone, Debug, Default)]
pub struct EditDistance {
    table: CostTable,
    row: Vec<f64>,
}

impl EditDistance {
    pub fn new() -> Self {
        Self::default()
    }

    /// Raw (unnormalized) weighted Levenshtein cost.
    pub fn raw(&mut self, a: &[PhonoSymbol], b: &[PhonoSymbol], deletion_cost: f64) -> f64 {
        let row = &mut self.row;
        row.clear();
        row.extend((0..=b.len()).map(|j| j as f64 * deletion_cost));
        for (i, &sa) in a.iter().enumerate() {
            let mut diagonal = row[0];
            row[0] = (i + 1) as f64 * deletion_cost;
            for (j, &sb) in b.iter().enumerate() {
                let substitute = diagonal + self.table.get(sa, sb);
                let delete = row[j + 1] + deletion_cost;
                let insert = row[j] + deletion_cost;
                diagonal = row[j + 1];
                row[j + 1] = substitute.min(delete).min(insert);
            }
        }
        row[b.len()]
    }

    /// Normalized distance in [0, 1].
    pub fn normalized(
        &mut self,
        a: &[PhonoSymbol],
        b: &[PhonoSymbol],
        deletion_cost: f64,
    ) -> Result<f64, MetricError> {
        if a.is_empty() || b.is_empty() {
            return Err(MetricError::EmptyPhoneme);
        }
        let normalizer = a.len().max(b.len()) as f64 * deletion_cost;
        Ok(self.raw(a, b, deletion_cost) / normalizer)
    }
}

/// Normalized weighted edit distance between two symbol sequences.
pub fn sequence_distance(
    a: &[PhonoSymbol],
    b: &[PhonoSymbol],
    cfg: &SimilarityConfig,
) -> Result<f64, MetricError> {
    EditDistance::new().normalized(a, b, cfg.deletion_cost)
}

pub fn phoneme_distance(p: &Phoneme, q: &Phoneme, cfg: &SimilarityConfig) -> Result<f64, MetricError> {
    sequence_distance(p.symbols(), q.symbols(), cfg)
}

pub fn similar(p: &Phoneme, q: &Phoneme, cfg: &SimilarityConfig) -> Result<bool, MetricError> {
    Ok(cfg.accepts(phoneme_distance(p, q, cfg)?))
}

/// Symmetric matrix of pairwise distances in [0, 1] with a zero diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix {
    n: usize,
    distances: Vec<f64>,
}

impl AffinityMatrix {
    /// Builds a matrix from row-major entries, checking every invariant.
    pub fn from_row_major(n: usize, distances: Vec<f64>) -> Result<Self, MetricError> {
        if n == 0 {
            return Err(MetricError::EmptyMatrix);
        }
        if distances.len() != n * n {
            return Err(MetricError::ShapeMismatch {
                expected: n * n,
                found: distances.len(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let v = distances[i * n + j];
                let ok = (0.0..=1.0).contains(&v)
                    && (i != j || v == 0.0)
                    && v == distances[j * n + i];
                if !ok {
                    return Err(MetricError::InvalidEntry { row: i, col: j, value: v });
                }
            }
        }
        Ok(Self { n, distances })
    }

    /// Builds a matrix from the strict upper triangle, given row by row
    /// (`rows[i]` holds entries `(i, i+1..n)`).
    pub fn from_upper_rows(rows: &[Vec<f64>]) -> Result<Self, MetricError> {
        let n = rows.len();
        let mut distances = vec![0.0; n * n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n - i - 1 {
                return Err(MetricError::ShapeMismatch {
                    expected: n - i - 1,
                    found: row.len(),
                });
            }
            for (k, &d) in row.iter().enumerate() {
                let j = i + 1 + k;
                distances[i * n + j] = d;
                distances[j * n + i] = d;
            }
        }
        Self::from_row_major(n, distances)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.distances[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.distances[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.distances
    }
}

/// Distances from phoneme `i` to every later phoneme.
pub fn affinity_row(
    phonemes: &[Phoneme],
    i: usize,
    cfg: &SimilarityConfig,
    workspace: &mut EditDistance,
) -> Result<Vec<f64>, MetricError> {
    let p = phonemes[i].symbols();
    phonemes[i + 1..]
        .iter()
        .map(|q| workspace.normalized(p, q.symbols(), cfg.deletion_cost))
        .collect()
}

/// Pairwise distances between all phonemes, evaluated sequentially.
pub fn affinity_matrix(phonemes: &[Phoneme], cfg: &SimilarityConfig) -> Result<AffinityMatrix, MetricError> {
    if phonemes.is_empty() {
        return Err(MetricError::EmptyMatrix);
    }
    let mut workspace = EditDistance::new();
    let rows = (0..phonemes.len())
        .map(|i| affinity_row(phonemes, i, cfg, &mut workspace))
        .collect::<Result<Vec<_>, _>>()?;
    AffinityMatrix::from_upper_rows(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Side;
    use proptest::prelude::*;

    fn sym(s: u8, l: u8) -> PhonoSymbol {
        PhonoSymbol::new(Orientation::new(s).unwrap(), LocationLevel::from_index(l).unwrap())
    }

    fn phoneme(symbols: &[PhonoSymbol]) -> Phoneme {
        Phoneme::new(Side::Right, 0, symbols.len(), symbols.to_vec()).unwrap()
    }

    #[test]
    fn symbol_distance_examples() {
        let a = sym(3, 1);
        assert_eq!(symbol_distance(a, a).combined, 0.0);

        let c = symbol_distance(sym(0, 0), sym(4, 2));
        assert_eq!((c.orientation_distance, c.location_distance), (4, 2));
        assert_eq!(c.combined, 1.0);

        assert_eq!(symbol_distance(sym(0, 1), sym(7, 1)).orientation_distance, 1);
        // (2/4 + 1/2) / 2
        assert_eq!(symbol_distance(sym(1, 0), sym(3, 1)).combined, 0.5);
    }

    #[test]
    fn phoneme_distance_examples() {
        let cfg = SimilarityConfig::default();
        let p = phoneme(&[sym(1, 0), sym(2, 1), sym(2, 1)]);
        assert_eq!(phoneme_distance(&p, &p, &cfg).unwrap(), 0.0);

        let a = phoneme(&[sym(0, 0)]);
        let b = phoneme(&[sym(4, 2)]);
        assert_eq!(phoneme_distance(&a, &b, &cfg).unwrap(), 1.0);

        // one extra symbol: a single insertion over length 4
        let q = phoneme(&[sym(1, 0), sym(2, 1), sym(2, 1), sym(2, 1)]);
        assert_eq!(phoneme_distance(&p, &q, &cfg).unwrap(), 0.25);
    }

    #[test]
    fn empty_sequences_are_rejected() {
        let cfg = SimilarityConfig::default();
        assert_eq!(sequence_distance(&[], &[sym(0, 0)], &cfg), Err(MetricError::EmptyPhoneme));
    }

    #[test]
    fn threshold_arithmetic() {
        let cfg = SimilarityConfig::with_threshold(0.5).unwrap();
        assert!(cfg.accepts(0.4));
        assert!(cfg.accepts(0.5));
        assert!(!cfg.accepts(0.6));
        assert!(SimilarityConfig::with_threshold(0.0).unwrap().accepts(1.0));
        let strict = SimilarityConfig::with_threshold(1.0).unwrap();
        assert!(strict.accepts(0.0));
        assert!(!strict.accepts(0.125));
    }

    #[test]
    fn config_validation() {
        assert!(SimilarityConfig::with_threshold(1.5).is_err());
        assert!(SimilarityConfig::with_threshold(-0.1).is_err());
        assert!(SimilarityConfig::new(0.5, 0.5).is_err());
        assert!(SimilarityConfig::new(0.5, f64::INFINITY).is_err());
        assert!(SimilarityConfig::new(0.5, 2.0).is_ok());
    }

    #[test]
    fn affinity_basics() {
        let cfg = SimilarityConfig::default();
        let one = affinity_matrix(&[phoneme(&[sym(0, 0)])], &cfg).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one.get(0, 0), 0.0);

        let a = phoneme(&[sym(0, 0), sym(1, 1)]);
        let b = phoneme(&[sym(5, 2), sym(1, 1), sym(1, 1)]);
        let m = affinity_matrix(&[a.clone(), b.clone(), a.clone(), b], &cfg).unwrap();
        assert_eq!(m.get(0, 2), 0.0);
        assert_eq!(m.get(1, 3), 0.0);
        assert!(m.get(0, 1) > 0.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));

        assert_eq!(affinity_matrix(&[], &cfg), Err(MetricError::EmptyMatrix));
    }

    #[test]
    fn matrix_validation() {
        assert!(AffinityMatrix::from_row_major(2, vec![0.0, 0.3, 0.3, 0.0]).is_ok());
        assert!(AffinityMatrix::from_row_major(2, vec![0.0, 0.3, 0.2, 0.0]).is_err());
        assert!(AffinityMatrix::from_row_major(2, vec![0.1, 0.3, 0.3, 0.0]).is_err());
        assert!(AffinityMatrix::from_row_major(2, vec![0.0, 1.3, 1.3, 0.0]).is_err());
        assert!(AffinityMatrix::from_row_major(2, vec![0.0; 3]).is_err());
    }

    fn symbols() -> impl Strategy<Value = Vec<PhonoSymbol>> {
        proptest::collection::vec((0u8..8, 0u8..3).prop_map(|(s, l)| sym(s, l)), 1..12)
    }

    proptest! {
        #[test]
        fn distance_is_symmetric_and_bounded(a in symbols(), b in symbols(), del in 1.0f64..3.0) {
            let cfg = SimilarityConfig::new(0.5, del).unwrap();
            let ab = sequence_distance(&a, &b, &cfg).unwrap();
            let ba = sequence_distance(&b, &a, &cfg).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert_eq!(sequence_distance(&a, &a, &cfg).unwrap(), 0.0);
        }

        #[test]
        fn raising_threshold_never_adds_similarity(a in symbols(), b in symbols(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let d = sequence_distance(&a, &b, &SimilarityConfig::default()).unwrap();
            let lo = SimilarityConfig::with_threshold(lo).unwrap();
            let hi = SimilarityConfig::with_threshold(hi).unwrap();
            prop_assert!(!hi.accepts(d) || lo.accepts(d));
        }

        #[test]
        fn frame_placement_is_irrelevant(a in symbols(), b in symbols(), shift in 0usize..1000) {
            let cfg = SimilarityConfig::default();
            let p = Phoneme::new(Side::Right, shift, shift + a.len(), a.clone()).unwrap();
            let q = Phoneme::new(Side::Right, 0, b.len(), b.clone()).unwrap();
            prop_assert_eq!(
                phoneme_distance(&p, &q, &cfg).unwrap(),
                sequence_distance(&a, &b, &cfg).unwrap()
            );
        }
    }
}
