use phonoclust_core::metric::{affinity_row, EditDistance, MetricError};
use phonoclust_core::{AffinityMatrix, Phoneme, SimilarityConfig};
use rayon::prelude::*;

/// Row-parallel affinity matrix; every entry is computed exactly as in the
/// sequential version, so results are bit-identical for any thread count.
pub fn affinity_matrix_par(phonemes: &[Phoneme], cfg: &SimilarityConfig) -> Result<AffinityMatrix, MetricError> {
    if phonemes.is_empty() {
        return Err(MetricError::EmptyMatrix);
    }
    let rows = (0..phonemes.len())
        .into_par_iter()
        .map_init(EditDistance::new, |ws, i| affinity_row(phonemes, i, cfg, ws))
        .collect::<Result<Vec<_>, _>>()?;
    AffinityMatrix::from_upper_rows(&rows)
}

/// Uses the sequential path for `jobs == 1`, a dedicated pool for other
/// non-zero counts and the global pool for `None` or zero.
pub fn affinity_matrix_with_jobs(
    phonemes: &[Phoneme],
    cfg: &SimilarityConfig,
    jobs: Option<usize>,
) -> Result<AffinityMatrix, MetricError> {
    match jobs {
        Some(1) => phonoclust_core::metric::affinity_matrix(phonemes, cfg),
        Some(n) if n > 1 => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| affinity_matrix_par(phonemes, cfg)),
            Err(_) => affinity_matrix_par(phonemes, cfg),
        },
        _ => affinity_matrix_par(phonemes, cfg),
    }
}
