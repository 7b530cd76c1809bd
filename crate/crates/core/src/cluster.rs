//! Clustering over an [`AffinityMatrix`]: threshold grouping, DBSCAN,
//! silhouette scoring, parameter sweeps and a classical MDS projection.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::metric::{AffinityMatrix, SimilarityConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusterError {
    #[error("DBSCAN eps must be positive and finite, got {0}")]
    InvalidEps(f64),
    #[error("DBSCAN min_samples must be at least 1")]
    InvalidMinSamples,
    #[error("projection needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("{labels} labels for a {points}-point matrix")]
    LabelCountMismatch { labels: usize, points: usize },
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("invalid sweep parameter {0}")]
    InvalidParameter(f64),
}

/// Disjoint-set forest with path compression and union by rank.
#[derive(Clone, Debug)]
pub struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.rank[a] < self.rank[b] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        if self.rank[a] == self.rank[b] {
            self.rank[a] = self.rank[a].saturating_add(1);
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DbscanConfig {
    eps: f64,
    min_samples: usize,
}

impl DbscanConfig {
    pub const DEFAULT_EPS: f64 = 0.5;

    pub fn new(eps: f64, min_samples: usize) -> Result<Self, ClusterError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(ClusterError::InvalidEps(eps));
        }
        if min_samples == 0 {
            return Err(ClusterError::InvalidMinSamples);
        }
        Ok(Self { eps, min_samples })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples
    }
}

impl Default for DbscanConfig {
    fn default() -> Self {
        Self {
            eps: Self::DEFAULT_EPS,
            min_samples: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    Grouping { threshold: f64 },
    Dbscan { eps: f64, min_samples: usize },
}

/// Cluster assignment for every item. `None` marks DBSCAN noise.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub labels: Vec<Option<usize>>,
    pub method: Method,
    pub n_clusters: usize,
    pub silhouette: Option<f64>,
}

impl Clustering {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }

    /// Mean number of non-noise members per cluster (0 without clusters).
    pub fn mean_cluster_size(&self) -> f64 {
        if self.n_clusters == 0 {
            return 0.0;
        }
        (self.labels.len() - self.noise_count()) as f64 / self.n_clusters as f64
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for l in self.labels.iter().flatten() {
            sizes[*l] += 1;
        }
        sizes
    }
}

/// Renumbers labels by first appearance so they read 0, 1, 2, ... in index order.
fn canonical_labels(raw: &[Option<usize>]) -> (Vec<Option<usize>>, usize) {
    let mut mapping: Vec<Option<usize>> = vec![None; raw.len()];
    let mut next = 0;
    let labels = raw
        .iter()
        .map(|l| {
            l.map(|r| {
                *mapping[r].get_or_insert_with(|| {
                    next += 1;
                    next - 1
                })
            })
        })
        .collect();
    (labels, next)
}

/// Connected components of the similarity graph: phonemes `i` and `j` are
/// joined whenever `1 - d(i, j) >= T`. Labels are numbered by smallest member.
pub fn grouping_cluster(matrix: &AffinityMatrix, cfg: &SimilarityConfig) -> Clustering {
    let n = matrix.len();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        let row = matrix.row(i);
        for (j, &d) in row.iter().enumerate().skip(i + 1) {
            if cfg.accepts(d) {
                sets.union(i, j);
            }
        }
    }
    let roots: Vec<Option<usize>> = (0..n).map(|i| Some(sets.find(i))).collect();
    let (labels, n_clusters) = canonical_labels(&roots);
    finish(
        matrix,
        labels,
        n_clusters,
        Method::Grouping {
            threshold: cfg.threshold(),
        },
    )
}

/// DBSCAN over precomputed distances.
///
/// The neighbourhood of `i` is `{j : d(i, j) <= eps}` including `i` itself;
/// `i` is a core point when that set has at least `min_samples` members.
/// Core points that are neighbours share a cluster. A non-core point joins
/// the cluster of its lowest-index core neighbour, or is noise if it has none.
/// Clusters are numbered by their lowest-index core point.
pub fn dbscan_cluster(matrix: &AffinityMatrix, cfg: &DbscanConfig) -> Clustering {
    let n = matrix.len();
    let neighbours: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            matrix
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, d)| **d <= cfg.eps)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbours.iter().map(|nb| nb.len() >= cfg.min_samples).collect();

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut n_clusters = 0;
    let mut stack = Vec::new();
    for seed in 0..n {
        if !core[seed] || labels[seed].is_some() {
            continue;
        }
        let label = n_clusters;
        n_clusters += 1;
        labels[seed] = Some(label);
        stack.push(seed);
        while let Some(p) = stack.pop() {
            for &q in &neighbours[p] {
                if core[q] && labels[q].is_none() {
                    labels[q] = Some(label);
                    stack.push(q);
                }
            }
        }
    }
    for i in (0..n).filter(|&i| !core[i]) {
        labels[i] = neighbours[i]
            .iter()
            .find(|&&j| core[j])
            .and_then(|&j| labels[j]);
    }
    finish(
        matrix,
        labels,
        n_clusters,
        Method::Dbscan {
            eps: cfg.eps,
            min_samples: cfg.min_samples,
        },
    )
}

fn finish(matrix: &AffinityMatrix, labels: Vec<Option<usize>>, n_clusters: usize, method: Method) -> Clustering {
    let silhouette = silhouette_of_labels(matrix, &labels, n_clusters);
    Clustering {
        labels,
        method,
        n_clusters,
        silhouette,
    }
}

/// Mean silhouette over non-noise points; `None` with fewer than two clusters.
pub fn silhouette(matrix: &AffinityMatrix, clustering: &Clustering) -> Result<Option<f64>, ClusterError> {
    if clustering.labels.len() != matrix.len() {
        return Err(ClusterError::LabelCountMismatch {
            labels: clustering.labels.len(),
            points: matrix.len(),
        });
    }
    Ok(silhouette_of_labels(matrix, &clustering.labels, clustering.n_clusters))
}

fn silhouette_of_labels(matrix: &AffinityMatrix, labels: &[Option<usize>], n_clusters: usize) -> Option<f64> {
    if n_clusters < 2 {
        return None;
    }
    let mut sizes = vec![0usize; n_clusters];
    for l in labels.iter().flatten() {
        sizes[*l] += 1;
    }
    let mut sums = vec![0.0; n_clusters];
    let mut total = 0.0;
    let mut counted = 0usize;
    for (i, li) in labels.iter().enumerate() {
        let Some(own) = *li else { continue };
        counted += 1;
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for (j, lj) in labels.iter().enumerate() {
            if let Some(c) = lj {
                sums[*c] += matrix.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..n_clusters)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    (counted > 0).then(|| total / counted as f64)
}

/// Two-dimensional embedding of the matrix for plotting.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection2D {
    pub coords: Vec<(f64, f64)>,
    /// Share of the positive spectrum carried by each axis.
    pub explained: [f64; 2],
}

/// Classical multidimensional scaling onto the top two axes.
///
/// Each axis is flipped so its first coordinate with magnitude above 1e-12 is
/// positive.
pub fn project_2d(matrix: &AffinityMatrix) -> Result<Projection2D, ClusterError> {
    let n = matrix.len();
    if n < 3 {
        return Err(ClusterError::TooFewPoints(n));
    }
    let squared = DMatrix::from_fn(n, n, |i, j| {
        let d = matrix.get(i, j);
        d * d
    });
    let row_means: Vec<f64> = (0..n).map(|i| squared.row(i).sum() / n as f64).collect();
    let grand = row_means.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| -0.5 * (squared[(i, j)] - row_means[i] - row_means[j] + grand));
    let eigen = SymmetricEigen::new(gram);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]).then(a.cmp(&b)));
    let positive: f64 = eigen.eigenvalues.iter().filter(|v| **v > 0.0).sum();

    let mut axes = [vec![0.0; n], vec![0.0; n]];
    let mut explained = [0.0; 2];
    for (axis, &k) in order.iter().take(2).enumerate() {
        let value = eigen.eigenvalues[k].max(0.0);
        let scale = libm::sqrt(value);
        let column = eigen.eigenvectors.column(k);
        let flip = column
            .iter()
            .find(|v| v.abs() * scale > 1e-12)
            .is_some_and(|v| *v < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        for (out, v) in axes[axis].iter_mut().zip(column.iter()) {
            *out = sign * v * scale;
        }
        explained[axis] = if positive > 0.0 { value / positive } else { 0.0 };
    }
    let [xs, ys] = axes;
    Ok(Projection2D {
        coords: xs.into_iter().zip(ys).collect(),
        explained,
    })
}

/// Clustering method swept over a one-parameter grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SweepMethod {
    /// Grid values are similarity thresholds.
    Grouping { deletion_cost: f64 },
    /// Grid values are `min_samples` counts.
    Dbscan { eps: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub param: f64,
    pub n_clusters: usize,
    pub mean_cluster_size: f64,
    pub silhouette: Option<f64>,
    pub noise: usize,
}

pub fn sweep(matrix: &AffinityMatrix, method: SweepMethod, grid: &[f64]) -> Result<Vec<SweepRow>, ClusterError> {
    if grid.is_empty() {
        return Err(ClusterError::EmptyGrid);
    }
    grid.iter()
        .map(|&param| {
            let clustering = match method {
                SweepMethod::Grouping { deletion_cost } => {
                    let cfg = SimilarityConfig::new(param, deletion_cost)
                        .map_err(|_| ClusterError::InvalidParameter(param))?;
                    grouping_cluster(matrix, &cfg)
                }
                SweepMethod::Dbscan { eps } => {
                    if !(param >= 1.0 && libm::trunc(param) == param) {
                        return Err(ClusterError::InvalidParameter(param));
                    }
                    dbscan_cluster(matrix, &DbscanConfig::new(eps, param as usize)?)
                }
            };
            Ok(SweepRow {
                param,
                n_clusters: clustering.n_clusters,
                mean_cluster_size: clustering.mean_cluster_size(),
                silhouette: clustering.silhouette,
                noise: clustering.noise_count(),
            })
        })
        .collect()
}

/// Thresholds 0.0, 0.1, ..., 1.0.
pub fn default_threshold_grid() -> Vec<f64> {
    (0..=10).map(|k| f64::from(k) / 10.0).collect()
}

/// `min_samples` values 1 through 5.
pub fn default_min_samples_grid() -> Vec<f64> {
    (1..=5).map(f64::from).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(n: usize, entries: &[(usize, usize, f64)], fill: f64) -> AffinityMatrix {
        let mut d = vec![fill; n * n];
        for i in 0..n {
            d[i * n + i] = 0.0;
        }
        for &(i, j, v) in entries {
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
        AffinityMatrix::from_row_major(n, d).unwrap()
    }

    #[test]
    fn disjoint_set_merges() {
        let mut s = DisjointSet::new(5);
        assert!(s.union(0, 1));
        assert!(s.union(3, 4));
        assert!(!s.union(1, 0));
        assert_eq!(s.find(0), s.find(1));
        assert_ne!(s.find(1), s.find(3));
    }

    #[test]
    fn grouping_endpoints() {
        let m = matrix(4, &[(0, 1, 0.2)], 0.9);
        let all = grouping_cluster(&m, &SimilarityConfig::with_threshold(0.0).unwrap());
        assert_eq!(all.n_clusters, 1);
        assert_eq!(all.silhouette, None);
        let strict = grouping_cluster(&m, &SimilarityConfig::with_threshold(1.0).unwrap());
        assert_eq!(strict.n_clusters, 4);
        assert_eq!(strict.labels, vec![Some(0), Some(1), Some(2), Some(3)]);
    }

    #[test]
    fn grouping_is_transitive() {
        // a~b, b~c, a!~c at T = 0.5
        let m = matrix(3, &[(0, 1, 0.4), (1, 2, 0.4), (0, 2, 0.8)], 0.0);
        let c = grouping_cluster(&m, &SimilarityConfig::with_threshold(0.5).unwrap());
        assert_eq!(c.labels, vec![Some(0); 3]);
    }

    #[test]
    fn grouping_labels_by_smallest_member() {
        let m = matrix(4, &[(0, 2, 0.1), (1, 3, 0.1)], 0.9);
        let c = grouping_cluster(&m, &SimilarityConfig::with_threshold(0.5).unwrap());
        assert_eq!(c.labels, vec![Some(0), Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn dbscan_dense_triple_and_outlier() {
        let m = matrix(4, &[(0, 1, 0.4), (0, 2, 0.4), (1, 2, 0.4)], 0.9);
        let c = dbscan_cluster(&m, &DbscanConfig::new(0.5, 3).unwrap());
        assert_eq!(c.labels, vec![Some(0), Some(0), Some(0), None]);
        assert_eq!(c.n_clusters, 1);
        assert_eq!(c.noise_count(), 1);
    }

    #[test]
    fn dbscan_min_samples_one_has_no_noise() {
        let m = matrix(5, &[(0, 1, 0.3), (1, 2, 0.5), (3, 4, 0.45)], 0.9);
        let c = dbscan_cluster(&m, &DbscanConfig::new(0.5, 1).unwrap());
        assert_eq!(c.noise_count(), 0);
        assert_eq!(c.labels, vec![Some(0), Some(0), Some(0), Some(1), Some(1)]);
    }

    #[test]
    fn dbscan_border_joins_lowest_core() {
        // cores 2 and 4 only; point 3 borders both
        let close = [(0, 1), (0, 2), (1, 2), (4, 5), (4, 6), (5, 6)];
        let mut entries: Vec<_> = close.iter().map(|&(i, j)| (i, j, 0.1)).collect();
        entries.extend([(2, 3, 0.5), (3, 4, 0.5)]);
        let m = matrix(7, &entries, 0.95);
        let c = dbscan_cluster(&m, &DbscanConfig::new(0.5, 4).unwrap());
        assert_eq!(
            c.labels,
            vec![Some(0), Some(0), Some(0), Some(0), Some(1), Some(1), Some(1)]
        );
    }

    #[test]
    fn dbscan_config_validation() {
        assert!(DbscanConfig::new(0.0, 1).is_err());
        assert!(DbscanConfig::new(0.5, 0).is_err());
    }

    #[test]
    fn silhouette_duplicate_pairs() {
        let m = matrix(4, &[(0, 1, 0.0), (2, 3, 0.0)], 0.8);
        let c = grouping_cluster(&m, &SimilarityConfig::with_threshold(0.5).unwrap());
        assert_eq!(c.n_clusters, 2);
        assert_eq!(c.silhouette, Some(1.0));
        assert_eq!(silhouette(&m, &c).unwrap(), Some(1.0));
    }

    #[test]
    fn silhouette_singletons_and_noise() {
        let m = matrix(4, &[(0, 1, 0.2)], 0.6);
        let c = Clustering {
            labels: vec![Some(0), Some(0), Some(1), None],
            method: Method::Grouping { threshold: 0.5 },
            n_clusters: 2,
            silhouette: None,
        };
        // points 0,1: a = 0.2, b = 0.6 -> 2/3 each; point 2 singleton -> 0
        let s = silhouette(&m, &c).unwrap().unwrap();
        assert!((s - (4.0 / 3.0) / 3.0).abs() < 1e-12);

        let bad = Clustering { labels: vec![Some(0)], ..c };
        assert!(silhouette(&m, &bad).is_err());
    }

    #[test]
    fn projection_of_equilateral_triangle() {
        let m = matrix(3, &[], 0.5);
        let p = project_2d(&m).unwrap();
        let dist = |a: (f64, f64), b: (f64, f64)| libm::hypot(a.0 - b.0, a.1 - b.1);
        let d01 = dist(p.coords[0], p.coords[1]);
        let d12 = dist(p.coords[1], p.coords[2]);
        let d02 = dist(p.coords[0], p.coords[2]);
        assert!((d01 - 0.5).abs() < 1e-6);
        assert!((d12 - 0.5).abs() < 1e-6);
        assert!((d02 - 0.5).abs() < 1e-6);
        assert!((p.explained[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn projection_duplicates_and_errors() {
        let m = matrix(4, &[(0, 1, 0.0), (0, 2, 0.3), (1, 2, 0.3)], 0.7);
        let p = project_2d(&m).unwrap();
        assert!((p.coords[0].0 - p.coords[1].0).abs() < 1e-9);
        assert!((p.coords[0].1 - p.coords[1].1).abs() < 1e-9);
        assert_eq!(project_2d(&matrix(2, &[], 0.5)), Err(ClusterError::TooFewPoints(2)));
    }

    #[test]
    fn sweep_rows() {
        let m = matrix(4, &[(0, 1, 0.0), (2, 3, 0.0)], 0.8);
        let rows = sweep(&m, SweepMethod::Grouping { deletion_cost: 1.0 }, &[0.0, 1.0]).unwrap();
        assert_eq!(rows[0].n_clusters, 1);
        assert_eq!(rows[0].mean_cluster_size, 4.0);
        assert_eq!(rows[0].silhouette, None);
        assert_eq!(rows[1].n_clusters, 2);
        assert!(sweep(&m, SweepMethod::Dbscan { eps: 0.5 }, &[]).is_err());
        assert!(sweep(&m, SweepMethod::Dbscan { eps: 0.5 }, &[1.5]).is_err());
        let rows = sweep(&m, SweepMethod::Dbscan { eps: 0.5 }, &default_min_samples_grid()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[2].noise, 4);
    }
}
