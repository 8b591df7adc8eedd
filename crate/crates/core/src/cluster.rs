//! Agglomerative hierarchical clustering of rainfall vectors.
//!
//! Inter-cluster distances are maintained with the Lance-Williams
//! recurrences, so each merge costs O(n) updates on a dense matrix. The merge
//! order is fully deterministic: among equally close pairs the one with the
//! smallest (left id, right id) wins.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::math::sqrt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClusterError {
    #[error("need at least 2 items, got {0}")]
    TooFewItems(usize),
    #[error("item {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, expected: usize, got: usize },
    #[error("distance matrix is not a valid {n}x{n} dissimilarity matrix: {reason}")]
    InvalidMatrix { n: usize, reason: &'static str },
    #[error("cluster count {k} outside 1..={n}")]
    KOutOfRange { k: usize, n: usize },
    #[error("non-finite value in item {0}")]
    NonFinite(usize),
}

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $kw:literal),+ $(,)? }) => {
        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $kw),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                $(if s.eq_ignore_ascii_case($kw) { return Ok($name::$variant); })+
                Err(alloc::format!("unknown {} `{}`", stringify!($name).to_ascii_lowercase(), s))
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Metric {
    #[default]
    Euclidean,
    #[cfg_attr(feature = "serde", serde(rename = "sqeuclidean"))]
    SquaredEuclidean,
}
keyword_enum!(Metric { Euclidean => "euclidean", SquaredEuclidean => "sqeuclidean" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Standardize {
    #[default]
    None,
    ZScore,
}
keyword_enum!(Standardize { None => "none", ZScore => "zscore" });

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Linkage {
    Single,
    Complete,
    #[default]
    Average,
    Ward,
}
keyword_enum!(Linkage { Single => "single", Complete => "complete", Average => "average", Ward => "ward" });

/// Symmetric matrix of non-negative dissimilarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistanceMatrix {
    labels: Vec<String>,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// `d` is row-major n×n.
    pub fn new(labels: Vec<String>, d: Vec<f64>) -> Result<Self, ClusterError> {
        let n = labels.len();
        if n < 2 {
            return Err(ClusterError::TooFewItems(n));
        }
        let invalid = |reason| Err(ClusterError::InvalidMatrix { n, reason });
        if d.len() != n * n {
            return invalid("wrong number of entries");
        }
        for i in 0..n {
            if d[i * n + i] != 0.0 {
                return invalid("non-zero diagonal");
            }
            for j in 0..n {
                let v = d[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return invalid("entries must be finite and non-negative");
                }
                if v != d[j * n + i] {
                    return invalid("not symmetric");
                }
            }
        }
        Ok(Self { labels, d })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.len() + j]
    }
}

/// Pairwise distances between labelled vectors, optionally after z-scoring
/// each dimension (population sd; a constant dimension contributes 0).
pub fn distance_matrix(
    items: &[(String, Vec<f64>)],
    metric: Metric,
    standardize: Standardize,
) -> Result<DistanceMatrix, ClusterError> {
    let n = items.len();
    if n < 2 {
        return Err(ClusterError::TooFewItems(n));
    }
    let dim = items[0].1.len();
    for (index, (_, v)) in items.iter().enumerate() {
        if v.len() != dim {
            return Err(ClusterError::DimensionMismatch { index, expected: dim, got: v.len() });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ClusterError::NonFinite(index));
        }
    }
    let mut rows: Vec<Vec<f64>> = items.iter().map(|(_, v)| v.clone()).collect();
    if standardize == Standardize::ZScore {
        for k in 0..dim {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n as f64;
            let var = rows.iter().map(|r| (r[k] - mean) * (r[k] - mean)).sum::<f64>() / n as f64;
            let sd = sqrt(var);
            for r in rows.iter_mut() {
                r[k] = if sd > 0.0 { (r[k] - mean) / sd } else { 0.0 };
            }
        }
    }
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let ss: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = match metric {
                Metric::Euclidean => sqrt(ss),
                Metric::SquaredEuclidean => ss,
            };
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    DistanceMatrix::new(items.iter().map(|(l, _)| l.clone()).collect(), d)
}

/// One merge. Leaves have ids `0..n`; the cluster created by step `s` gets
/// id `n + s`. `left < right` always.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub height: f64,
    pub new_id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct Dendrogram {
    pub leaf_labels: Vec<String>,
    pub linkage: Linkage,
    pub steps: Vec<MergeStep>,
}

impl Dendrogram {
    pub fn leaf_count(&self) -> usize {
        self.leaf_labels.len()
    }

    /// Children of an internal node, or `None` for a leaf.
    pub fn children(&self, id: usize) -> Option<(usize, usize)> {
        let n = self.leaf_count();
        (id >= n).then(|| {
            let s = &self.steps[id - n];
            (s.left, s.right)
        })
    }

    pub fn height(&self, id: usize) -> f64 {
        let n = self.leaf_count();
        if id < n {
            0.0
        } else {
            self.steps[id - n].height
        }
    }

    pub fn root(&self) -> usize {
        2 * self.leaf_count() - 2
    }

    /// Leaves in display order: depth-first from the root, visiting the
    /// child with the smaller id first.
    pub fn leaf_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.leaf_count());
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            match self.children(id) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(id),
            }
        }
        out
    }

    /// Leaf ids under `id`.
    pub fn members(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(id) = stack.pop() {
            match self.children(id) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(id),
            }
        }
        out.sort_unstable();
        out
    }
}

/// Flat clustering: `clusters[i]` is the 1-based cluster of leaf `i`.
/// Clusters are numbered in order of their first leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterAssignment {
    pub labels: Vec<String>,
    pub clusters: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.k];
        for (i, &c) in self.clusters.iter().enumerate() {
            g[c - 1].push(i);
        }
        g
    }
}

/// Lance-Williams update of d(i∪j, k).
fn lance_williams(linkage: Linkage, dik: f64, djk: f64, dij: f64, ni: f64, nj: f64, nk: f64) -> f64 {
    match linkage {
        Linkage::Single => dik.min(djk),
        Linkage::Complete => dik.max(djk),
        Linkage::Average => (ni * dik + nj * djk) / (ni + nj),
        Linkage::Ward => ((ni + nk) * dik + (nj + nk) * djk - nk * dij) / (ni + nj + nk),
    }
}

/// Agglomerates the items of `dm`. For Ward linkage the entries are squared
/// before the recurrence and merge heights are reported on the original
/// (unsquared) scale.
pub fn agglomerate(dm: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dm.len();
    let mut w: Vec<f64> = match linkage {
        Linkage::Ward => dm.d.iter().map(|v| v * v).collect(),
        _ => dm.d.clone(),
    };
    let mut active = vec![true; n];
    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes = vec![1usize; n];
    let mut steps = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let v = w[i * n + j];
                let (lo, hi) = if ids[i] < ids[j] { (ids[i], ids[j]) } else { (ids[j], ids[i]) };
                let better = match best {
                    None => true,
                    Some((bv, _, _, bl, bh)) => v < bv || (v == bv && (lo, hi) < (bl, bh)),
                };
                if better {
                    best = Some((v, i, j, lo, hi));
                }
            }
        }
        let (dij, i, j, left, right) = best.expect("at least two active clusters");
        let (ni, nj) = (sizes[i] as f64, sizes[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let updated = lance_williams(linkage, w[i * n + k], w[j * n + k], dij, ni, nj, sizes[k] as f64);
            // All four linkages are monotone; clamp away rounding below dij.
            let updated = updated.max(dij);
            w[i * n + k] = updated;
            w[k * n + i] = updated;
        }
        active[j] = false;
        sizes[i] += sizes[j];
        let new_id = n + step;
        ids[i] = new_id;
        let height = match linkage {
            Linkage::Ward => sqrt(dij),
            _ => dij,
        };
        steps.push(MergeStep { left, right, height, new_id, size: sizes[i] });
    }
    Dendrogram { leaf_labels: dm.labels.clone(), linkage, steps }
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn assignment_from_steps<'a>(d: &Dendrogram, steps: impl Iterator<Item = &'a MergeStep>) -> ClusterAssignment {
    let n = d.leaf_count();
    // Union-find over all 2n − 1 node ids.
    let mut set = DisjointSet::new(2 * n - 1);
    for s in steps {
        set.union(s.left, s.new_id);
        set.union(s.right, s.new_id);
    }
    let mut numbering: Vec<Option<usize>> = vec![None; 2 * n - 1];
    let mut k = 0;
    let clusters = (0..n)
        .map(|leaf| {
            let root = set.find(leaf);
            *numbering[root].get_or_insert_with(|| {
                k += 1;
                k
            })
        })
        .collect();
    ClusterAssignment { labels: d.leaf_labels.clone(), clusters, k }
}

/// Flat clustering into exactly `k` clusters by undoing the last k − 1 merges.
pub fn cut_k(d: &Dendrogram, k: usize) -> Result<ClusterAssignment, ClusterError> {
    let n = d.leaf_count();
    if k == 0 || k > n {
        return Err(ClusterError::KOutOfRange { k, n });
    }
    Ok(assignment_from_steps(d, d.steps[..n - k].iter()))
}

/// Flat clustering keeping every merge at or below `height`.
pub fn cut_height(d: &Dendrogram, height: f64) -> ClusterAssignment {
    assignment_from_steps(d, d.steps.iter().filter(|s| s.height <= height))
}
