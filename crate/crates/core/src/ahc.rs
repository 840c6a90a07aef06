//! Reference agglomerative hierarchical clustering.
//!
//! A plain quadratic closest-pair merger over an explicit dissimilarity
//! matrix. It exists to verify the prefix tree: cutting its single-linkage
//! dendrogram at `base^-k` must reproduce the tree's depth-`k` partitions,
//! and its cophenetic distances must recover an ultrametric input matrix
//! entrywise. It is capped at desk scale by default and makes no attempt
//! to be fast.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::{baire_distance, encode, BaireParams, CodecError};

/// Default upper bound on matrix size accepted by [`agglomerate`].
pub const DEFAULT_MAX_OBSERVATIONS: usize = 2000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AhcError {
    #[error("matrix rows must all have length {expected}, row {row} has {got}")]
    NotSquare {
        expected: usize,
        row: usize,
        got: usize,
    },
    #[error("dissimilarity({i}, {j}) = {value} is not finite and non-negative")]
    InvalidEntry { i: usize, j: usize, value: f64 },
    #[error("matrix is asymmetric at ({i}, {j}): {a} != {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },
    #[error("diagonal entry {i} is {value}, expected 0")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("{n} observations exceed the reference-implementation cap of {cap}")]
    TooManyObservations { n: usize, cap: usize },
    #[error("leaf {0} is not part of this dendrogram")]
    UnknownLeaf(usize),
}

/// Inter-cluster dissimilarity rule applied when two clusters merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Minimum dissimilarity over all cross-cluster pairs.
    Single,
    /// Maximum dissimilarity over all cross-cluster pairs.
    Complete,
}

impl Linkage {
    fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            Linkage::Single => a.min(b),
            Linkage::Complete => a.max(b),
        }
    }
}

/// A validated symmetric dissimilarity matrix with a zero diagonal and
/// finite, non-negative entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DissimilarityMatrix {
    /// Validate and take ownership of a full square matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, AhcError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(AhcError::NotSquare {
                    expected: n,
                    row: i,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let m = DissimilarityMatrix { n, data };
        for i in 0..n {
            let diag = m.get(i, i);
            if diag != 0.0 {
                return Err(AhcError::NonZeroDiagonal { i, value: diag });
            }
            for j in (i + 1)..n {
                let d = m.get(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(AhcError::InvalidEntry { i, j, value: d });
                }
                let mirror = m.get(j, i);
                if mirror != d {
                    return Err(AhcError::Asymmetric {
                        i,
                        j,
                        a: d,
                        b: mirror,
                    });
                }
            }
        }
        Ok(m)
    }

    /// Build from a pairwise function, symmetric by construction.
    pub fn from_fn<F>(n: usize, mut dissimilarity: F) -> Result<Self, AhcError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dissimilarity(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(AhcError::InvalidEntry { i, j, value: d });
                }
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Ok(DissimilarityMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Pairwise Baire distances of a value list, ready for [`agglomerate`].
pub fn baire_matrix(
    values: &[f64],
    params: &BaireParams,
) -> Result<DissimilarityMatrix, CodecError> {
    let encoded = values
        .iter()
        .map(|&v| encode(v, params))
        .collect::<Result<Vec<_>, _>>()?;
    let mut data = vec![0.0; values.len() * values.len()];
    let n = values.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = baire_distance(&encoded[i], &encoded[j])?;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    Ok(DissimilarityMatrix { n, data })
}

/// One agglomeration event. Cluster labels follow the usual stepwise
/// convention: leaves are `0..n`, and the `i`-th merge creates cluster
/// `n + i`. `a < b` always.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub level: f64,
    pub size: usize,
}

/// A stepwise dendrogram: the indexed hierarchy produced by agglomerative
/// clustering, with one merge event per internal node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    n_leaves: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Level of the lowest cluster containing both leaves: the ultrametric
    /// induced by the hierarchy. `cophenetic(a, a)` is 0.
    pub fn cophenetic(&self, a: usize, b: usize) -> Result<f64, AhcError> {
        if a >= self.n_leaves {
            return Err(AhcError::UnknownLeaf(a));
        }
        if b >= self.n_leaves {
            return Err(AhcError::UnknownLeaf(b));
        }
        if a == b {
            return Ok(0.0);
        }
        // parent[c] = merge index that absorbed cluster c.
        let mut parent = vec![usize::MAX; self.n_leaves + self.merges.len()];
        for (idx, m) in self.merges.iter().enumerate() {
            parent[m.a] = idx;
            parent[m.b] = idx;
        }
        let mut on_a_path = vec![false; self.merges.len()];
        let mut c = a;
        while parent[c] != usize::MAX {
            let p = parent[c];
            on_a_path[p] = true;
            c = self.n_leaves + p;
        }
        let mut c = b;
        while parent[c] != usize::MAX {
            let p = parent[c];
            if on_a_path[p] {
                return Ok(self.merges[p].level);
            }
            c = self.n_leaves + p;
        }
        // Unreachable on a complete dendrogram: the final merge contains
        // every leaf.
        Err(AhcError::UnknownLeaf(b))
    }

    /// Full cophenetic matrix, computed by replaying the merge sequence.
    pub fn cophenetic_matrix(&self) -> DissimilarityMatrix {
        let n = self.n_leaves;
        let mut data = vec![0.0; n * n];
        let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
        members.resize(n + self.merges.len(), None);
        for (idx, m) in self.merges.iter().enumerate() {
            let left = members[m.a].take().expect("merge references live cluster");
            let right = members[m.b].take().expect("merge references live cluster");
            for &x in &left {
                for &y in &right {
                    data[x * n + y] = m.level;
                    data[y * n + x] = m.level;
                }
            }
            let mut joined = left;
            joined.extend(right);
            members[n + idx] = Some(joined);
        }
        DissimilarityMatrix { n, data }
    }

    /// The merge list in a plain JSON form for inspection:
    /// `{n_leaves, merges: [{a, b, level, size}]}` with levels in
    /// positional decimal.
    pub fn to_json(&self) -> serde_json::Value {
        use crate::jsonfmt::Dec;
        serde_json::json!({
            "n_leaves": self.n_leaves,
            "merges": self
                .merges
                .iter()
                .map(|m| {
                    serde_json::json!({
                        "a": m.a,
                        "b": m.b,
                        "level": Dec(m.level),
                        "size": m.size,
                    })
                })
                .collect::<Vec<_>>(),
        })
    }

    /// Partition the leaves by applying every merge with level at or below
    /// `threshold`. Clusters come back with sorted members, ordered by
    /// their smallest member.
    pub fn cut(&self, threshold: f64) -> Vec<Vec<usize>> {
        let n = self.n_leaves;
        let mut dsu = DisjointSet::new(n);
        // Representative leaf for every cluster id seen so far.
        let mut rep = (0..n).collect::<Vec<_>>();
        rep.resize(n + self.merges.len(), 0);
        for (idx, m) in self.merges.iter().enumerate() {
            if m.level <= threshold {
                dsu.union(rep[m.a], rep[m.b]);
            }
            rep[n + idx] = rep[m.a];
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for leaf in 0..n {
            groups.entry(dsu.find(leaf)).or_default().push(leaf);
        }
        let mut clusters: Vec<Vec<usize>> = groups.into_values().collect();
        clusters.sort_by_key(|c| c[0]);
        clusters
    }
}

/// Greedy closest-pair agglomeration under the default observation cap.
///
/// Validation of symmetry and non-negativity lives on
/// [`DissimilarityMatrix`]; the merge order among tied closest pairs is
/// fixed by the lexicographically smallest `(min id, max id)` pair, so the
/// output is deterministic.
pub fn agglomerate(matrix: &DissimilarityMatrix, linkage: Linkage) -> Result<Dendrogram, AhcError> {
    agglomerate_with(matrix, linkage, DEFAULT_MAX_OBSERVATIONS)
}

/// [`agglomerate`] with an explicit observation cap.
pub fn agglomerate_with(
    matrix: &DissimilarityMatrix,
    linkage: Linkage,
    max_observations: usize,
) -> Result<Dendrogram, AhcError> {
    let n = matrix.n;
    if n > max_observations {
        return Err(AhcError::TooManyObservations {
            n,
            cap: max_observations,
        });
    }
    if n <= 1 {
        return Ok(Dendrogram {
            n_leaves: n,
            merges: Vec::new(),
        });
    }

    // Working state indexed by "slot" (initial row index). A merge keeps
    // the lower slot and deactivates the higher one.
    let mut work = matrix.data.clone();
    let mut active = vec![true; n];
    let mut cluster_id: Vec<usize> = (0..n).collect();
    let mut size = vec![1usize; n];

    // Best candidate paired with each active slot, cached per row. The
    // candidate key (level, min id, max id) is strictly ordered because the
    // id pair identifies the pair uniquely.
    #[derive(Clone, Copy)]
    struct Candidate {
        level: f64,
        lo: usize,
        hi: usize,
        other_slot: usize,
    }
    impl Candidate {
        fn key(&self) -> (f64, usize, usize) {
            (self.level, self.lo, self.hi)
        }
    }

    let row_best = |work: &[f64], active: &[bool], ids: &[usize], i: usize| -> Candidate {
        let mut best: Option<Candidate> = None;
        for j in 0..n {
            if i == j || !active[j] {
                continue;
            }
            let (lo, hi) = order(ids[i], ids[j]);
            let cand = Candidate {
                level: work[i * n + j],
                lo,
                hi,
                other_slot: j,
            };
            if best.is_none_or(|b| cand.key() < b.key()) {
                best = Some(cand);
            }
        }
        best.expect("at least two active slots")
    };

    let mut nearest: Vec<Candidate> = (0..n)
        .map(|i| row_best(&work, &active, &cluster_id, i))
        .collect();

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        // Global closest pair, via the per-row caches.
        let mut best_slot = usize::MAX;
        for i in 0..n {
            if active[i] && (best_slot == usize::MAX || nearest[i].key() < nearest[best_slot].key())
            {
                best_slot = i;
            }
        }
        let cand = nearest[best_slot];
        let (keep, drop) = order(best_slot, cand.other_slot);
        let new_size = size[keep] + size[drop];
        merges.push(Merge {
            a: cand.lo,
            b: cand.hi,
            level: cand.level,
            size: new_size,
        });

        for x in 0..n {
            if x == keep || x == drop || !active[x] {
                continue;
            }
            let updated = linkage.combine(work[keep * n + x], work[drop * n + x]);
            work[keep * n + x] = updated;
            work[x * n + keep] = updated;
        }
        active[drop] = false;
        cluster_id[keep] = n + step;
        size[keep] = new_size;

        if step + 1 == n - 1 {
            break;
        }
        nearest[keep] = row_best(&work, &active, &cluster_id, keep);
        for x in 0..n {
            if x == keep || !active[x] {
                continue;
            }
            if nearest[x].other_slot == keep || nearest[x].other_slot == drop {
                nearest[x] = row_best(&work, &active, &cluster_id, x);
            } else {
                let (lo, hi) = order(cluster_id[x], cluster_id[keep]);
                let cand = Candidate {
                    level: work[x * n + keep],
                    lo,
                    hi,
                    other_slot: keep,
                };
                if cand.key() < nearest[x].key() {
                    nearest[x] = cand;
                }
            }
        }
    }
    Ok(Dendrogram {
        n_leaves: n,
        merges,
    })
}

fn order(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}
