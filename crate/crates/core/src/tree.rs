//! One-pass m-adic prefix tree over encoded digit strings.
//!
//! Each observation is bucketed once per level: level 0 partitions by sign
//! and integer digits, level `k` by the first `k` fractional digits. The
//! populated depth-`k` nodes are exactly the Baire clusters at distance
//! `base^-k`, so the whole hierarchy costs `n * (max_depth + 1)` bucketing
//! operations — one scan, no pairwise comparisons.
//!
//! Nodes live in a hash map keyed by digit path rather than a preallocated
//! `base^depth` array; real data populates a vanishing fraction of the
//! potential nodes.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::{encode, BaireParams, CodecError, DigitString, Sign};

pub type ObservationId = u64;

#[derive(Debug, Error)]
pub enum TreeError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("max_depth {depth} exceeds encoding precision {precision}")]
    DepthExceedsPrecision { depth: usize, precision: usize },
    #[error("depth {depth} is out of range, tree has max_depth {max_depth}")]
    DepthOutOfRange { depth: usize, max_depth: usize },
    #[error("duplicate observation id {0}")]
    DuplicateId(ObservationId),
    #[error("unknown observation id {0}")]
    UnknownId(ObservationId),
    #[error("member ids are not materialized under policy {0:?}")]
    MembersNotMaterialized(MemberPolicy),
    #[error("failed to read or write tree file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed tree file: {0}")]
    Malformed(String),
}

/// Level-0 bucket: the sign and integer digits shared by a subtree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RootKey {
    pub sign: Sign,
    pub int_digits: Vec<u8>,
}

impl RootKey {
    fn of(digits: &DigitString) -> Self {
        RootKey {
            sign: digits.sign(),
            int_digits: digits.int_digits().to_vec(),
        }
    }
}

impl Ord for RootKey {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Sign, then digit count, then digits: numeric order within each
        // sign class (integer digits carry no leading zeros).
        (self.sign, self.int_digits.len(), &self.int_digits).cmp(&(
            other.sign,
            other.int_digits.len(),
            &other.int_digits,
        ))
    }
}

impl PartialOrd for RootKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Digit path identifying one node: a level-0 root key plus one fractional
/// digit per level below it.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodePath {
    #[serde(flatten)]
    pub root: RootKey,
    pub frac: Vec<u8>,
}

impl NodePath {
    pub fn depth(&self) -> usize {
        self.frac.len()
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        self.root == other.root && other.frac.starts_with(&self.frac)
    }

    /// Textual form for reports: `+0.437` in bases up to 10, digits joined
    /// with `-` above that.
    pub fn render(&self, base: u32) -> String {
        let sign = match self.root.sign {
            Sign::Plus => '+',
            Sign::Minus => '-',
        };
        let join = |digits: &[u8]| -> String {
            if base <= 10 {
                digits.iter().map(|d| char::from(b'0' + d)).collect()
            } else {
                digits
                    .iter()
                    .map(|d| d.to_string())
                    .collect::<Vec<_>>()
                    .join("-")
            }
        };
        if self.frac.is_empty() {
            format!("{sign}{}", join(&self.root.int_digits))
        } else {
            format!("{sign}{}.{}", join(&self.root.int_digits), join(&self.frac))
        }
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(10))
    }
}

/// Where to keep explicit member id lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MemberPolicy {
    /// Counts only. Cheapest; membership queries are unavailable.
    None,
    /// Ids at max-depth leaves, counts elsewhere. Interior membership is
    /// recovered by subtree traversal. Default.
    #[default]
    Leaves,
    /// Ids at every level. Memory grows with `depth * n`.
    AllLevels,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NodeData {
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<Vec<ObservationId>>,
}

/// A populated node, as returned by queries.
#[derive(Debug, Clone, PartialEq)]
pub struct BaireNode {
    pub path: NodePath,
    pub count: u64,
    /// Present when the node materializes ids under the tree's policy.
    pub member_ids: Option<Vec<ObservationId>>,
}

/// The m-adic prefix tree. Built in one pass; immutable afterwards, so
/// shared references may be read from any number of threads.
#[derive(Debug, Clone)]
pub struct BaireTree {
    params: BaireParams,
    max_depth: usize,
    policy: MemberPolicy,
    nodes: HashMap<NodePath, NodeData>,
    items: HashMap<ObservationId, NodePath>,
    n_items: u64,
    rejected: Vec<ObservationId>,
    bucket_ops: u64,
}

impl BaireTree {
    /// Bucket every `(id, value)` pair into its digit path, one level at a
    /// time. Non-finite values are skipped and reported in
    /// [`rejected_ids`](Self::rejected_ids); duplicate ids are an error.
    pub fn build<I>(
        values: I,
        params: BaireParams,
        max_depth: usize,
        policy: MemberPolicy,
    ) -> Result<Self, TreeError>
    where
        I: IntoIterator<Item = (ObservationId, f64)>,
    {
        if max_depth > params.precision() {
            return Err(TreeError::DepthExceedsPrecision {
                depth: max_depth,
                precision: params.precision(),
            });
        }
        let mut tree = BaireTree {
            params,
            max_depth,
            policy,
            nodes: HashMap::new(),
            items: HashMap::new(),
            n_items: 0,
            rejected: Vec::new(),
            bucket_ops: 0,
        };
        let values = values.into_iter();
        // Pre-size the maps so mid-build rehashes do not dominate large
        // builds. The node map tends toward a small multiple of n on
        // continuous data; twice n covers the leaf layer plus interiors.
        let (expected, _) = values.size_hint();
        tree.items.reserve(expected);
        tree.nodes.reserve(expected.saturating_mul(2));
        for (id, value) in values {
            tree.insert(id, value)?;
        }
        Ok(tree)
    }

    fn insert(&mut self, id: ObservationId, value: f64) -> Result<(), TreeError> {
        let digits = match encode(value, &self.params) {
            Ok(d) => d,
            Err(CodecError::NonFinite(_)) => {
                self.rejected.push(id);
                return Ok(());
            }
            Err(e) => return Err(e.into()),
        };
        if self.items.contains_key(&id) {
            return Err(TreeError::DuplicateId(id));
        }

        let frac = &digits.frac_digits()[..self.max_depth];
        let mut path = NodePath {
            root: RootKey::of(&digits),
            frac: Vec::with_capacity(self.max_depth),
        };
        for level in 0..=self.max_depth {
            if level > 0 {
                path.frac.push(frac[level - 1]);
            }
            self.bucket_ops += 1;
            let materialize = match self.policy {
                MemberPolicy::None => false,
                MemberPolicy::Leaves => level == self.max_depth,
                MemberPolicy::AllLevels => true,
            };
            match self.nodes.get_mut(&path) {
                Some(node) => {
                    node.count += 1;
                    if materialize {
                        node.members.as_mut().expect("policy is per-level").push(id);
                    }
                }
                None => {
                    let members = materialize.then(|| vec![id]);
                    self.nodes
                        .insert(path.clone(), NodeData { count: 1, members });
                }
            }
        }
        self.items.insert(id, path);
        self.n_items += 1;
        Ok(())
    }

    pub fn params(&self) -> &BaireParams {
        &self.params
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn member_policy(&self) -> MemberPolicy {
        self.policy
    }

    pub fn n_items(&self) -> u64 {
        self.n_items
    }

    /// Ids of inserted observations that were rejected as non-finite.
    pub fn rejected_ids(&self) -> &[ObservationId] {
        &self.rejected
    }

    /// Total digit-bucketing operations performed during the build:
    /// exactly `n_items * (max_depth + 1)`.
    pub fn bucket_ops(&self) -> u64 {
        self.bucket_ops
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Iterate populated nodes in arbitrary order as
    /// `(path, count, materialized members)`.
    pub fn nodes(&self) -> impl Iterator<Item = (&NodePath, u64, Option<&[ObservationId]>)> {
        self.nodes
            .iter()
            .map(|(path, data)| (path, data.count, data.members.as_deref()))
    }

    /// The node on `value`'s digit path at `depth`, if populated.
    pub fn cluster_of(&self, value: f64, depth: usize) -> Result<Option<BaireNode>, TreeError> {
        if depth > self.max_depth {
            return Err(TreeError::DepthOutOfRange {
                depth,
                max_depth: self.max_depth,
            });
        }
        let digits = encode(value, &self.params)?;
        let path = NodePath {
            root: RootKey::of(&digits),
            frac: digits.frac_digits()[..depth].to_vec(),
        };
        Ok(self.nodes.get(&path).map(|data| BaireNode {
            path: path.clone(),
            count: data.count,
            member_ids: data.members.clone(),
        }))
    }

    /// All populated nodes at `depth`, in canonical path order. Counts sum
    /// to `n_items`.
    pub fn level_partition(&self, depth: usize) -> Result<Vec<(NodePath, u64)>, TreeError> {
        if depth > self.max_depth {
            return Err(TreeError::DepthOutOfRange {
                depth,
                max_depth: self.max_depth,
            });
        }
        let mut out: Vec<(NodePath, u64)> = self
            .nodes
            .iter()
            .filter(|(path, _)| path.depth() == depth)
            .map(|(path, data)| (path.clone(), data.count))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Member ids in the subtree rooted at `path`, sorted. Recovers
    /// interior membership from the max-depth leaves.
    pub fn members_under(&self, path: &NodePath) -> Result<Vec<ObservationId>, TreeError> {
        if self.policy == MemberPolicy::None {
            return Err(TreeError::MembersNotMaterialized(self.policy));
        }
        if let Some(data) = self.nodes.get(path) {
            if let Some(members) = &data.members {
                let mut ids = members.clone();
                ids.sort_unstable();
                return Ok(ids);
            }
        }
        let mut ids: Vec<ObservationId> = self
            .nodes
            .iter()
            .filter(|(leaf, _)| leaf.depth() == self.max_depth && path.is_prefix_of(leaf))
            .flat_map(|(_, data)| data.members.as_deref().unwrap_or(&[]).iter().copied())
            .collect();
        ids.sort_unstable();
        Ok(ids)
    }

    /// Baire distance between two inserted observations, read off the tree
    /// as `base^-k` for the depth `k` of their deepest common node. Agrees
    /// exactly with the digit codec at precision `max_depth`.
    pub fn induced_ultrametric(
        &self,
        a: ObservationId,
        b: ObservationId,
    ) -> Result<f64, TreeError> {
        let pa = self.items.get(&a).ok_or(TreeError::UnknownId(a))?;
        let pb = self.items.get(&b).ok_or(TreeError::UnknownId(b))?;
        if pa.root != pb.root {
            return Ok(self.params.level_distance(0));
        }
        let depth = pa
            .frac
            .iter()
            .zip(pb.frac.iter())
            .take_while(|(x, y)| x == y)
            .count();
        Ok(self.params.level_distance(depth))
    }

    /// Serialize to the documented JSON form:
    /// `{params, max_depth, member_policy, n_items, nodes: [{path, count, members?}]}`
    /// with nodes in canonical `(depth, path)` order.
    pub fn to_json(&self) -> serde_json::Value {
        let mut nodes: Vec<(&NodePath, &NodeData)> = self.nodes.iter().collect();
        nodes.sort_by_key(|(path, _)| (path.depth(), (*path).clone()));
        let nodes: Vec<NodeFile> = nodes
            .into_iter()
            .map(|(path, data)| NodeFile {
                path: path.clone(),
                count: data.count,
                members: data.members.clone(),
            })
            .collect();
        let file = TreeFile {
            params: self.params,
            max_depth: self.max_depth,
            member_policy: self.policy,
            n_items: self.n_items,
            nodes,
        };
        serde_json::to_value(&file).expect("tree file form serializes")
    }

    pub fn save(&self, path: &Path) -> Result<(), TreeError> {
        let mut out = serde_json::to_string_pretty(&self.to_json())
            .map_err(|e| TreeError::Malformed(e.to_string()))?;
        out.push('\n');
        std::fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, TreeError> {
        let text = std::fs::read_to_string(path)?;
        let file: TreeFile =
            serde_json::from_str(&text).map_err(|e| TreeError::Malformed(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: TreeFile) -> Result<Self, TreeError> {
        let mut nodes = HashMap::with_capacity(file.nodes.len());
        let mut items = HashMap::new();
        for node in file.nodes {
            if node.path.depth() > file.max_depth {
                return Err(TreeError::Malformed(format!(
                    "node {} deeper than max_depth {}",
                    node.path, file.max_depth
                )));
            }
            let digit_ok = node
                .path
                .root
                .int_digits
                .iter()
                .chain(node.path.frac.iter())
                .all(|&d| u32::from(d) < file.params.base());
            if !digit_ok {
                return Err(TreeError::Malformed(format!(
                    "digit out of base range in {}",
                    node.path
                )));
            }
            if node.path.depth() == file.max_depth {
                if let Some(members) = &node.members {
                    for &id in members {
                        if items.insert(id, node.path.clone()).is_some() {
                            return Err(TreeError::Malformed(format!("id {id} in two leaves")));
                        }
                    }
                }
            }
            if nodes
                .insert(
                    node.path.clone(),
                    NodeData {
                        count: node.count,
                        members: node.members,
                    },
                )
                .is_some()
            {
                return Err(TreeError::Malformed(format!(
                    "duplicate node {}",
                    node.path
                )));
            }
        }
        let tree = BaireTree {
            params: file.params,
            max_depth: file.max_depth,
            policy: file.member_policy,
            nodes,
            items,
            n_items: file.n_items,
            rejected: Vec::new(),
            bucket_ops: 0,
        };
        tree.check_counts()?;
        Ok(tree)
    }

    /// Structural invariant: every interior node's count equals the sum of
    /// its children's counts, and each full level sums to `n_items`.
    pub fn check_counts(&self) -> Result<(), TreeError> {
        let mut child_sums: HashMap<NodePath, u64> = HashMap::new();
        let mut level_sums = vec![0u64; self.max_depth + 1];
        for (path, data) in &self.nodes {
            level_sums[path.depth()] += data.count;
            if path.depth() > 0 {
                let parent = NodePath {
                    root: path.root.clone(),
                    frac: path.frac[..path.depth() - 1].to_vec(),
                };
                *child_sums.entry(parent).or_insert(0) += data.count;
            }
        }
        for (path, data) in &self.nodes {
            if path.depth() < self.max_depth {
                let sum = child_sums.get(path).copied().unwrap_or(0);
                if sum != data.count {
                    return Err(TreeError::Malformed(format!(
                        "node {} has count {} but children sum to {sum}",
                        path, data.count
                    )));
                }
            }
        }
        for (depth, &sum) in level_sums.iter().enumerate() {
            if sum != self.n_items {
                return Err(TreeError::Malformed(format!(
                    "level {depth} counts sum to {sum}, expected n_items {}",
                    self.n_items
                )));
            }
        }
        Ok(())
    }
}

/// Potential node count at `depth` when level 1 is restricted to
/// `level1_alphabet` digits and deeper levels use the full base.
pub fn potential_nodes(depth: usize, level1_alphabet: u32, base: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    u64::from(level1_alphabet) * u64::from(base).pow(depth as u32 - 1)
}

#[derive(Serialize, Deserialize)]
struct TreeFile {
    params: BaireParams,
    max_depth: usize,
    member_policy: MemberPolicy,
    n_items: u64,
    nodes: Vec<NodeFile>,
}

#[derive(Serialize, Deserialize)]
struct NodeFile {
    path: NodePath,
    count: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<Vec<ObservationId>>,
}
