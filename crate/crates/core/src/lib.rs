/*!
Longest-common-prefix (Baire) ultrametric clustering for numeric data.

The Baire distance between two numbers is `base^-k`, where `k` is the
number of leading digits the two numbers share once both are written as
fixed-precision digit strings. It is an ultrametric, so reading the digits
of every observation into an m-adic prefix tree produces a hierarchical
clustering in a single pass over the data — linear in the number of
observations, versus the quadratic cost of pairwise agglomerative
clustering.

The crate is organised around that contrast:

* [`digits`] — scalar-to-digit-string codec, prefix comparison, and the
  Baire distance itself.
* [`tree`] — the one-pass m-adic prefix tree ([`BaireTree`]) with
  membership and per-level partition queries.
* [`ahc`] — a deliberately plain quadratic agglomerative clusterer
  ([`agglomerate`]) producing a [`Dendrogram`]; it exists as a reference
  against which the tree is verified, not as something to scale.
* [`redshift`] — CSV catalog ingestion and per-record prefix-coincidence
  analytics for paired spectrometric/photometric redshifts.
* [`regression`] — clusterwise nearest-neighbor regression: k-NN
  restricted to the query's prefix cluster, falling back up the tree.
* [`synth`] — seeded synthetic catalog generation for fixtures and
  benchmarks.
* [`bench`] — wall-clock and operation-count measurements of the
  linear-vs-quadratic contrast.
*/

pub mod ahc;
pub mod bench;
pub mod digits;
pub mod jsonfmt;
pub mod redshift;
pub mod regression;
pub mod synth;
pub mod tree;

pub use ahc::{agglomerate, baire_matrix, Dendrogram, DissimilarityMatrix, Linkage};
pub use digits::{
    baire_distance, common_prefix, encode, BaireParams, CommonPrefix, DigitString, Rounding, Sign,
};
pub use tree::{BaireNode, BaireTree, MemberPolicy, NodePath, ObservationId};
