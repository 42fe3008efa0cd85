//! Exact combinatorics of 2-colorings of full binary trees, and the volume
//! model used to turn them into width and isoperimetric lower bounds.
//!
//! The crate is organised bottom-up:
//!
//! * [`tree`]: the full binary tree `T_m` in heap layout, colorings and
//!   dichromatic-edge accounting.
//! * [`oracle`]: slow exhaustive enumeration, used as ground truth.
//! * [`dp`]: polynomial subtree dynamic programs for the minimal
//!   dichromatic-edge profiles, the achievable `(b, d)` sets and maximum
//!   disjoint dichromatic pairs.
//! * [`bounds`]: closed-form combinatorial bounds and their verification.
//! * [`metric`]: region volumes of the glued-sphere model, the balanced
//!   decomposition and the two geometric lower-bound solvers.
//! * [`sweepout`]: discrete sweepout traces and slice certificates.

pub mod bounds;
pub mod dp;
pub mod error;
pub mod metric;
pub mod oracle;
pub mod sweepout;
pub mod tree;

pub use error::{Error, Result};

/// Size limits for the exponential or quadratic computations.
///
/// All limits are depths `m` of the tree `T_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Largest tree that may be materialised at all.
    pub tree: u32,
    /// Node-constrained profile (quadratic merge).
    pub node_profile: u32,
    /// Leaf-constrained profile.
    pub leaf_profile: u32,
    /// `(b, d)`-indexed achievable set table.
    pub achievable: u32,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            tree: 24,
            node_profile: 14,
            leaf_profile: 14,
            achievable: 8,
        }
    }
}

impl Caps {
    /// Replaces every dynamic-programming cap by `max_m`, leaving the tree cap
    /// alone unless `max_m` exceeds it.
    pub fn with_dp_cap(self, max_m: u32) -> Self {
        Caps {
            tree: self.tree.max(max_m),
            node_profile: max_m,
            leaf_profile: max_m,
            achievable: max_m,
        }
    }
}
