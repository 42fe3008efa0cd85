//! The full binary tree `T_m` and its 2-colorings.
//!
//! Nodes use heap indexing: node `1` is the root, node `i` has children `2i`
//! and `2i + 1`, and the leaves are exactly `2^m ..= 2^{m+1} - 1`. No
//! adjacency is stored.

use std::cmp::Ordering;
use std::fmt;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Caps, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeShape {
    depth: u32,
}

/// Builds `T_m` under the default node cap.
pub fn build_tree(m: u32) -> Result<TreeShape> {
    TreeShape::with_cap(m, Caps::default().tree)
}

impl TreeShape {
    pub fn with_cap(m: u32, cap: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("tree depth m must be at least 1"));
        }
        if m > cap {
            return Err(Error::Capacity {
                what: "tree",
                requested: m,
                cap,
            });
        }
        Ok(TreeShape { depth: m })
    }

    #[inline]
    pub fn depth(&self) -> u32 {
        self.depth
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        (1usize << (self.depth + 1)) - 1
    }

    #[inline]
    pub fn leaf_count(&self) -> usize {
        1usize << self.depth
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.node_count() - 1
    }

    /// Index of the first leaf.
    #[inline]
    pub fn first_leaf(&self) -> usize {
        self.leaf_count()
    }

    #[inline]
    pub fn contains(&self, node: usize) -> bool {
        node >= 1 && node <= self.node_count()
    }

    #[inline]
    pub fn is_leaf(&self, node: usize) -> bool {
        node >= self.first_leaf() && node <= self.node_count()
    }

    #[inline]
    pub fn parent(&self, node: usize) -> Option<usize> {
        (node > 1).then_some(node / 2)
    }

    /// Level of depth of `node` (root is level 0, leaves level `m`).
    #[inline]
    pub fn level(&self, node: usize) -> u32 {
        usize::BITS - 1 - node.leading_zeros()
    }

    pub fn degree(&self, node: usize) -> Result<usize> {
        Ok(self.neighbors(node)?.len())
    }

    /// Parent (if any) followed by the children (if any).
    pub fn neighbors(&self, node: usize) -> Result<Vec<usize>> {
        if !self.contains(node) {
            return Err(Error::invalid(format!(
                "node {node} is outside 1..={}",
                self.node_count()
            )));
        }
        let mut out = Vec::with_capacity(3);
        if let Some(p) = self.parent(node) {
            out.push(p);
        }
        if !self.is_leaf(node) {
            out.push(2 * node);
            out.push(2 * node + 1);
        }
        Ok(out)
    }

    /// All `(parent, child)` edges, ordered by child index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> {
        (2..=self.node_count()).map(|c| (c / 2, c))
    }
}

/// A set of tree edges given as `(parent, child)` pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSet {
    pub edges: Vec<(usize, usize)>,
}

impl EdgeSet {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Checks that every pair is an edge of `tree`.
    pub fn is_valid_for(&self, tree: &TreeShape) -> bool {
        self.edges
            .iter()
            .all(|&(p, c)| tree.contains(c) && c >= 2 && c / 2 == p)
    }

    /// True when no two edges share an endpoint.
    pub fn is_vertex_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.edges.len() * 2);
        self.edges
            .iter()
            .all(|&(p, c)| seen.insert(p) && seen.insert(c))
    }
}

/// A black/white assignment to the nodes of a tree. Bit `i - 1` holds node `i`
/// and a set bit means black.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Coloring {
    tree: TreeShape,
    bits: BitVec<u64, Lsb0>,
}

impl Coloring {
    pub fn all_white(tree: TreeShape) -> Self {
        Coloring {
            tree,
            bits: bitvec![u64, Lsb0; 0; tree.node_count()],
        }
    }

    pub fn all_black(tree: TreeShape) -> Self {
        Coloring {
            tree,
            bits: bitvec![u64, Lsb0; 1; tree.node_count()],
        }
    }

    /// Builds a coloring from per-node colors in heap order (`true` = black).
    pub fn from_bools(tree: TreeShape, colors: &[bool]) -> Result<Self> {
        if colors.len() != tree.node_count() {
            return Err(Error::invalid(format!(
                "coloring has {} entries, tree has {} nodes",
                colors.len(),
                tree.node_count()
            )));
        }
        Ok(Coloring {
            tree,
            bits: colors.iter().copied().collect(),
        })
    }

    /// Builds a coloring from a mask where bit `i - 1` is node `i`. Only
    /// usable for trees with at most 64 nodes.
    pub fn from_mask(tree: TreeShape, mask: u64) -> Result<Self> {
        let n = tree.node_count();
        if n > 64 {
            return Err(Error::invalid("mask colorings need at most 64 nodes"));
        }
        if n < 64 && mask >> n != 0 {
            return Err(Error::invalid("mask has bits beyond the last node"));
        }
        let mut c = Coloring::all_white(tree);
        for i in 0..n {
            c.bits.set(i, mask >> i & 1 == 1);
        }
        Ok(c)
    }

    /// Colors the listed nodes black and everything else white.
    pub fn from_black_nodes(tree: TreeShape, black: &[usize]) -> Result<Self> {
        let mut c = Coloring::all_white(tree);
        for &v in black {
            if !tree.contains(v) {
                return Err(Error::invalid(format!("node {v} is not in the tree")));
            }
            c.set(v, true);
        }
        Ok(c)
    }

    #[inline]
    pub fn tree(&self) -> &TreeShape {
        &self.tree
    }

    #[inline]
    pub fn is_black(&self, node: usize) -> bool {
        self.bits[node - 1]
    }

    #[inline]
    pub fn set(&mut self, node: usize, black: bool) {
        self.bits.set(node - 1, black);
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    /// Swaps every color.
    pub fn complement(&self) -> Self {
        Coloring {
            tree: self.tree,
            bits: !self.bits.clone(),
        }
    }

    /// Exchanges the colorings of the two subtrees hanging below `node`.
    pub fn swap_subtrees(&self, node: usize) -> Result<Self> {
        if !self.tree.contains(node) || self.tree.is_leaf(node) {
            return Err(Error::invalid(format!("node {node} is not internal")));
        }
        let mut out = self.clone();
        let (mut left, mut right) = (2 * node, 2 * node + 1);
        let mut width = 1;
        while left <= self.tree.node_count() {
            for k in 0..width {
                out.set(left + k, self.is_black(right + k));
                out.set(right + k, self.is_black(left + k));
            }
            left *= 2;
            right = left + 2 * width;
            width *= 2;
        }
        Ok(out)
    }

    pub fn black_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones().map(|i| i + 1)
    }

    /// Heap-order lexicographic comparison (node 1 first, white before black).
    pub fn lex_cmp(&self, other: &Coloring) -> Ordering {
        debug_assert_eq!(self.tree, other.tree);
        for (a, b) in self.bits.iter().by_vals().zip(other.bits.iter().by_vals()) {
            match a.cmp(&b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }
}

impl fmt::Debug for Coloring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coloring(m={}, ", self.tree.depth)?;
        for b in self.bits.iter().by_vals() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

impl Serialize for Coloring {
    /// `{"m": .., "bits": "0110.."}` with one character per node in heap order.
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let bits: String = self
            .bits
            .iter()
            .by_vals()
            .map(|b| if b { '1' } else { '0' })
            .collect();
        let mut st = serializer.serialize_struct("Coloring", 2)?;
        st.serialize_field("m", &self.tree.depth)?;
        st.serialize_field("bits", &bits)?;
        st.end()
    }
}

/// Number of dichromatic edges together with the edges themselves.
pub fn count_dichromatic(coloring: &Coloring) -> (usize, EdgeSet) {
    let edges: Vec<_> = coloring
        .tree
        .edges()
        .filter(|&(p, c)| coloring.is_black(p) != coloring.is_black(c))
        .collect();
    (edges.len(), EdgeSet { edges })
}

/// `(b, t)`: black nodes and black leaves.
pub fn black_counts(coloring: &Coloring) -> (usize, usize) {
    let b = coloring.bits.count_ones();
    let t = coloring.bits[coloring.tree.first_leaf() - 1..].count_ones();
    (b, t)
}
