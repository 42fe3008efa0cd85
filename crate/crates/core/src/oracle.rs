//! Exhaustive ground truth for small trees.
//!
//! Nothing here shares code with [`crate::dp`]; the routines are meant to be
//! slow and obviously correct.

use std::collections::{BTreeMap, BTreeSet};

use crate::tree::{build_tree, count_dichromatic, Coloring, EdgeSet, TreeShape};
use crate::{Error, Result};

/// Largest depth for full enumeration (`2^15` colorings).
pub const FULL_ENUMERATION_CAP: u32 = 3;
/// Largest depth for leaf-constrained enumeration.
pub const LEAF_ENUMERATION_CAP: u32 = 4;

/// Everything there is to know about the colorings of a small `T_m`.
#[derive(Debug, Clone)]
pub struct FullProfile {
    pub m: u32,
    /// Every `(b, d)` realised by some coloring with `b >= 1`.
    pub achievable: BTreeSet<(usize, usize)>,
    /// Lexicographically smallest coloring realising each achievable pair.
    pub witnesses: BTreeMap<(usize, usize), Coloring>,
    /// `b -> min d` for `1 <= b <= node_count`.
    pub min_d_by_b: BTreeMap<usize, usize>,
    /// `t -> min d` for `0 <= t <= leaf_count`.
    pub min_d_by_t: BTreeMap<usize, usize>,
}

impl FullProfile {
    /// The slice `B_m(d)`.
    pub fn b_set(&self, d: usize) -> BTreeSet<usize> {
        self.achievable
            .iter()
            .filter(|&&(_, dd)| dd == d)
            .map(|&(b, _)| b)
            .collect()
    }
}

fn mask_dichromatic(mask: u64, n: usize) -> usize {
    (2..=n)
        .filter(|&c| (mask >> (c - 1) & 1) != (mask >> (c / 2 - 1) & 1))
        .count()
}

/// Reverses the low `n` bits so that numeric order matches heap-order
/// lexicographic order of colorings.
fn lex_key(mask: u64, n: usize) -> u64 {
    mask.reverse_bits() >> (64 - n)
}

pub fn enumerate_full(m: u32) -> Result<FullProfile> {
    if m > FULL_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "exhaustive enumeration (use the dynamic program)",
            requested: m,
            cap: FULL_ENUMERATION_CAP,
        });
    }
    let tree = build_tree(m)?;
    let n = tree.node_count();
    let leaf_shift = tree.first_leaf() - 1;

    let mut best: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut min_d_by_b = BTreeMap::new();
    let mut min_d_by_t: BTreeMap<usize, usize> = BTreeMap::new();

    for mask in 0u64..(1 << n) {
        let d = mask_dichromatic(mask, n);
        let b = mask.count_ones() as usize;
        let t = (mask >> leaf_shift).count_ones() as usize;

        let e = min_d_by_t.entry(t).or_insert(d);
        *e = (*e).min(d);
        if b == 0 {
            continue;
        }
        let e = min_d_by_b.entry(b).or_insert(d);
        *e = (*e).min(d);
        best.entry((b, d))
            .and_modify(|w| {
                if lex_key(mask, n) < lex_key(*w, n) {
                    *w = mask
                }
            })
            .or_insert(mask);
    }

    let witnesses = best
        .iter()
        .map(|(&k, &mask)| Ok((k, Coloring::from_mask(tree, mask)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(FullProfile {
        m,
        achievable: best.keys().copied().collect(),
        witnesses,
        min_d_by_b,
        min_d_by_t,
    })
}

/// Exact `d_m(t)` with a lexicographically smallest witness.
///
/// For `m <= 3` every coloring with `t` black leaves is visited. For `m = 4`
/// the leaf patterns are enumerated and, per pattern, the internal colors are
/// optimised by exhausting the two colors of each internal node bottom-up
/// (no black-count bookkeeping is involved).
pub fn enumerate_leaf_constrained(m: u32, t: usize) -> Result<(usize, Coloring)> {
    if m > LEAF_ENUMERATION_CAP {
        return Err(Error::Capacity {
            what: "leaf-constrained enumeration (use the dynamic program)",
            requested: m,
            cap: LEAF_ENUMERATION_CAP,
        });
    }
    let tree = build_tree(m)?;
    if t > tree.leaf_count() {
        return Err(Error::invalid(format!(
            "t = {t} exceeds the {} leaves of T_{m}",
            tree.leaf_count()
        )));
    }
    if m <= FULL_ENUMERATION_CAP {
        leaf_constrained_full(tree, t)
    } else {
        leaf_constrained_by_pattern(tree, t)
    }
}

fn leaf_constrained_full(tree: TreeShape, t: usize) -> Result<(usize, Coloring)> {
    let n = tree.node_count();
    let leaf_shift = tree.first_leaf() - 1;
    let mut best: Option<(usize, u64)> = None;
    for mask in 0u64..(1 << n) {
        if (mask >> leaf_shift).count_ones() as usize != t {
            continue;
        }
        let d = mask_dichromatic(mask, n);
        let better = match best {
            None => true,
            Some((bd, bm)) => d < bd || (d == bd && lex_key(mask, n) < lex_key(bm, n)),
        };
        if better {
            best = Some((d, mask));
        }
    }
    let (d, mask) = best.expect("some coloring has t black leaves");
    Ok((d, Coloring::from_mask(tree, mask)?))
}

fn leaf_constrained_by_pattern(tree: TreeShape, t: usize) -> Result<(usize, Coloring)> {
    let n = tree.node_count();
    let leaves = tree.leaf_count();
    let first_leaf = tree.first_leaf();
    let mut best: Option<(usize, Vec<bool>)> = None;
    // cost[v][c]: fewest dichromatic edges inside the subtree of v when v has color c.
    let mut cost = vec![[0usize; 2]; n + 1];

    for pattern in 0u64..(1 << leaves) {
        if pattern.count_ones() as usize != t {
            continue;
        }
        let mut colors = vec![false; n + 1];
        for k in 0..leaves {
            colors[first_leaf + k] = pattern >> k & 1 == 1;
        }
        for v in (first_leaf..=n).rev() {
            cost[v] = if colors[v] { [usize::MAX, 0] } else { [0, usize::MAX] };
        }
        for v in (1..first_leaf).rev() {
            for c in 0..2 {
                cost[v][c] = [2 * v, 2 * v + 1]
                    .iter()
                    .map(|&ch| edge_cost(c, &cost[ch]).0)
                    .sum();
            }
        }
        let d = cost[1][0].min(cost[1][1]);
        // Top-down in heap order, keep white whenever an optimum allows it.
        colors[1] = cost[1][0] > cost[1][1];
        for v in 2..first_leaf {
            colors[v] = edge_cost(colors[v / 2] as usize, &cost[v]).1 == 1;
        }
        let candidate = colors[1..].to_vec();
        let better = match &best {
            None => true,
            Some((bd, bc)) => d < *bd || (d == *bd && candidate < *bc),
        };
        if better {
            best = Some((d, candidate));
        }
    }
    let (d, colors) = best.expect("some leaf pattern has t black leaves");
    Ok((d, Coloring::from_bools(tree, &colors)?))
}

/// Cheapest way to hang a child subtree below a parent of color `parent`:
/// returns the cost and the child color (white on ties).
fn edge_cost(parent: usize, child: &[usize; 2]) -> (usize, usize) {
    let via = |c: usize| child[c].saturating_add((c != parent) as usize);
    if via(0) <= via(1) {
        (via(0), 0)
    } else {
        (via(1), 1)
    }
}

/// Largest set of vertex-disjoint dichromatic edges, by trying every subset
/// of the dichromatic edges. Only sensible when there are few of them.
pub fn brute_force_max_matching(coloring: &Coloring) -> usize {
    let (d, EdgeSet { edges }) = count_dichromatic(coloring);
    assert!(d <= 24, "brute force matching over {d} edges is too slow");
    let mut best = 0;
    for subset in 0u32..(1 << d) {
        let size = subset.count_ones() as usize;
        if size <= best {
            continue;
        }
        let mut used = std::collections::HashSet::new();
        let disjoint = (0..d)
            .filter(|&i| subset >> i & 1 == 1)
            .all(|i| used.insert(edges[i].0) && used.insert(edges[i].1));
        if disjoint {
            best = size;
        }
    }
    best
}
