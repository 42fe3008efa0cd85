//! Subtree dynamic programs over `T_m`.
//!
//! Every subtree of `T_m` rooted at height `h` is a copy of `T_h`, so the
//! tables are built once per height rather than once per node. A table maps
//! `(root color, black count)` to the fewest dichromatic edges inside the
//! subtree; two copies of the height `h - 1` table are merged by a min-plus
//! knapsack convolution restricted to counts the subtrees can hold, which
//! costs `O(n^2)` overall.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::tree::{Coloring, EdgeSet, TreeShape};
use crate::{Caps, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    /// Indexed by the number `b` of black nodes, `1 <= b <= 2^{m+1} - 1`.
    Node,
    /// Indexed by the number `t` of black leaves, `0 <= t <= 2^m`.
    Leaf,
}

const WHITE: usize = 0;
const BLACK: usize = 1;

/// Minimal dichromatic edges per root color and count, for one subtree height.
#[derive(Debug, Clone)]
struct LevelTable {
    /// `cost[c][k]`; `None` marks an unreachable combination.
    cost: [Vec<Option<u32>>; 2],
    /// Black count of the left child behind each finite `cost[c][k]`.
    split: [Vec<u32>; 2],
    /// `hang[p][k]`: best child color below a parent of color `p`, with the
    /// connecting edge counted, and that color.
    hang: [Vec<(Option<u32>, u8)>; 2],
}

impl LevelTable {
    fn leaf() -> Self {
        let cost = [vec![Some(0), None], vec![None, Some(0)]];
        let split = [vec![0; 2], vec![0; 2]];
        let hang = Self::hang_of(&cost);
        LevelTable { cost, split, hang }
    }

    fn hang_of(cost: &[Vec<Option<u32>>; 2]) -> [Vec<(Option<u32>, u8)>; 2] {
        let len = cost[0].len();
        let pick = |parent: usize, k: usize| {
            let via = |c: usize| cost[c][k].map(|x| x + (c != parent) as u32);
            match (via(WHITE), via(BLACK)) {
                (Some(w), Some(b)) if b < w => (Some(b), BLACK as u8),
                (Some(w), _) => (Some(w), WHITE as u8),
                (None, b) => (b, BLACK as u8),
            }
        };
        [
            (0..len).map(|k| pick(WHITE, k)).collect(),
            (0..len).map(|k| pick(BLACK, k)).collect(),
        ]
    }

    /// Merges two children of this table's height under a new root.
    /// `counts_self` says whether a black root adds to the count.
    fn parent(&self, counts_self: bool, parent_len: usize) -> Self {
        let mut cost = [vec![None; parent_len], vec![None; parent_len]];
        let mut split = [vec![0u32; parent_len], vec![0u32; parent_len]];
        for c in [WHITE, BLACK] {
            let own = if counts_self { c } else { 0 };
            let hang = &self.hang[c];
            for (kl, &(left, _)) in hang.iter().enumerate() {
                let Some(left) = left else { continue };
                for (kr, &(right, _)) in hang.iter().enumerate() {
                    let Some(right) = right else { continue };
                    let k = kl + kr + own;
                    let total = left + right;
                    // Strict comparison keeps the smallest left count on ties.
                    if cost[c][k].is_none_or(|cur| total < cur) {
                        cost[c][k] = Some(total);
                        split[c][k] = kl as u32;
                    }
                }
            }
        }
        let hang = Self::hang_of(&cost);
        LevelTable { cost, split, hang }
    }
}

/// Back-pointers sufficient to rebuild an optimal coloring for every index.
#[derive(Debug, Clone)]
pub struct WitnessSeed {
    levels: Vec<LevelTable>,
}

/// Exact minimal dichromatic-edge counts for one depth and constraint kind.
#[derive(Debug, Clone)]
pub struct DpProfile {
    tree: TreeShape,
    kind: ProfileKind,
    first_index: usize,
    min_d: Vec<u32>,
    witness_seed: WitnessSeed,
}

impl DpProfile {
    pub fn m(&self) -> u32 {
        self.tree.depth()
    }

    pub fn tree(&self) -> &TreeShape {
        &self.tree
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn last_index(&self) -> usize {
        self.first_index + self.min_d.len() - 1
    }

    pub fn get(&self, index: usize) -> Option<u32> {
        index
            .checked_sub(self.first_index)
            .and_then(|i| self.min_d.get(i).copied())
    }

    /// `(index, min_d)` pairs in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.min_d
            .iter()
            .enumerate()
            .map(|(i, &d)| (i + self.first_index, d))
    }

    pub fn values(&self) -> &[u32] {
        &self.min_d
    }
}

fn check_cap(m: u32, cap: u32, what: &'static str) -> Result<TreeShape> {
    if m > cap {
        return Err(Error::Capacity {
            what,
            requested: m,
            cap,
        });
    }
    TreeShape::with_cap(m, cap.max(m))
}

fn build_levels(m: u32, kind: ProfileKind) -> Vec<LevelTable> {
    let mut levels = vec![LevelTable::leaf()];
    for h in 1..=m {
        let len = match kind {
            ProfileKind::Node => (1usize << (h + 1)) - 1 + 1,
            ProfileKind::Leaf => (1usize << h) + 1,
        };
        let next = levels[h as usize - 1].parent(kind == ProfileKind::Node, len);
        levels.push(next);
    }
    levels
}

fn profile(m: u32, kind: ProfileKind, cap: u32) -> Result<DpProfile> {
    let what = match kind {
        ProfileKind::Node => "node-constrained profile",
        ProfileKind::Leaf => "leaf-constrained profile",
    };
    let tree = check_cap(m, cap, what)?;
    let levels = build_levels(m, kind);
    let top = levels.last().expect("at least the leaf level");
    let first_index = match kind {
        ProfileKind::Node => 1,
        ProfileKind::Leaf => 0,
    };
    let min_d = (first_index..top.cost[0].len())
        .map(|k| {
            let best = match (top.cost[WHITE][k], top.cost[BLACK][k]) {
                (Some(w), Some(b)) => w.min(b),
                (Some(x), None) | (None, Some(x)) => x,
                (None, None) => unreachable!("every count in range is realisable"),
            };
            best
        })
        .collect();
    Ok(DpProfile {
        tree,
        kind,
        first_index,
        min_d,
        witness_seed: WitnessSeed { levels },
    })
}

/// `d'_m(b)` for every `1 <= b <= 2^{m+1} - 1`.
pub fn node_profile(m: u32, caps: &Caps) -> Result<DpProfile> {
    profile(m, ProfileKind::Node, caps.node_profile)
}

/// `d_m(t)` for every `0 <= t <= 2^m`.
pub fn leaf_profile(m: u32, caps: &Caps) -> Result<DpProfile> {
    profile(m, ProfileKind::Leaf, caps.leaf_profile)
}

/// Rebuilds one optimal coloring for `index` from the profile's back-pointers.
///
/// Ties prefer a white root, then a white child, then the smallest black
/// count in the left subtree.
pub fn witness(profile: &DpProfile, index: usize) -> Result<Coloring> {
    if index < profile.first_index() || index > profile.last_index() {
        return Err(Error::invalid(format!(
            "index {index} outside {}..={}",
            profile.first_index(),
            profile.last_index()
        )));
    }
    let levels = &profile.witness_seed.levels;
    let m = profile.m() as usize;
    let top = &levels[m];
    let root_color = match (top.cost[WHITE][index], top.cost[BLACK][index]) {
        (Some(w), Some(b)) if b < w => BLACK,
        (Some(_), _) => WHITE,
        _ => BLACK,
    };
    let counts_self = profile.kind == ProfileKind::Node;

    let mut coloring = Coloring::all_white(profile.tree);
    // (node, height, color, count)
    let mut stack = vec![(1usize, m, root_color, index)];
    while let Some((v, h, c, k)) = stack.pop() {
        coloring.set(v, c == BLACK);
        if h == 0 {
            continue;
        }
        let table = &levels[h];
        let kl = table.split[c][k] as usize;
        let own = if counts_self { c } else { 0 };
        let kr = k - own - kl;
        let below = &levels[h - 1].hang[c];
        stack.push((2 * v, h - 1, below[kl].1 as usize, kl));
        stack.push((2 * v + 1, h - 1, below[kr].1 as usize, kr));
    }
    Ok(coloring)
}

/// Fixed-width bit row used for sets of dichromatic counts.
#[derive(Debug, Clone, PartialEq, Eq)]
struct BitRow {
    words: Vec<u64>,
}

impl BitRow {
    fn new(bits: usize) -> Self {
        BitRow {
            words: vec![0; bits.div_ceil(64).max(1)],
        }
    }

    fn singleton(bits: usize, at: usize) -> Self {
        let mut r = Self::new(bits);
        r.insert(at);
        r
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn contains(&self, i: usize) -> bool {
        self.words.get(i / 64).is_some_and(|w| w >> (i % 64) & 1 == 1)
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    wi * 64 + b
                })
            })
        })
    }

    /// `self |= other << shift`, truncated to `self`'s width.
    fn or_shifted(&mut self, other: &BitRow, shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in other.words.iter().enumerate() {
            if w == 0 {
                continue;
            }
            let lo = i + ws;
            if lo < self.words.len() {
                self.words[lo] |= w << bs;
            }
            if bs != 0 && lo + 1 < self.words.len() {
                self.words[lo + 1] |= w >> (64 - bs);
            }
        }
    }

    /// `self |= { a + b : a in x, b in y }`.
    fn or_sumset(&mut self, x: &BitRow, y: &BitRow) {
        for a in x.ones() {
            self.or_shifted(y, a);
        }
    }
}

/// The whole `(b, d)` feasibility table of `T_m`.
#[derive(Debug, Clone)]
pub struct AchievableTable {
    m: u32,
    /// `by_b[b]`: the dichromatic counts realisable with `b` black nodes.
    by_b: Vec<BitRow>,
}

impl AchievableTable {
    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn max_d(&self) -> usize {
        (1usize << (self.m + 1)) - 2
    }

    /// `B_m(d)` (only `b >= 1`).
    pub fn set(&self, d: usize) -> AchievableSet {
        let members = (1..self.by_b.len())
            .filter(|&b| self.by_b[b].contains(d))
            .collect();
        AchievableSet {
            m: self.m,
            d,
            members,
        }
    }

    pub fn contains(&self, b: usize, d: usize) -> bool {
        b >= 1 && self.by_b.get(b).is_some_and(|r| r.contains(d))
    }

    /// All achievable `(b, d)` pairs with `b >= 1`, sorted.
    pub fn pairs(&self) -> BTreeSet<(usize, usize)> {
        (1..self.by_b.len())
            .flat_map(|b| self.by_b[b].ones().map(move |d| (b, d)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AchievableSet {
    pub m: u32,
    pub d: usize,
    pub members: BTreeSet<usize>,
}

pub fn achievable_table(m: u32, caps: &Caps) -> Result<AchievableTable> {
    check_cap(m, caps.achievable, "achievable (b, d) table")?;
    // sets[c][k] for the current height.
    let width = |h: u32| (1usize << (h + 1)) - 1; // max edges + 1
    let mut sets: [Vec<BitRow>; 2] = [
        vec![BitRow::singleton(1, 0), BitRow::new(1)],
        vec![BitRow::new(1), BitRow::singleton(1, 0)],
    ];
    for h in 1..=m {
        let child_len = sets[0].len();
        let bits = width(h);
        let hang: [Vec<BitRow>; 2] = [WHITE, BLACK].map(|p| {
            (0..child_len)
                .map(|k| {
                    let mut r = BitRow::new(bits);
                    r.or_shifted(&sets[p][k], 0);
                    r.or_shifted(&sets[1 - p][k], 1);
                    r
                })
                .collect()
        });
        let len = width(h) + 1;
        let mut next: [Vec<BitRow>; 2] = [vec![BitRow::new(bits); len], vec![BitRow::new(bits); len]];
        for c in [WHITE, BLACK] {
            for kl in 0..child_len {
                if hang[c][kl].is_empty() {
                    continue;
                }
                for kr in 0..child_len {
                    if hang[c][kr].is_empty() {
                        continue;
                    }
                    let (x, y) = (&hang[c][kl], &hang[c][kr]);
                    next[c][kl + kr + c].or_sumset(x, y);
                }
            }
        }
        sets = next;
    }
    let by_b = (0..sets[0].len())
        .map(|b| {
            let mut r = sets[WHITE][b].clone();
            r.or_shifted(&sets[BLACK][b], 0);
            r
        })
        .collect();
    Ok(AchievableTable { m, by_b })
}

/// `B_m(d)`: black-node counts `b >= 1` realisable with exactly `d`
/// dichromatic edges.
pub fn achievable_set(m: u32, d: usize, caps: &Caps) -> Result<AchievableSet> {
    let max_d = (1usize << (m.min(62) + 1)) - 2;
    if d > max_d {
        return Err(Error::invalid(format!(
            "d = {d} exceeds the {max_d} edges of T_{m}"
        )));
    }
    Ok(achievable_table(m, caps)?.set(d))
}

/// Maximum set of vertex-disjoint dichromatic edges.
///
/// Bottom-up greedy leaf matching, which is exact on forests: every edge is
/// visited after all edges below its child, and is taken whenever both ends
/// are still free.
pub fn max_disjoint_pairs(coloring: &Coloring) -> (usize, EdgeSet) {
    max_matching_where(coloring.tree(), |p, c| {
        coloring.is_black(p) != coloring.is_black(c)
    })
}

/// Maximum matching of `tree` using only the edges in `allowed`.
pub fn max_matching_within(tree: &TreeShape, allowed: &EdgeSet) -> (usize, EdgeSet) {
    let ok: std::collections::HashSet<(usize, usize)> = allowed.edges.iter().copied().collect();
    max_matching_where(tree, |p, c| ok.contains(&(p, c)))
}

fn max_matching_where(tree: &TreeShape, allowed: impl Fn(usize, usize) -> bool) -> (usize, EdgeSet) {
    let n = tree.node_count();
    let mut matched = vec![false; n + 1];
    let mut edges = Vec::new();
    for c in (2..=n).rev() {
        let p = c / 2;
        if !matched[c] && !matched[p] && allowed(p, c) {
            matched[c] = true;
            matched[p] = true;
            edges.push((p, c));
        }
    }
    edges.reverse();
    (edges.len(), EdgeSet { edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{black_counts, build_tree, count_dichromatic};
    use proptest::prelude::*;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn depth_one_node_profile() {
        let p = node_profile(1, &caps()).unwrap();
        assert_eq!(p.iter().collect::<Vec<_>>(), vec![(1, 1), (2, 1), (3, 0)]);
    }

    #[test]
    fn all_black_is_free() {
        for m in 1..=8 {
            let p = node_profile(m, &caps()).unwrap();
            assert_eq!(p.get((1 << (m + 1)) - 1), Some(0));
            let l = leaf_profile(m, &caps()).unwrap();
            assert_eq!(l.get(0), Some(0));
            assert_eq!(l.get(1 << m), Some(0));
        }
    }

    #[test]
    fn leaf_values() {
        assert_eq!(leaf_profile(2, &caps()).unwrap().get(1), Some(1));
        assert!(leaf_profile(5, &caps()).unwrap().get(11).unwrap() >= 3);
    }

    #[test]
    fn caps_are_enforced() {
        assert!(node_profile(15, &caps()).unwrap_err().is_capacity());
        assert!(leaf_profile(15, &caps()).unwrap_err().is_capacity());
        assert!(achievable_table(9, &caps()).unwrap_err().is_capacity());
        assert!(node_profile(0, &caps()).is_err());
    }

    #[test]
    fn witness_examples() {
        let p = node_profile(1, &caps()).unwrap();
        let tree = build_tree(1).unwrap();
        assert_eq!(witness(&p, 3).unwrap(), Coloring::all_black(tree));
        assert!(witness(&p, 0).is_err());
        assert!(witness(&p, 4).is_err());

        let l = leaf_profile(2, &caps()).unwrap();
        let w = witness(&l, 1).unwrap();
        assert_eq!(black_counts(&w).1, 1);
        assert_eq!(count_dichromatic(&w).0, 1);
    }

    #[test]
    fn witnesses_realise_profiles() {
        for m in 1..=7 {
            let p = node_profile(m, &caps()).unwrap();
            for (b, d) in p.iter() {
                let w = witness(&p, b).unwrap();
                assert_eq!(black_counts(&w).0, b);
                assert_eq!(count_dichromatic(&w).0 as u32, d);
            }
            let l = leaf_profile(m, &caps()).unwrap();
            for (t, d) in l.iter() {
                let w = witness(&l, t).unwrap();
                assert_eq!(black_counts(&w).1, t);
                assert_eq!(count_dichromatic(&w).0 as u32, d);
            }
        }
    }

    #[test]
    fn achievable_examples() {
        for m in 1..=6 {
            let s = achievable_set(m, 0, &caps()).unwrap();
            assert_eq!(s.members, [(1usize << (m + 1)) - 1].into_iter().collect());
        }
        let s = achievable_set(1, 1, &caps()).unwrap();
        assert_eq!(s.members, [1, 2].into_iter().collect());
        assert!(achievable_set(2, 7, &caps()).is_err());
    }

    #[test]
    fn achievable_table_agrees_with_profile_minima() {
        for m in 1..=5 {
            let t = achievable_table(m, &caps()).unwrap();
            let p = node_profile(m, &caps()).unwrap();
            for (b, d) in p.iter() {
                let first = (0..=t.max_d()).find(|&dd| t.contains(b, dd));
                assert_eq!(first, Some(d as usize), "m={m} b={b}");
            }
        }
    }

    #[test]
    fn bitrow_shifts() {
        let mut r = BitRow::new(200);
        let x = BitRow::singleton(200, 3);
        r.or_shifted(&x, 130);
        assert!(r.contains(133));
        let mut s = BitRow::new(200);
        let mut y = BitRow::new(200);
        y.insert(1);
        y.insert(70);
        s.or_sumset(&y, &y);
        assert_eq!(s.ones().collect::<Vec<_>>(), vec![2, 71, 140]);
    }

    #[test]
    fn matching_examples() {
        let tree = build_tree(3).unwrap();
        assert_eq!(max_disjoint_pairs(&Coloring::all_white(tree)).0, 0);
        let t1 = build_tree(1).unwrap();
        let c = Coloring::from_black_nodes(t1, &[2]).unwrap();
        let (k, e) = max_disjoint_pairs(&c);
        assert_eq!(k, 1);
        assert_eq!(e.edges, vec![(1, 2)]);
    }

    fn arb_coloring(max_m: u32) -> impl Strategy<Value = Coloring> {
        (1u32..=max_m).prop_flat_map(|m| {
            let tree = build_tree(m).unwrap();
            proptest::collection::vec(any::<bool>(), tree.node_count())
                .prop_map(move |v| Coloring::from_bools(tree, &v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matching_is_valid_and_meets_fifth(c in arb_coloring(7)) {
            let (k, pairs) = max_disjoint_pairs(&c);
            let (d, dich) = count_dichromatic(&c);
            prop_assert_eq!(k, pairs.len());
            prop_assert!(pairs.is_vertex_disjoint());
            prop_assert!(pairs.edges.iter().all(|e| dich.edges.contains(e)));
            prop_assert!(5 * k >= d);
        }

        #[test]
        fn restricted_matching_matches_full_when_all_allowed(c in arb_coloring(6)) {
            let (_, dich) = count_dichromatic(&c);
            prop_assert_eq!(max_matching_within(c.tree(), &dich), max_disjoint_pairs(&c));
        }
    }
}
