//! Closed-form combinatorial bounds and their checks against exact values.

use serde::{Deserialize, Serialize};

use crate::dp::{achievable_table, leaf_profile, max_disjoint_pairs, node_profile, witness};
use crate::oracle::{self, FULL_ENUMERATION_CAP};
use crate::tree::{black_counts, build_tree, count_dichromatic, Coloring};
use crate::{Caps, Error, Result};

/// The leaf count `a(m)` whose dichromatic value is at least `ceil(m/2)`.
///
/// Odd `m`: `1 + 2 + 2^3 + ... + 2^{m-2}`; even `m`: `1 + 2^2 + ... + 2^{m-2}`;
/// `a(1) = 1` and `a(2) = 1`.
pub fn a_of_m(m: u32) -> Result<u64> {
    if m < 1 {
        return Err(Error::invalid("a(m) needs m >= 1"));
    }
    if m > 63 {
        return Err(Error::invalid("a(m) overflows 64 bits for m > 63"));
    }
    let mut a = 1u64;
    let mut j = if m % 2 == 1 { 1 } else { 2 };
    while j + 2 <= m {
        a += 1 << j;
        j += 2;
    }
    Ok(a)
}

/// `ceil(m / 2)`.
pub fn theorem_leaf_bound(m: u32) -> u32 {
    m.div_ceil(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardinalityBound {
    Exact(u128),
    ExceedsRange,
}

impl CardinalityBound {
    /// Whether `count` is within the bound.
    pub fn admits(&self, count: usize) -> bool {
        match *self {
            CardinalityBound::Exact(v) => count as u128 <= v,
            CardinalityBound::ExceedsRange => true,
        }
    }
}

/// `2^d * m^d`.
pub fn lemma_cardinality_bound(m: u64, d: u32) -> CardinalityBound {
    let base = match 2u128.checked_mul(m as u128) {
        Some(b) => b,
        None => return CardinalityBound::ExceedsRange,
    };
    match base.checked_pow(d) {
        Some(v) => CardinalityBound::Exact(v),
        None => CardinalityBound::ExceedsRange,
    }
}

/// Concrete `b(m)`: the smallest `b` maximising `d'_m(b)`, with that maximum.
pub fn best_black_count(m: u32, caps: &Caps) -> Result<(usize, u32)> {
    let p = node_profile(m, caps)?;
    let mut best = (p.first_index(), 0);
    for (b, d) in p.iter() {
        if d > best.1 {
            best = (b, d);
        }
    }
    Ok(best)
}

/// `max(0, ceil((k - |b - b_m|) / 5))`.
pub fn disjoint_pairs_guarantee(k: u64, b: u64, b_m: u64) -> u64 {
    k.saturating_sub(b.abs_diff(b_m)).div_ceil(5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Lemma22,
    Thm27,
    LipschitzNode,
    LipschitzLeaf,
    Cor25,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Lemma22,
        Check::Thm27,
        Check::LipschitzNode,
        Check::LipschitzLeaf,
        Check::Cor25,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Lemma22 => "lemma22",
            Check::Thm27 => "thm27",
            Check::LipschitzNode => "lipschitz_node",
            Check::LipschitzLeaf => "lipschitz_leaf",
            Check::Cor25 => "cor25",
        }
    }
}

impl std::str::FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown check '{s}'")))
    }
}

/// Outcome of checking one bound at one depth.
///
/// `index` names the tightest place found (a `d`, `t` or `b`, depending on
/// the check) when the check scans a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub m: u32,
    pub quantity: String,
    pub paper_bound: f64,
    pub computed_value: f64,
    pub holds: bool,
    pub index: Option<u64>,
}

pub fn verify(m: u32, which: Check, caps: &Caps) -> Result<BoundReport> {
    build_tree(m)?;
    match which {
        Check::Lemma22 => verify_cardinality(m, caps),
        Check::Thm27 => verify_leaf_bound(m, caps),
        Check::LipschitzNode => {
            let p = node_profile(m, caps)?;
            Ok(lipschitz_report(m, "lipschitz_node", p.first_index(), p.values()))
        }
        Check::LipschitzLeaf => {
            let p = leaf_profile(m, caps)?;
            Ok(lipschitz_report(m, "lipschitz_leaf", p.first_index(), p.values()))
        }
        Check::Cor25 => verify_pair_guarantee(m, caps),
    }
}

/// Reports the `d` with the least slack `2^d m^d - #B_m(d)`.
fn verify_cardinality(m: u32, caps: &Caps) -> Result<BoundReport> {
    let table = achievable_table(m, caps)?;
    let mut holds = true;
    let mut tightest: Option<(u128, usize, usize, u128)> = None;
    for d in 0..=table.max_d() {
        let count = table.set(d).members.len();
        let bound = lemma_cardinality_bound(m as u64, d as u32);
        holds &= bound.admits(count);
        if let CardinalityBound::Exact(v) = bound {
            let slack = v.saturating_sub(count as u128);
            if tightest.is_none_or(|(s, ..)| slack < s) {
                tightest = Some((slack, d, count, v));
            }
        }
    }
    let (_, d, count, bound) = tightest.expect("d = 0 always has a finite bound");
    Ok(BoundReport {
        m,
        quantity: "#B_m(d) <= 2^d m^d".into(),
        paper_bound: bound as f64,
        computed_value: count as f64,
        holds,
        index: Some(d as u64),
    })
}

fn verify_leaf_bound(m: u32, caps: &Caps) -> Result<BoundReport> {
    let a = a_of_m(m)? as usize;
    let computed = leaf_profile(m, caps)?
        .get(a)
        .expect("a(m) <= 2^m");
    let bound = theorem_leaf_bound(m);
    Ok(BoundReport {
        m,
        quantity: "d_m(a(m)) >= ceil(m/2)".into(),
        paper_bound: bound as f64,
        computed_value: computed as f64,
        holds: computed >= bound,
        index: Some(a as u64),
    })
}

/// Largest `|f(t) - f(s)| / |t - s|` over all index pairs, which must not
/// exceed one.
fn lipschitz_report(m: u32, name: &str, first: usize, values: &[u32]) -> BoundReport {
    let mut worst = 0.0f64;
    let mut at = first;
    let mut holds = true;
    for s in 0..values.len() {
        for t in s + 1..values.len() {
            let diff = values[t].abs_diff(values[s]) as usize;
            let gap = t - s;
            holds &= diff <= gap;
            let ratio = diff as f64 / gap as f64;
            if ratio > worst {
                worst = ratio;
                at = s + first;
            }
        }
    }
    BoundReport {
        m,
        quantity: format!("{name}: |f(t) - f(s)| <= |t - s|"),
        paper_bound: 1.0,
        computed_value: worst,
        holds,
        index: Some(at as u64),
    }
}

/// Checks both halves of the disjoint-pairs corollary with `b(m)` from
/// [`best_black_count`]:
///
/// * `d'_m(b) >= k - |b - b(m)|` for every `b`, and
/// * every checked coloring with `b` black nodes has at least
///   [`disjoint_pairs_guarantee`] disjoint dichromatic pairs.
///
/// All colorings are checked when `m <= 3`, the profile witnesses otherwise.
/// `computed_value` is the least slack (matching size minus guarantee).
fn verify_pair_guarantee(m: u32, caps: &Caps) -> Result<BoundReport> {
    let profile = node_profile(m, caps)?;
    let (b_m, k) = best_black_count(m, caps)?;
    let (k, b_m) = (k as u64, b_m as u64);

    let mut holds = profile
        .iter()
        .all(|(b, d)| d as u64 + (b as u64).abs_diff(b_m) >= k);

    let mut worst: Option<(i64, usize)> = None;
    let mut check = |c: &Coloring| {
        let (b, _) = black_counts(c);
        if b == 0 {
            return;
        }
        let pairs = max_disjoint_pairs(c).0 as i64;
        let slack = pairs - disjoint_pairs_guarantee(k, b as u64, b_m) as i64;
        if worst.is_none_or(|(s, _)| slack < s) {
            worst = Some((slack, b));
        }
    };
    if m <= FULL_ENUMERATION_CAP {
        let tree = build_tree(m)?;
        for mask in 0u64..(1 << tree.node_count()) {
            check(&Coloring::from_mask(tree, mask)?);
        }
    } else {
        for (b, _) in profile.iter() {
            check(&witness(&profile, b)?);
        }
    }
    let (slack, b) = worst.expect("at least one coloring checked");
    holds &= slack >= 0;
    Ok(BoundReport {
        m,
        quantity: "disjoint dichromatic pairs >= (k - |b - b(m)|)/5".into(),
        paper_bound: 0.0,
        computed_value: slack as f64,
        holds,
        index: Some(b as u64),
    })
}

/// Sanity: the oracle and the dynamic program agree on `T_m` (small `m`).
pub fn oracle_agrees(m: u32, caps: &Caps) -> Result<bool> {
    let full = oracle::enumerate_full(m)?;
    let node = node_profile(m, caps)?;
    let leaf = leaf_profile(m, caps)?;
    let nodes_ok = node
        .iter()
        .all(|(b, d)| full.min_d_by_b.get(&b) == Some(&(d as usize)));
    let leaves_ok = leaf
        .iter()
        .all(|(t, d)| full.min_d_by_t.get(&t) == Some(&(d as usize)));
    let witnesses_ok = full
        .witnesses
        .iter()
        .all(|(&(_, d), w)| count_dichromatic(w).0 == d);
    Ok(nodes_ok && leaves_ok && witnesses_ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_of_m_values() {
        assert_eq!(a_of_m(1).unwrap(), 1);
        assert_eq!(a_of_m(2).unwrap(), 1);
        assert_eq!(a_of_m(3).unwrap(), 3);
        assert_eq!(a_of_m(4).unwrap(), 5);
        assert_eq!(a_of_m(5).unwrap(), 11);
        assert_eq!(a_of_m(6).unwrap(), 21);
        assert!(a_of_m(0).is_err());
    }

    #[test]
    fn a_of_m_recursion_and_range() {
        for m in 3..=40u32 {
            let prime = (m % 2 == 0) as u64;
            assert_eq!(a_of_m(m).unwrap() - 1, 2 * (a_of_m(m - 1).unwrap() - prime));
        }
        for m in 1..=63 {
            let a = a_of_m(m).unwrap();
            assert!(a >= 1 && a <= 1 << m);
        }
    }

    #[test]
    fn leaf_bound_values() {
        assert_eq!(theorem_leaf_bound(1), 1);
        assert_eq!(theorem_leaf_bound(2), 1);
        assert_eq!(theorem_leaf_bound(5), 3);
    }

    #[test]
    fn cardinality_values() {
        assert_eq!(lemma_cardinality_bound(7, 0), CardinalityBound::Exact(1));
        assert_eq!(lemma_cardinality_bound(3, 2), CardinalityBound::Exact(36));
        assert_eq!(lemma_cardinality_bound(2, 3), CardinalityBound::Exact(64));
        assert_eq!(lemma_cardinality_bound(1 << 40, 10), CardinalityBound::ExceedsRange);
    }

    #[test]
    fn guarantee_values() {
        assert_eq!(disjoint_pairs_guarantee(10, 40, 40), 2);
        assert_eq!(disjoint_pairs_guarantee(10, 50, 40), 0);
        assert_eq!(disjoint_pairs_guarantee(7, 5, 3), 1);
        assert_eq!(disjoint_pairs_guarantee(0, 5, 5), 0);
    }

    #[test]
    fn guarantee_monotonicity() {
        for k in 0..30u64 {
            for gap in 0..30u64 {
                let g = disjoint_pairs_guarantee(k, 100 + gap, 100);
                assert!(g >= disjoint_pairs_guarantee(k, 100 + gap + 1, 100));
                assert!(g <= disjoint_pairs_guarantee(k + 1, 100 + gap, 100));
                assert_eq!(g, disjoint_pairs_guarantee(k, 100 - gap.min(100), 100));
            }
        }
    }

    #[test]
    fn best_black_count_depth_one() {
        assert_eq!(best_black_count(1, &Caps::default()).unwrap(), (1, 1));
    }

    #[test]
    fn verify_examples() {
        let caps = Caps::default();
        let r = verify(3, Check::Thm27, &caps).unwrap();
        assert!(r.holds);
        assert_eq!((r.computed_value, r.paper_bound), (2.0, 2.0));
        assert!(verify(2, Check::Lemma22, &caps).unwrap().holds);
        assert!(verify(10, Check::LipschitzLeaf, &caps).unwrap().holds);
        for m in 1..=6 {
            for c in Check::ALL {
                let r = verify(m, c, &caps).unwrap();
                assert!(r.holds, "{c:?} at m={m}: {r:?}");
            }
        }
    }

    #[test]
    fn verify_respects_caps() {
        let caps = Caps::default();
        assert!(verify(9, Check::Lemma22, &caps).unwrap_err().is_capacity());
        assert!(verify(15, Check::Thm27, &caps).unwrap_err().is_capacity());
    }

    #[test]
    fn check_names_parse() {
        for c in Check::ALL {
            assert_eq!(c.name().parse::<Check>().unwrap(), c);
        }
        assert!("lemma23".parse::<Check>().is_err());
    }

    #[test]
    fn oracle_and_dp_agree_small() {
        for m in 1..=3 {
            assert!(oracle_agrees(m, &Caps::default()).unwrap());
        }
    }
}
