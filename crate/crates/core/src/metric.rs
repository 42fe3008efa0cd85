//! Volume model of the glued-sphere metric attached to `T_m`.
//!
//! Each node of the tree is a round three-sphere of volume `V0` with one
//! geodesic ball of volume `mu` removed per incident edge, and every edge is
//! a connecting tube of volume `tau`. Only volumes are modelled; areas enter
//! through the user-supplied isoperimetric constants.
//!
//! Volumes are generic over [`Scalar`] so the region and decomposition
//! arithmetic can run on exact rationals; the solvers work in `f64`.

use std::fmt::Debug;

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use crate::bounds::{a_of_m, best_black_count, theorem_leaf_bound};
use crate::dp::leaf_profile;
use crate::tree::{build_tree, TreeShape};
use crate::{Caps, Error, Result};

/// Number types the volume arithmetic runs on (`f64`, `Ratio<i128>`, ...).
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {}

impl<T: Num + Clone + PartialOrd + FromPrimitive + Debug> Scalar for T {}

fn count<T: Scalar>(n: usize) -> T {
    T::from_usize(n).expect("count fits the scalar type")
}

/// Geometric constants of the model. Field names on the wire are exactly
/// `V0, mu, tau, alpha, rel_isop_C, iso_C, C3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockParams<T = f64> {
    /// Volume of the round three-sphere block.
    #[serde(rename = "V0")]
    pub v0: T,
    /// Volume of one removed geodesic ball.
    pub mu: T,
    /// Volume of one connecting tube.
    pub tau: T,
    /// Volume threshold deciding the induced coloring of a slice.
    pub alpha: T,
    /// Area bound for subsets of a glued pair of regions whose volume is
    /// at least `alpha` away from empty and full.
    #[serde(rename = "rel_isop_C")]
    pub rel_isop_c: T,
    /// Constant of `min(vol, vol')^{2/3} <= C * area` on balanced pieces.
    #[serde(rename = "iso_C")]
    pub iso_c: T,
    /// Area per disjoint dichromatic pair in the profile argument.
    #[serde(rename = "C3")]
    pub c3: T,
}

impl Default for BlockParams<f64> {
    /// Model defaults: `V0 = 2 pi^2`, `mu = 0.05 V0`, `tau = 1.5 mu`,
    /// `alpha = 0.2 (V0 - 3 mu)` and unit constants.
    fn default() -> Self {
        let v0 = 2.0 * std::f64::consts::PI * std::f64::consts::PI;
        let mu = 0.05 * v0;
        BlockParams {
            v0,
            mu,
            tau: 1.5 * mu,
            alpha: 0.2 * (v0 - 3.0 * mu),
            rel_isop_c: 1.0,
            iso_c: 1.0,
            c3: 1.0,
        }
    }
}

impl<T: Scalar> BlockParams<T> {
    /// Checks `tau > mu`, `0 < 3 mu < V0`, `0 < 2 alpha < V0 - 3 mu` and that
    /// the area constants are not negative. NaN fails every check.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let zero = T::zero();
        let two: T = count(2);
        let three: T = count(3);
        let fail = |what: &str| Err(Error::invalid(format!("block parameters: {what}")));
        if !(self.mu > zero) {
            return fail("mu must be positive");
        }
        if !(self.tau > self.mu.clone()) {
            return fail("tau must exceed mu");
        }
        let a_volume = self.v0.clone() - three * self.mu.clone();
        if !(a_volume > zero) {
            return fail("3 mu must be below V0");
        }
        if !(self.alpha > zero) {
            return fail("alpha must be positive");
        }
        if !(two * self.alpha.clone() < a_volume) {
            return fail("2 alpha must be below V0 - 3 mu");
        }
        for (name, c) in [
            ("rel_isop_C", &self.rel_isop_c),
            ("iso_C", &self.iso_c),
            ("C3", &self.c3),
        ] {
            if !(*c >= zero) {
                return fail(&format!("{name} must not be negative"));
            }
        }
        Ok(())
    }

    /// Multiplies the four volume parameters by `s`.
    pub fn scale_volumes(&self, s: T) -> Self {
        BlockParams {
            v0: self.v0.clone() * s.clone(),
            mu: self.mu.clone() * s.clone(),
            tau: self.tau.clone() * s.clone(),
            alpha: self.alpha.clone() * s,
            ..self.clone()
        }
    }

    /// Volume of a balanced piece away from the degree-2 node.
    pub fn balanced_volume(&self) -> T {
        self.v0.clone() + self.tau.clone() - count::<T>(2) * self.mu.clone()
    }
}

impl BlockParams<f64> {
    /// Like [`BlockParams::validate`], also rejecting non-finite values.
    pub fn validate_finite(&self) -> Result<()> {
        let all = [
            self.v0,
            self.mu,
            self.tau,
            self.alpha,
            self.rel_isop_c,
            self.iso_c,
            self.c3,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("block parameters must be finite"));
        }
        self.validate()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    #[serde(rename = "V0")]
    v0: Option<f64>,
    mu: Option<f64>,
    tau: Option<f64>,
    alpha: Option<f64>,
    #[serde(rename = "rel_isop_C")]
    rel_isop_c: Option<f64>,
    #[serde(rename = "iso_C")]
    iso_c: Option<f64>,
    #[serde(rename = "C3")]
    c3: Option<f64>,
}

/// Reads `key = value` lines (TOML syntax) with the keys `V0, mu, tau,
/// alpha, rel_isop_C, iso_C, C3`. Missing keys keep their default values;
/// unknown keys are rejected. The result is validated.
pub fn params_from_str(text: &str) -> Result<BlockParams> {
    let file: ParamsFile =
        toml::from_str(text).map_err(|e| Error::invalid(format!("params file: {}", e.message())))?;
    let d = BlockParams::default();
    let params = BlockParams {
        v0: file.v0.unwrap_or(d.v0),
        mu: file.mu.unwrap_or(d.mu),
        tau: file.tau.unwrap_or(d.tau),
        alpha: file.alpha.unwrap_or(d.alpha),
        rel_isop_c: file.rel_isop_c.unwrap_or(d.rel_isop_c),
        iso_c: file.iso_c.unwrap_or(d.iso_c),
        c3: file.c3.unwrap_or(d.c3),
    };
    params.validate_finite()?;
    Ok(params)
}

/// Spherical regions and tubes of `(S^3, g_m)` with their volumes.
///
/// Region `i - 1` is node `i`; the tube above child `c` has id
/// `node_count + c - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionGraph<T = f64> {
    pub tree: TreeShape,
    pub params: BlockParams<T>,
    /// Per node, in heap order.
    pub node_volumes: Vec<T>,
    /// Every tube has this volume.
    pub edge_volume: T,
}

pub fn region_graph<T: Scalar>(m: u32, params: &BlockParams<T>) -> Result<RegionGraph<T>> {
    params.validate()?;
    let tree = build_tree(m)?;
    let node_volumes = (1..=tree.node_count())
        .map(|v| {
            let degree = tree.degree(v).expect("node in range");
            params.v0.clone() - count::<T>(degree) * params.mu.clone()
        })
        .collect();
    Ok(RegionGraph {
        tree,
        params: params.clone(),
        node_volumes,
        edge_volume: params.tau.clone(),
    })
}

impl<T: Scalar> RegionGraph<T> {
    pub fn region_count(&self) -> usize {
        self.tree.node_count()
    }

    /// Regions followed by tubes.
    pub fn entry_count(&self) -> usize {
        self.tree.node_count() + self.tree.edge_count()
    }

    pub fn tube_id(&self, child: usize) -> usize {
        self.tree.node_count() + child - 2
    }

    /// Capacity of every entry (regions then tubes).
    pub fn capacities(&self) -> Vec<T> {
        let mut caps = self.node_volumes.clone();
        caps.extend(std::iter::repeat_n(self.edge_volume.clone(), self.tree.edge_count()));
        caps
    }

    /// Summed volume of all regions and tubes.
    pub fn total_volume(&self) -> T {
        let tubes = count::<T>(self.tree.edge_count()) * self.edge_volume.clone();
        self.node_volumes
            .iter()
            .cloned()
            .fold(tubes, |acc, v| acc + v)
    }

    /// `(2^{m+1} - 1) V0 + (2^{m+1} - 2)(tau - 2 mu)`.
    pub fn closed_form_total(&self) -> T {
        let p = &self.params;
        let n = self.tree.node_count();
        count::<T>(n) * p.v0.clone()
            + count::<T>(n - 1) * (p.tau.clone() - count::<T>(2) * p.mu.clone())
    }
}

/// Splits `S^3` into one piece per node by cutting each tube so that the
/// child keeps `tau - mu` and the parent gets `mu`. Pieces are in heap
/// order; the root's piece has volume `V0`, all others `V0 + tau - 2 mu`.
pub fn balanced_decomposition<T: Scalar>(m: u32, params: &BlockParams<T>) -> Result<Vec<T>> {
    let graph = region_graph(m, params)?;
    let tree = graph.tree;
    let child_share = params.tau.clone() - params.mu.clone();
    Ok((1..=tree.node_count())
        .map(|v| {
            let mut piece = graph.node_volumes[v - 1].clone();
            if v != 1 {
                piece = piece + child_share.clone();
            }
            if !tree.is_leaf(v) {
                piece = piece + count::<T>(2) * params.mu.clone();
            }
            piece
        })
        .collect())
}

/// Lower bounds on the width of `g_m`, in area units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthBound {
    pub m: u32,
    pub a_m: u64,
    /// Exact `d_m(a(m))`.
    pub dichromatic_value: u32,
    /// `C * ceil(m/2) / 5`.
    pub paper_bound: f64,
    /// `C * ceil(d_m(a(m)) / 5)`.
    pub certified_bound: f64,
}

pub fn width_lower_bound(m: u32, params: &BlockParams, caps: &Caps) -> Result<WidthBound> {
    params.validate_finite()?;
    let a = a_of_m(m)?;
    let d = leaf_profile(m, caps)?
        .get(a as usize)
        .expect("a(m) <= 2^m");
    let c = params.rel_isop_c;
    Ok(WidthBound {
        m,
        a_m: a,
        dichromatic_value: d,
        paper_bound: c * (theorem_leaf_bound(m) as f64 / 5.0),
        certified_bound: c * d.div_ceil(5) as f64,
    })
}

/// Result of the isoperimetric-profile lower-bound solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoQuery {
    pub m: u32,
    pub params: BlockParams,
    /// `b(m)`.
    pub b_m: usize,
    /// `k = d'_m(b(m))`.
    pub k: u32,
    /// `b(m) (V0 + tau - 2 mu)`.
    pub v_m: f64,
    /// Certified lower bound on `sup_v I_m(v)`.
    pub l_star: f64,
    /// True when `k` is too small for the constants and `l_star = 0`.
    pub vacuous: bool,
    /// Final bisection bracket width.
    pub bracket_width: f64,
    /// `f(l_star)`.
    pub residual: f64,
    pub iterations: u32,
}

/// `C3 (k - C2(L)) / 5 - L` with `C1 = (iso_C L)^{3/2}` and
/// `C2 = (C1 + |tau - 2 mu|) / (V0 + tau - 2 mu)`. Strictly decreasing in `L`.
pub fn iso_gap(params: &BlockParams, k: f64, l: f64) -> f64 {
    let c1 = (params.iso_c * l).powf(1.5);
    let c2 = (c1 + (params.tau - 2.0 * params.mu).abs()) / params.balanced_volume();
    params.c3 * (k - c2) / 5.0 - l
}

/// Width below which the bisection bracket is considered closed.
pub const ISO_BRACKET_TOL: f64 = 1e-9;

/// Largest `L` for which the contradiction argument still forces an area
/// above `L`, i.e. the root of [`iso_gap`] on `[0, C3 k / 5]`.
pub fn iso_profile_lower_bound(m: u32, params: &BlockParams, caps: &Caps) -> Result<IsoQuery> {
    params.validate_finite()?;
    let (b_m, k) = best_black_count(m, caps)?;
    Ok(solve_iso(m, params, b_m, k))
}

/// The solve behind [`iso_profile_lower_bound`] for a given `b(m)` and `k`.
pub fn solve_iso(m: u32, params: &BlockParams, b_m: usize, k: u32) -> IsoQuery {
    let kf = k as f64;
    let f = |l: f64| iso_gap(params, kf, l);
    let v_m = b_m as f64 * params.balanced_volume();
    let mut query = IsoQuery {
        m,
        params: params.clone(),
        b_m,
        k,
        v_m,
        l_star: 0.0,
        vacuous: false,
        bracket_width: 0.0,
        residual: f(0.0),
        iterations: 0,
    };
    if f(0.0) <= 0.0 {
        query.vacuous = true;
        return query;
    }
    let (root, width, iterations) = bisect_decreasing(f, 0.0, params.c3 * kf / 5.0, kf * params.c3);
    query.l_star = root;
    query.bracket_width = width;
    query.residual = f(root);
    query.iterations = iterations;
    query
}

/// Bisection for a strictly decreasing `f` with `f(lo) > 0 >= f(hi)`.
///
/// Stops once the bracket is at most [`ISO_BRACKET_TOL`] wide and
/// `|f(lo)| <= 1e-9 max(1, scale)`. Returns the lower end, where `f > 0`.
fn bisect_decreasing(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, scale: f64) -> (f64, f64, u32) {
    let residual_tol = 1e-9 * scale.max(1.0);
    let mut iterations = 0;
    if f(hi) >= 0.0 {
        // f(hi) == 0: the bracket end is the root.
        return (hi, 0.0, 0);
    }
    while iterations < 200 {
        if hi - lo <= ISO_BRACKET_TOL && f(lo).abs() <= residual_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    (lo, hi - lo, iterations)
}

/// Closed form of the root when `iso_C = 0`.
pub fn iso_limit_without_profile_constant(params: &BlockParams, k: u32) -> f64 {
    let c2 = (params.tau - 2.0 * params.mu).abs() / params.balanced_volume();
    (params.c3 * (k as f64 - c2) / 5.0).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn p() -> BlockParams {
        BlockParams::default()
    }

    #[test]
    fn defaults_are_valid() {
        p().validate_finite().unwrap();
    }

    #[test]
    fn invalid_parameters() {
        let mut q = p();
        q.tau = q.mu;
        assert!(q.validate().is_err());
        let mut q = p();
        q.alpha = 0.5 * (q.v0 - 3.0 * q.mu);
        assert!(q.validate().is_err());
        let mut q = p();
        q.mu = q.v0 / 3.0;
        assert!(q.validate().is_err());
        let mut q = p();
        q.c3 = -1.0;
        assert!(q.validate().is_err());
        let mut q = p();
        q.iso_c = f64::NAN;
        assert!(q.validate_finite().is_err());
        assert!(region_graph(2, &BlockParams { tau: 0.0, ..p() }).is_err());
    }

    #[test]
    fn depth_one_regions() {
        let q = p();
        let g = region_graph(1, &q).unwrap();
        assert_eq!(g.node_volumes, vec![q.v0 - 2.0 * q.mu, q.v0 - q.mu, q.v0 - q.mu]);
        assert_eq!(g.tree.edge_count(), 2);
        let want = 3.0 * q.v0 + 2.0 * (q.tau - 2.0 * q.mu);
        assert!((g.total_volume() - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn depth_two_regions() {
        let q = p();
        let g = region_graph(2, &q).unwrap();
        let count_of = |x: f64| g.node_volumes.iter().filter(|&&v| v == x).count();
        assert_eq!(count_of(q.v0 - q.mu), 4);
        assert_eq!(count_of(q.v0 - 2.0 * q.mu), 1);
        assert_eq!(count_of(q.v0 - 3.0 * q.mu), 2);
        assert_eq!(g.capacities().len(), 13);
    }

    fn r(n: i128, d: i128) -> Ratio<i128> {
        Ratio::new(n, d)
    }

    fn rational_params() -> BlockParams<Ratio<i128>> {
        BlockParams {
            v0: r(20, 1),
            mu: r(1, 1),
            tau: r(3, 2),
            alpha: r(17, 5),
            rel_isop_c: r(1, 1),
            iso_c: r(1, 1),
            c3: r(1, 1),
        }
    }

    #[test]
    fn balanced_pieces_depth_one() {
        let q = rational_params();
        let pieces = balanced_decomposition(1, &q).unwrap();
        let other = q.v0 + q.tau - r(2, 1) * q.mu;
        assert_eq!(pieces, vec![q.v0, other, other]);
        // Tube split.
        assert_eq!((q.tau - q.mu) + q.mu, q.tau);
    }

    #[test]
    fn rational_conservation() {
        let q = rational_params();
        for m in 1..=8 {
            let g = region_graph(m, &q).unwrap();
            let pieces = balanced_decomposition(m, &q).unwrap();
            let sum = pieces.iter().fold(r(0, 1), |a, &b| a + b);
            assert_eq!(sum, g.total_volume());
            assert_eq!(g.total_volume(), g.closed_form_total());
            assert_eq!(pieces.len(), g.tree.node_count());
            assert_eq!(pieces.iter().filter(|&&x| x == q.v0).count(), 1);
        }
    }

    #[test]
    fn scaling_covariance() {
        let q = rational_params();
        let s = r(7, 3);
        for m in 1..=5 {
            let a = region_graph(m, &q).unwrap();
            let b = region_graph(m, &q.scale_volumes(s)).unwrap();
            assert_eq!(b.total_volume(), a.total_volume() * s);
            assert_eq!(
                balanced_decomposition(m, &q.scale_volumes(s)).unwrap().len(),
                balanced_decomposition(m, &q).unwrap().len()
            );
        }
    }

    #[test]
    fn width_examples() {
        let caps = Caps::default();
        let w = width_lower_bound(2, &BlockParams { rel_isop_c: 1.0, ..p() }, &caps).unwrap();
        assert_eq!(w.paper_bound, 0.2);
        let zero = width_lower_bound(5, &BlockParams { rel_isop_c: 0.0, ..p() }, &caps).unwrap();
        assert_eq!((zero.paper_bound, zero.certified_bound), (0.0, 0.0));
        for m in 1..=12 {
            let w = width_lower_bound(m, &p(), &caps).unwrap();
            assert!(w.certified_bound >= w.paper_bound, "m = {m}");
        }
    }

    #[test]
    fn iso_vacuous_when_k_small() {
        let q = BlockParams { tau: 3.0 * p().mu, ..p() };
        let c2 = (q.tau - 2.0 * q.mu).abs() / q.balanced_volume();
        assert!(c2 > 0.0);
        let query = solve_iso(1, &q, 1, 0);
        assert!(query.vacuous);
        assert_eq!(query.l_star, 0.0);
    }

    #[test]
    fn iso_converges_and_is_tight() {
        let q = p();
        for k in 1..=10 {
            let query = solve_iso(3, &q, 1, k);
            assert!(!query.vacuous);
            assert!(query.bracket_width <= ISO_BRACKET_TOL);
            assert!(query.residual >= 0.0);
            assert!(query.residual <= 1e-9 * (q.c3 * k as f64).max(1.0));
        }
    }

    #[test]
    fn iso_limit_matches_closed_form() {
        let q = BlockParams { iso_c: 0.0, ..p() };
        for k in 1..=8 {
            let query = solve_iso(4, &q, 1, k);
            let want = iso_limit_without_profile_constant(&q, k);
            assert!((query.l_star - want).abs() <= 1e-8, "k={k}");
        }
    }

    #[test]
    fn iso_monotone_in_k() {
        let q = p();
        let mut last = 0.0;
        for k in 0..20 {
            let l = solve_iso(5, &q, 1, k).l_star;
            assert!(l >= last);
            last = l;
        }
    }

    #[test]
    fn params_file_keys() {
        let text = "# model\nV0 = 20\nmu = 1.0\ntau = 1.5\nalpha = 3.0\nrel_isop_C = 2.0\niso_C = 1.0\nC3 = 0.5\n";
        let q = params_from_str(text).unwrap();
        assert_eq!((q.v0, q.rel_isop_c, q.c3), (20.0, 2.0, 0.5));
        let partial = params_from_str("C3 = 2.5").unwrap();
        assert_eq!(partial, BlockParams { c3: 2.5, ..p() });
        assert!(params_from_str("mu = 1.0\nbogus = 2").is_err());
        assert!(params_from_str("mu = \"x\"").is_err());
        assert!(params_from_str("tau = 0.1").is_err());
    }
}
