//! Discrete sweepouts of the region model and slice certificates.
//!
//! A trace records, for a sequence of steps, how much of every region and
//! tube lies inside the swept-out open set. Consecutive steps may move each
//! entry by at most the step bound, the first step is empty and the last one
//! is full. From such a trace [`certify`] picks the special slice, colors the
//! tree from it and counts vertex-disjoint glued pairs of regions whose
//! volume is sandwiched away from empty and full; each of them contributes
//! the relative isoperimetric constant to the slice area.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{a_of_m, theorem_leaf_bound};
use crate::dp::max_matching_within;
use crate::metric::{region_graph, BlockParams, RegionGraph};
use crate::tree::{count_dichromatic, Coloring, EdgeSet};
use crate::{Error, Result};

/// Changes applied to go from one step to the next.
#[derive(Debug, Clone, PartialEq)]
pub enum StepUpdate {
    /// `(entry, new volume)` pairs; other entries are unchanged.
    Sparse(Vec<(usize, f64)>),
    /// New volume of every entry.
    Dense(Vec<f64>),
}

/// Per-entry volumes of the open sets of a discrete sweepout.
///
/// Entries are the regions (node `i` is entry `i - 1`) followed by the tubes
/// (see [`RegionGraph::tube_id`]). Step `0` is `initial`; step `i + 1` is
/// step `i` with `updates[i]` applied.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepoutTrace {
    pub graph: RegionGraph,
    pub initial: Vec<f64>,
    pub updates: Vec<StepUpdate>,
    pub step_bound: f64,
}

impl SweepoutTrace {
    /// Builds a trace from full per-step volume vectors.
    pub fn from_dense(graph: RegionGraph, steps: Vec<Vec<f64>>, step_bound: f64) -> Result<Self> {
        let mut it = steps.into_iter();
        let initial = it
            .next()
            .ok_or_else(|| Error::MalformedTrace("no steps".into()))?;
        Ok(SweepoutTrace {
            graph,
            initial,
            updates: it.map(StepUpdate::Dense).collect(),
            step_bound,
        })
    }

    pub fn step_count(&self) -> usize {
        self.updates.len() + 1
    }

    pub fn replay(&self) -> Replay<'_> {
        Replay {
            trace: self,
            current: self.initial.clone(),
            next: 0,
        }
    }

    /// Volumes at step `index`.
    pub fn snapshot(&self, index: usize) -> Option<Vec<f64>> {
        let mut r = self.replay();
        while let Some((i, v)) = r.advance() {
            if i == index {
                return Some(v.to_vec());
            }
        }
        None
    }

    /// Line-oriented CSV: `step,region,volume`. Step 0 lists every entry;
    /// later steps list only the entries that changed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,region,volume\n");
        for (id, v) in self.initial.iter().enumerate() {
            let _ = writeln!(out, "0,{id},{v}");
        }
        let mut prev = self.initial.clone();
        for (i, u) in self.updates.iter().enumerate() {
            let step = i + 1;
            match u {
                StepUpdate::Sparse(changes) => {
                    for &(id, v) in changes {
                        let _ = writeln!(out, "{step},{id},{v}");
                        if let Some(p) = prev.get_mut(id) {
                            *p = v;
                        }
                    }
                }
                StepUpdate::Dense(all) => {
                    for (id, &v) in all.iter().enumerate() {
                        if prev.get(id) != Some(&v) {
                            let _ = writeln!(out, "{step},{id},{v}");
                        }
                    }
                    prev.clone_from(all);
                }
            }
        }
        out
    }

    /// Inverse of [`SweepoutTrace::to_csv`]. Steps must appear in order and
    /// without gaps; a step with no lines cannot be represented.
    pub fn from_csv(graph: RegionGraph, step_bound: f64, text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::MalformedTrace(format!("line {line}: {what}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == "step,region,volume" => {}
            _ => return Err(bad(1, "expected header 'step,region,volume'")),
        }
        let entries = graph.entry_count();
        let mut initial = vec![0.0; entries];
        let mut updates: Vec<Vec<(usize, f64)>> = Vec::new();
        for (ln, line) in lines {
            let ln = ln + 1;
            let mut cols = line.split(',').map(str::trim);
            let (Some(s), Some(r), Some(v), None) = (cols.next(), cols.next(), cols.next(), cols.next())
            else {
                return Err(bad(ln, "expected three columns"));
            };
            let step: usize = s.parse().map_err(|_| bad(ln, "bad step"))?;
            let id: usize = r.parse().map_err(|_| bad(ln, "bad region id"))?;
            let vol: f64 = v.parse().map_err(|_| bad(ln, "bad volume"))?;
            if id >= entries {
                return Err(bad(ln, "region id out of range"));
            }
            if step == 0 {
                if !updates.is_empty() {
                    return Err(bad(ln, "step 0 after later steps"));
                }
                initial[id] = vol;
            } else if step == updates.len() {
                updates.last_mut().expect("step >= 1").push((id, vol));
            } else if step == updates.len() + 1 {
                updates.push(vec![(id, vol)]);
            } else {
                return Err(bad(ln, "steps out of order"));
            }
        }
        Ok(SweepoutTrace {
            graph,
            initial,
            updates: updates.into_iter().map(StepUpdate::Sparse).collect(),
            step_bound,
        })
    }
}

/// Walks the steps of a trace without materialising all of them.
pub struct Replay<'a> {
    trace: &'a SweepoutTrace,
    current: Vec<f64>,
    next: usize,
}

impl Replay<'_> {
    /// Returns the next `(step index, volumes)`.
    pub fn advance(&mut self) -> Option<(usize, &[f64])> {
        let i = self.next;
        if i > self.trace.updates.len() {
            return None;
        }
        if i > 0 {
            match &self.trace.updates[i - 1] {
                StepUpdate::Sparse(changes) => {
                    for &(id, v) in changes {
                        if let Some(x) = self.current.get_mut(id) {
                            *x = v;
                        }
                    }
                }
                StepUpdate::Dense(all) => self.current.clone_from(all),
            }
        }
        self.next += 1;
        Some((i, &self.current))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    WrongLength,
    UnknownEntry,
    NonEmptyStart,
    OutOfRange,
    StepTooLarge,
    NotFullAtEnd,
}

/// First place where a trace breaks the sweepout rules.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceViolation {
    pub step: usize,
    pub entry: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Relative slack on the step bound for floating-point differences.
const STEP_SLACK: f64 = 1e-12;

/// Checks that the trace starts empty, ends full, keeps every entry within
/// its capacity and moves no entry by more than the step bound per step.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn validate_trace(trace: &SweepoutTrace) -> std::result::Result<(), TraceViolation> {
    let caps = trace.graph.capacities();
    let entries = caps.len();
    let violation = |step, entry, kind, detail: String| TraceViolation {
        step,
        entry,
        kind,
        detail,
    };
    if !(trace.step_bound > 0.0) {
        return Err(violation(0, None, ViolationKind::StepTooLarge, "step bound must be positive".into()));
    }
    if trace.initial.len() != entries {
        return Err(violation(
            0,
            None,
            ViolationKind::WrongLength,
            format!("{} entries, expected {entries}", trace.initial.len()),
        ));
    }
    if let Some(id) = trace.initial.iter().position(|&v| v != 0.0) {
        return Err(violation(0, Some(id), ViolationKind::NonEmptyStart, format!("volume {}", trace.initial[id])));
    }
    let allowed = trace.step_bound * (1.0 + STEP_SLACK);
    let mut prev = trace.initial.clone();
    let mut replay = trace.replay();
    replay.advance();
    for (i, update) in trace.updates.iter().enumerate() {
        let step = i + 1;
        match update {
            StepUpdate::Dense(all) if all.len() != entries => {
                return Err(violation(step, None, ViolationKind::WrongLength, format!("{} entries, expected {entries}", all.len())));
            }
            StepUpdate::Sparse(changes) => {
                if let Some(&(id, _)) = changes.iter().find(|&&(id, _)| id >= entries) {
                    return Err(violation(step, Some(id), ViolationKind::UnknownEntry, format!("entry {id}")));
                }
            }
            _ => {}
        }
        let (_, now) = replay.advance().expect("one snapshot per update");
        let touched: Box<dyn Iterator<Item = usize>> = match update {
            StepUpdate::Sparse(changes) => Box::new(changes.iter().map(|&(id, _)| id)),
            StepUpdate::Dense(_) => Box::new(0..entries),
        };
        for id in touched {
            let v = now[id];
            if !(v >= 0.0 && v <= caps[id]) {
                return Err(violation(step, Some(id), ViolationKind::OutOfRange, format!("volume {v} outside [0, {}]", caps[id])));
            }
            if (v - prev[id]).abs() > allowed {
                return Err(violation(
                    step,
                    Some(id),
                    ViolationKind::StepTooLarge,
                    format!("change {} exceeds {}", (v - prev[id]).abs(), trace.step_bound),
                ));
            }
            prev[id] = v;
        }
    }
    let last = trace.updates.len();
    if let Some(id) = (0..entries).find(|&id| prev[id] != caps[id]) {
        return Err(violation(last, Some(id), ViolationKind::NotFullAtEnd, format!("volume {} of {}", prev[id], caps[id])));
    }
    Ok(())
}

fn leaf_range(graph: &RegionGraph) -> std::ops::Range<usize> {
    // Region ids of the leaves.
    graph.tree.first_leaf() - 1..graph.tree.node_count()
}

fn check_a(graph: &RegionGraph, a: usize) -> Result<()> {
    if a < 1 || a > graph.tree.leaf_count() {
        return Err(Error::invalid(format!(
            "a = {a} must lie in 1..={}",
            graph.tree.leaf_count()
        )));
    }
    Ok(())
}

/// Least step at which at least `a` leaf regions hold volume `>= alpha`.
///
/// The slice must be admissible: at most `a` leaves may lie strictly above
/// `alpha` there, otherwise the steps are too coarse.
pub fn find_special_slice(trace: &SweepoutTrace, a: usize) -> Result<usize> {
    let graph = &trace.graph;
    check_a(graph, a)?;
    let alpha = graph.params.alpha;
    let leaves = leaf_range(graph);
    let mut replay = trace.replay();
    while let Some((step, vols)) = replay.advance() {
        let reached = vols[leaves.clone()].iter().filter(|&&v| v >= alpha).count();
        if reached >= a {
            let strict = vols[leaves.clone()].iter().filter(|&&v| v > alpha).count();
            if strict > a {
                return Err(Error::Admissibility { step, strict, a });
            }
            return Ok(step);
        }
    }
    Err(Error::MalformedTrace(format!(
        "no step has {a} leaves at volume alpha or more"
    )))
}

/// The coloring of the slice at step `t0`: exactly `a` black leaves chosen
/// among those with volume `>= alpha` (strict ones first, then by index) and
/// internal nodes black iff their volume is `>= alpha`.
pub fn induce_coloring(trace: &SweepoutTrace, t0: usize, a: usize) -> Result<Coloring> {
    let graph = &trace.graph;
    check_a(graph, a)?;
    let vols = trace
        .snapshot(t0)
        .ok_or_else(|| Error::invalid(format!("step {t0} is past the end of the trace")))?;
    coloring_from_volumes(graph, &vols, t0, a)
}

fn coloring_from_volumes(graph: &RegionGraph, vols: &[f64], step: usize, a: usize) -> Result<Coloring> {
    let tree = graph.tree;
    let alpha = graph.params.alpha;
    let mut coloring = Coloring::all_white(tree);
    for v in 1..tree.first_leaf() {
        coloring.set(v, vols[v - 1] >= alpha);
    }
    let leaves = tree.first_leaf()..=tree.node_count();
    let strict: Vec<usize> = leaves.clone().filter(|&v| vols[v - 1] > alpha).collect();
    let equal: Vec<usize> = leaves.filter(|&v| vols[v - 1] == alpha).collect();
    if strict.len() > a {
        return Err(Error::Admissibility {
            step,
            strict: strict.len(),
            a,
        });
    }
    if strict.len() + equal.len() < a {
        return Err(Error::invalid(format!(
            "step {step} has only {} leaves at volume alpha or more, {a} needed",
            strict.len() + equal.len()
        )));
    }
    for &v in strict.iter().chain(equal.iter()).take(a) {
        coloring.set(v, true);
    }
    Ok(coloring)
}

/// A dichromatic neighbour pair whose glued region has its inside volume
/// sandwiched between `alpha` and `vol - alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichPair {
    pub parent: usize,
    pub child: usize,
    /// Volume of the slice's open set inside the glued region.
    pub inside: f64,
    /// Volume of the glued region (two spherical regions and their tube).
    pub total: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceCertificate {
    pub m: u32,
    pub a_m: u64,
    pub t0: usize,
    pub coloring: Coloring,
    pub dichromatic_edges: usize,
    pub sandwich_regions: Vec<SandwichPair>,
    pub disjoint_pairs: EdgeSet,
    pub disjoint_count: usize,
    /// `rel_isop_C * disjoint_count`.
    pub certified_area: f64,
    /// `rel_isop_C * ceil(m/2) / 5`.
    pub paper_bound: f64,
    /// `5 * disjoint_count >= ceil(m/2)`, compared in integers.
    pub meets_paper_bound: bool,
}

/// Runs slice selection and coloring with `a = a(m)` and certifies an area
/// lower bound for the special slice.
pub fn certify(trace: &SweepoutTrace) -> Result<SliceCertificate> {
    validate_trace(trace).map_err(|v| {
        Error::MalformedTrace(format!("step {}: {:?} ({})", v.step, v.kind, v.detail))
    })?;
    let graph = &trace.graph;
    let tree = graph.tree;
    let m = tree.depth();
    let a_m = a_of_m(m)?;
    let t0 = find_special_slice(trace, a_m as usize)?;
    let vols = trace.snapshot(t0).expect("t0 is a step of the trace");
    let coloring = coloring_from_volumes(graph, &vols, t0, a_m as usize)?;
    let (dichromatic_edges, dich) = count_dichromatic(&coloring);

    let alpha = graph.params.alpha;
    let mut sandwich_regions = Vec::with_capacity(dich.len());
    for &(p, c) in &dich.edges {
        let tube = graph.tube_id(c);
        let inside = vols[p - 1] + vols[c - 1] + vols[tube];
        let total = graph.node_volumes[p - 1] + graph.node_volumes[c - 1] + graph.edge_volume;
        if !(alpha <= inside && inside <= total - alpha) {
            return Err(Error::CertificateViolation(format!(
                "pair ({p}, {c}) holds {inside} of {total}, outside [{alpha}, {}]",
                total - alpha
            )));
        }
        sandwich_regions.push(SandwichPair {
            parent: p,
            child: c,
            inside,
            total,
        });
    }
    let verified = EdgeSet {
        edges: sandwich_regions.iter().map(|s| (s.parent, s.child)).collect(),
    };
    let (disjoint_count, disjoint_pairs) = max_matching_within(&tree, &verified);
    let c = graph.params.rel_isop_c;
    let needed = theorem_leaf_bound(m) as usize;
    Ok(SliceCertificate {
        m,
        a_m,
        t0,
        coloring,
        dichromatic_edges,
        sandwich_regions,
        disjoint_pairs,
        disjoint_count,
        certified_area: c * disjoint_count as f64,
        paper_bound: c * (needed as f64 / 5.0),
        meets_paper_bound: 5 * disjoint_count >= needed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Fill regions one at a time in post-order, each followed by its tube
    /// to the parent.
    DfsFill,
    /// Fill regions one at a time in heap order, each preceded by its tube
    /// to the parent.
    BfsFill,
    /// Fill every entry in proportion to its capacity.
    Uniform,
    /// Grow one random entry per step (seeded).
    RandomMonotone,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::DfsFill,
        Strategy::BfsFill,
        Strategy::Uniform,
        Strategy::RandomMonotone,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::DfsFill => "dfs-fill",
            Strategy::BfsFill => "bfs-fill",
            Strategy::Uniform => "uniform",
            Strategy::RandomMonotone => "random-monotone",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy '{s}'")))
    }
}

/// Default step bound used by the generators: a quarter of `alpha`.
pub fn default_step_bound(params: &BlockParams) -> f64 {
    params.alpha / 4.0
}

/// Builds a valid trace for `strategy`. Only `random-monotone` uses `seed`.
///
/// Every generated trace is admissible for any `a`: the sequential and
/// random strategies change one entry per step, and the uniform one stops
/// on the step where every leaf holds exactly `alpha`.
pub fn generate_trace(
    strategy: Strategy,
    m: u32,
    params: &BlockParams,
    delta: f64,
    seed: u64,
) -> Result<SweepoutTrace> {
    params.validate_finite()?;
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::invalid("step bound delta must be positive and finite"));
    }
    let graph = region_graph(m, params)?;
    let caps = graph.capacities();
    let initial = vec![0.0; caps.len()];
    let updates = match strategy {
        Strategy::DfsFill => fill_in_order(&caps, &dfs_order(&graph), delta),
        Strategy::BfsFill => fill_in_order(&caps, &bfs_order(&graph), delta),
        Strategy::Uniform => uniform_fill(&graph, &caps, delta),
        Strategy::RandomMonotone => random_fill(&caps, delta, seed),
    };
    Ok(SweepoutTrace {
        graph,
        initial,
        updates,
        step_bound: delta,
    })
}

fn dfs_order(graph: &RegionGraph) -> Vec<usize> {
    let tree = graph.tree;
    let mut order = Vec::with_capacity(graph.entry_count());
    // (node, children done)
    let mut stack = vec![(1usize, false)];
    while let Some((v, done)) = stack.pop() {
        if done || tree.is_leaf(v) {
            order.push(v - 1);
            if v != 1 {
                order.push(graph.tube_id(v));
            }
        } else {
            stack.push((v, true));
            stack.push((2 * v + 1, false));
            stack.push((2 * v, false));
        }
    }
    order
}

fn bfs_order(graph: &RegionGraph) -> Vec<usize> {
    let mut order = Vec::with_capacity(graph.entry_count());
    for v in 1..=graph.tree.node_count() {
        if v != 1 {
            order.push(graph.tube_id(v));
        }
        order.push(v - 1);
    }
    order
}

fn fill_in_order(caps: &[f64], order: &[usize], delta: f64) -> Vec<StepUpdate> {
    let mut updates = Vec::new();
    for &id in order {
        let steps = (caps[id] / delta).ceil().max(1.0) as usize;
        for j in 1..=steps {
            let v = if j == steps { caps[id] } else { (j as f64 * delta).min(caps[id]) };
            updates.push(StepUpdate::Sparse(vec![(id, v)]));
        }
    }
    updates
}

/// Proportional fill on the grid `i / N` with `N = ceil(total / delta)`. The
/// first grid point at or past the leaf crossing fraction `alpha / (V0 - mu)`
/// is moved onto it, and there every leaf is set to exactly `alpha`.
fn uniform_fill(graph: &RegionGraph, caps: &[f64], delta: f64) -> Vec<StepUpdate> {
    let tree = graph.tree;
    let alpha = graph.params.alpha;
    let leaf_cap = graph.node_volumes[tree.first_leaf() - 1];
    let total = graph.total_volume();
    // Absorbs rounding in total / delta so that an exact multiple stays exact.
    let n = ((total / delta * (1.0 - 1e-12)).ceil() as usize).max(2);
    let crossing = alpha / leaf_cap;
    let cross_at = ((crossing * n as f64).ceil() as usize).clamp(1, n - 1);
    let is_leaf = |id: usize| id + 1 >= tree.first_leaf() && id < tree.node_count();

    (1..=n)
        .map(|i| {
            let frac = if i == cross_at { crossing } else { i as f64 / n as f64 };
            let vols = caps
                .iter()
                .enumerate()
                .map(|(id, &cap)| {
                    if i == n {
                        cap
                    } else if is_leaf(id) {
                        match i.cmp(&cross_at) {
                            std::cmp::Ordering::Less => (cap * frac).min(alpha.next_down()),
                            std::cmp::Ordering::Equal => alpha,
                            std::cmp::Ordering::Greater => (cap * frac).max(alpha),
                        }
                    } else {
                        cap * frac
                    }
                })
                .collect();
            StepUpdate::Dense(vols)
        })
        .collect()
}

fn random_fill(caps: &[f64], delta: f64, seed: u64) -> Vec<StepUpdate> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = vec![0.0; caps.len()];
    let mut open: Vec<usize> = (0..caps.len()).collect();
    let mut updates = Vec::new();
    while !open.is_empty() {
        let slot = rng.gen_range(0..open.len());
        let id = open[slot];
        let grow = delta * rng.gen_range(0.5..=1.0);
        let v = current[id] + grow;
        if v >= caps[id] {
            current[id] = caps[id];
            open.swap_remove(slot);
        } else {
            current[id] = v;
        }
        updates.push(StepUpdate::Sparse(vec![(id, current[id])]));
    }
    updates
}
