//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.

use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dichromat::bounds::{a_of_m, best_black_count, lemma_cardinality_bound, theorem_leaf_bound, verify, Check};
use dichromat::dp::{achievable_table, leaf_profile, max_disjoint_pairs, node_profile};
use dichromat::metric::{
    balanced_decomposition, iso_limit_without_profile_constant, iso_profile_lower_bound, region_graph,
    BlockParams, ISO_BRACKET_TOL,
};
use dichromat::oracle::{brute_force_max_matching, enumerate_full, enumerate_leaf_constrained};
use dichromat::sweepout::{certify, default_step_bound, generate_trace, Strategy};
use dichromat::tree::{build_tree, count_dichromatic, Coloring};
use dichromat::Caps;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn oracle_equivalence() -> Outcome {
    let caps = Caps::default();
    let start = Instant::now();
    for m in 1..=3 {
        let full = enumerate_full(m).map_err(|e| e.to_string())?;
        let dp = node_profile(m, &caps).map_err(|e| e.to_string())?;
        for (b, d) in dp.iter() {
            ensure(full.min_d_by_b[&b] == d as usize, || {
                format!("m={m} b={b}: dp {d}, oracle {}", full.min_d_by_b[&b])
            })?;
        }
        ensure(dp.values().len() == full.min_d_by_b.len(), || format!("m={m}: index ranges differ"))?;
    }
    for m in 1..=4 {
        let dp = leaf_profile(m, &caps).map_err(|e| e.to_string())?;
        for (t, d) in dp.iter() {
            let (want, _) = enumerate_leaf_constrained(m, t).map_err(|e| e.to_string())?;
            ensure(want == d as usize, || format!("m={m} t={t}: dp {d}, oracle {want}"))?;
        }
    }
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!("node m=1..3, leaf m=1..4 exact in {:?}", start.elapsed()))
}

fn leaf_bound_replay() -> Outcome {
    let caps = Caps::default();
    let start = Instant::now();
    let mut values = Vec::new();
    for m in 1..=12 {
        let a = a_of_m(m).unwrap() as usize;
        let d = leaf_profile(m, &caps).map_err(|e| e.to_string())?.get(a).unwrap();
        ensure(d >= theorem_leaf_bound(m), || format!("m={m}: d_m(a(m)) = {d} < {}", theorem_leaf_bound(m)))?;
        values.push(d);
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("d_m(a(m)) for m=1..12: {values:?}"))
}

fn cardinality_replay() -> Outcome {
    let caps = Caps::default();
    let start = Instant::now();
    let mut checked = 0;
    for m in 1..=6 {
        let table = achievable_table(m, &caps).map_err(|e| e.to_string())?;
        for d in 0..=table.max_d() {
            let size = table.set(d).members.len();
            let bound = lemma_cardinality_bound(m as u64, d as u32);
            ensure(bound.admits(size), || format!("m={m} d={d}: #B = {size} > {bound:?}"))?;
            checked += 1;
        }
    }
    within(start.elapsed(), Duration::from_secs(300))?;
    Ok(format!("{checked} (m, d) slices within 2^d m^d"))
}

fn lipschitz_suites() -> Outcome {
    let caps = Caps::default();
    for m in 1..=12 {
        for check in [Check::LipschitzNode, Check::LipschitzLeaf] {
            let r = verify(m, check, &caps).map_err(|e| e.to_string())?;
            ensure(r.holds, || format!("m={m} {}: worst ratio {}", check.name(), r.computed_value))?;
        }
    }
    Ok("all index pairs, m=1..12, node and leaf".into())
}

fn node_profile_trend() -> Outcome {
    let caps = Caps::default();
    let mut table = Vec::new();
    for m in 1..=12 {
        let (b, d) = best_black_count(m, &caps).map_err(|e| e.to_string())?;
        ensure(d >= theorem_leaf_bound(m), || format!("m={m}: max d' = {d} < {}", theorem_leaf_bound(m)))?;
        table.push(format!("m={m}:b={b},d={d}"));
    }
    Ok(table.join(" "))
}

fn matching_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for m in [2, 3, 4] {
        let tree = build_tree(m).unwrap();
        for _ in 0..1000 {
            let bits: Vec<bool> = (0..tree.node_count()).map(|_| rng.gen()).collect();
            let c = Coloring::from_bools(tree, &bits).unwrap();
            let d = count_dichromatic(&c).0;
            let (size, pairs) = max_disjoint_pairs(&c);
            ensure(5 * size >= d && pairs.is_vertex_disjoint(), || format!("m={m} {c:?}: {size} pairs, d={d}"))?;
            if m <= 3 {
                let brute = brute_force_max_matching(&c);
                ensure(size == brute, || format!("m={m} {c:?}: {size} vs brute force {brute}"))?;
            }
        }
    }
    Ok("3000 seeded colorings".into())
}

fn random_rational_params(rng: &mut ChaCha8Rng) -> BlockParams<Ratio<i128>> {
    let r = |n: i128, d: i128| Ratio::new(n, d);
    let v0 = r(rng.gen_range(100..=5000), rng.gen_range(1..=50));
    let mu = v0 * r(rng.gen_range(1..=300), 1000);
    let tau = mu * r(rng.gen_range(1001..=4000), 1000);
    let alpha = (v0 - r(3, 1) * mu) * r(rng.gen_range(1..=499), 1000);
    BlockParams {
        v0,
        mu,
        tau,
        alpha,
        rel_isop_c: r(1, 1),
        iso_c: r(1, 1),
        c3: r(1, 1),
    }
}

fn volume_conservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for set in 0..20 {
        let p = random_rational_params(&mut rng);
        p.validate().map_err(|e| e.to_string())?;
        for m in 1..=10 {
            let total = region_graph(m, &p).map_err(|e| e.to_string())?.total_volume();
            let pieces = balanced_decomposition(m, &p).map_err(|e| e.to_string())?;
            let sum = pieces.iter().fold(Ratio::from_integer(0), |a, &b| a + b);
            ensure(sum == total, || format!("set {set} m={m}: {sum} != {total}"))?;
        }
    }
    Ok("20 rational parameter sets, m=1..10, exact".into())
}

fn width_certification() -> Outcome {
    let p = BlockParams::default();
    let delta = default_step_bound(&p);
    let mut runs = Vec::new();
    for m in 2..=8 {
        for s in Strategy::ALL {
            let seeds: Vec<u64> = if s == Strategy::RandomMonotone { (1..=5).collect() } else { vec![0] };
            for seed in seeds {
                let trace = generate_trace(s, m, &p, delta, seed).map_err(|e| e.to_string())?;
                let cert = certify(&trace).map_err(|e| format!("{} m={m} seed={seed}: {e}", s.name()))?;
                let need = theorem_leaf_bound(m) as usize;
                ensure(5 * cert.disjoint_count >= need, || {
                    format!("{} m={m} seed={seed}: {} pairs < {need}/5", s.name(), cert.disjoint_count)
                })?;
                ensure(cert.certified_area == p.rel_isop_c * cert.disjoint_count as f64, || "area mismatch".into())?;
                runs.push(cert.disjoint_count);
            }
        }
    }
    Ok(format!("{} certificates, min disjoint pairs {}", runs.len(), runs.iter().min().unwrap()))
}

fn iso_solver() -> Outcome {
    let caps = Caps::default();
    let p = BlockParams::default();
    let mut prev: Option<(u32, f64)> = None;
    let mut ls = Vec::new();
    for m in 2..=10 {
        let q = iso_profile_lower_bound(m, &p, &caps).map_err(|e| e.to_string())?;
        if !q.vacuous {
            ensure(q.bracket_width <= ISO_BRACKET_TOL, || format!("m={m}: bracket {}", q.bracket_width))?;
            let tol = 1e-9 * (p.c3 * q.k as f64).max(1.0);
            ensure(q.residual.abs() <= tol, || format!("m={m}: residual {}", q.residual))?;
        }
        if let Some((k0, l0)) = prev {
            if q.k >= k0 {
                ensure(q.l_star >= l0, || format!("m={m}: L* {} < {l0} with k {} >= {k0}", q.l_star, q.k))?;
            }
        }
        prev = Some((q.k, q.l_star));
        ls.push(format!("{:.6}", q.l_star));

        for iso_c in [0.0, 1e-14] {
            let pz = BlockParams { iso_c, ..p.clone() };
            let qz = iso_profile_lower_bound(m, &pz, &caps).map_err(|e| e.to_string())?;
            let closed = iso_limit_without_profile_constant(&pz, qz.k);
            ensure((qz.l_star - closed).abs() <= 1e-8, || {
                format!("m={m} iso_C={iso_c}: bisection {} vs closed form {closed}", qz.l_star)
            })?;
        }
    }
    Ok(format!("L* for m=2..10: [{}]", ls.join(", ")))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 oracle equivalence", oracle_equivalence),
        ("2 leaf theorem replay", leaf_bound_replay),
        ("3 achievable-set cardinality", cardinality_replay),
        ("4 Lipschitz suites", lipschitz_suites),
        ("5 unbounded node profile trend", node_profile_trend),
        ("6 disjoint pair matching", matching_bound),
        ("7 volume conservation", volume_conservation),
        ("8 width certification", width_certification),
        ("9 isoperimetric solver", iso_solver),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!("PASS criterion {name} ({:.2?}): {detail}", start.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name} ({:.2?}): {why}", start.elapsed());
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all {} acceptance criteria passed", criteria.len());
}
