//! Acceptance checks. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits nonzero if any fail.
//! Pass a substring to run only the matching criteria.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use wbtree::keygen::generate;
use wbtree::metrics::mean_stddev;
use wbtree::oracle::{audit_balance, audit_structure, equivalence_check, SortedMultisetOracle};
use wbtree::{
    BalanceParams, Canonical, Distribution, MetricsRecord, RbTree, Rebalance, SkewWindows,
    SplitMix64, WbTree,
};
use wbtree_bench::experiment::{churn_shapes, replay_shapes, run, Experiment, ExperimentSpec};
use wbtree_bench::ops::OpSequence;
use wbtree_bench::variant::{expand_variants, TreeKind, Variant};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const N: usize = 100_000;

fn td(c: Canonical) -> Variant {
    Variant::weight_balanced(TreeKind::TopDown, c.params())
}

fn bu(c: Canonical) -> Variant {
    Variant::weight_balanced(TreeKind::BottomUp, c.params())
}

fn all_variants() -> Vec<Variant> {
    let params: Vec<BalanceParams> = Canonical::ALL.iter().map(|c| c.params()).collect();
    expand_variants(
        &[TreeKind::BottomUp, TreeKind::TopDown, TreeKind::RedBlack],
        &params,
    )
}

fn spec(e: Experiment, variants: Vec<Variant>, seed: u64) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(e, variants);
    s.sizes = vec![N];
    s.base_trees = 10;
    s.seed = seed;
    s
}

fn rows_of<'a>(
    rows: &'a [MetricsRecord],
    v: &Variant,
) -> impl Iterator<Item = &'a MetricsRecord> + 'a {
    let (kind, params) = (v.kind.name(), v.params_name());
    rows.iter()
        .filter(move |r| r.tree_variant == kind && r.params == params)
}

fn mean_depth(rows: &[MetricsRecord], v: &Variant) -> f64 {
    let d: Vec<f64> = rows_of(rows, v).map(|r| r.average_depth).collect();
    mean_stddev(&d).0
}

/// Grows to 10^4 nodes, then 10^5 mixed ops with the violation count
/// checked after every op and the exact audits every 5000 ops.
fn feasibility() -> Outcome {
    let configs = [
        (Rebalance::BottomUp, Canonical::Classic),
        (Rebalance::BottomUp, Canonical::Integral),
        (Rebalance::TopDown, Canonical::TopDown),
    ];
    let mut checked = 0u64;
    for (scheme, c) in configs {
        for seed in 0..10 {
            let p = c.params();
            let mut t = WbTree::new(p, scheme);
            let mut rng = SplitMix64::fork(seed, &[0xfea5]);
            let mut present = Vec::new();
            let fail = |what: String| {
                Err(format!(
                    "{} {} seed {seed}: {what}",
                    scheme.name(),
                    c.name()
                ))
            };
            let check = |t: &WbTree<i64>, i: usize, exact: bool| -> Result<(), String> {
                let v = t.violation_count();
                if v != 0 {
                    return Err(format!("{v} unbalanced nodes after op {i}"));
                }
                if exact {
                    if let Some(f) = audit_structure(t).first() {
                        return Err(format!("structure after op {i}: {}", f.detail));
                    }
                    if let Some(f) = audit_balance(t, &p).first() {
                        return Err(format!("exact balance after op {i}: {}", f.detail));
                    }
                }
                Ok(())
            };
            for i in 0..10_000 {
                let k = rng.next_u64() as i64 >> 1;
                t.insert(k);
                present.push(k);
                if let Err(e) = check(&t, i, false) {
                    return fail(e);
                }
            }
            for i in 0..100_000 {
                let r = rng.below(32);
                if r < 15 {
                    let k = rng.next_u64() as i64 >> 1;
                    t.insert(k);
                    present.push(k);
                } else if r < 31 && !present.is_empty() {
                    let k = present.swap_remove(rng.below(present.len() as u64) as usize);
                    if !t.remove(&k) {
                        return fail(format!("present key {k} not removed"));
                    }
                } else if t.remove(&-1) {
                    return fail("absent key reported as removed".into());
                }
                if let Err(e) = check(&t, i, i % 5000 == 4999) {
                    return fail(e);
                }
                checked += 1;
            }
            if t.len() != present.len() {
                return fail(format!(
                    "size {} but {} keys present",
                    t.len(),
                    present.len()
                ));
            }
        }
    }
    Ok(format!(
        "{checked} mixed ops over 3 configs x 10 seeds, 0 violations"
    ))
}

fn oracle_equivalence() -> Outcome {
    let variants = all_variants();
    for v in &variants {
        for seed in 0..5 {
            let mut rng = SplitMix64::fork(seed, &[0x0ac1e]);
            let mut o = SortedMultisetOracle::new();
            let mut t = v.build(Default::default());
            for i in 0..10_000 {
                let k = rng.below(5_000) as i64;
                if rng.below(5) < 2 {
                    let (a, b) = (t.remove(&k), o.delete(&k));
                    if a != b {
                        return Err(format!(
                            "{v} seed {seed} op {i}: delete({k}) gave {a}, oracle {b}"
                        ));
                    }
                } else {
                    t.insert(k);
                    o.insert(k);
                }
                let same = match &t {
                    wbtree_bench::variant::AnyTree::Wb(t) => equivalence_check(t, &o),
                    wbtree_bench::variant::AnyTree::Rb(t) => equivalence_check(t, &o),
                };
                if !same {
                    return Err(format!("{v} seed {seed}: in-order differs after op {i}"));
                }
            }
        }
    }
    Ok(format!("{} variants x 5 seeds x 10^4 ops", variants.len()))
}

fn violation_stabilization() -> Outcome {
    let mut s = spec(
        Experiment::ViolationsOverTime,
        vec![td(Canonical::Tight)],
        11,
    );
    s.op_pairs = Some(2 * N);
    s.sample_interval = 1_000;
    s.time_floor = Duration::ZERO;
    let rows = run(&s, None).map_err(|e| e.to_string())?;
    let mut finals = Vec::new();
    let (mut q2, mut q4) = (Vec::new(), Vec::new());
    for b in 0..10 {
        let seq: Vec<&MetricsRecord> = rows
            .iter()
            .filter(|r| r.repetition == b && r.ops > 0)
            .collect();
        if seq.len() != 200 {
            return Err(format!(
                "base tree {b}: {} samples, expected 200",
                seq.len()
            ));
        }
        let last = seq[199];
        finals.push(last.violation_count as f64 / last.tree_size as f64);
        q2.extend(seq[50..100].iter().map(|r| r.violation_count as f64));
        q4.extend(seq[150..200].iter().map(|r| r.violation_count as f64));
    }
    let worst = finals.iter().cloned().fold(0.0, f64::max);
    let mean_final = mean_stddev(&finals).0;
    let (m2, m4) = (mean_stddev(&q2).0, mean_stddev(&q4).0);
    let detail = format!(
        "final fraction mean {:.4}% max {:.4}%, quartile means Q2 {m2:.1} Q4 {m4:.1}",
        mean_final * 100.0,
        worst * 100.0
    );
    let stable = if m2 == 0.0 {
        m4 == 0.0
    } else {
        m4 <= 2.0 * m2 && m2 <= 2.0 * m4
    };
    if worst < 0.01 && stable {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn depth_ordering() -> Outcome {
    let (tight, classic, overtight) = (
        td(Canonical::Tight),
        td(Canonical::Classic),
        td(Canonical::Overtight),
    );
    let mut s = spec(Experiment::DepthChurn, vec![tight, classic, overtight], 21);
    s.time_floor = Duration::ZERO;
    let rows = run(&s, None).map_err(|e| e.to_string())?;
    let (a, b, c) = (
        mean_depth(&rows, &tight),
        mean_depth(&rows, &classic),
        mean_depth(&rows, &overtight),
    );
    let detail = format!("tight {a:.4} classic {b:.4} overtight {c:.4}");
    if a <= b && b <= c {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn zipf_depth_gap() -> Outcome {
    let mut s = spec(Experiment::DepthChurn, all_variants(), 31);
    s.distribution = Distribution::Zipf;
    s.zipf_s = 1.0;
    s.time_floor = Duration::ZERO;
    let rows = run(&s, None).map_err(|e| e.to_string())?;
    let rb = mean_depth(&rows, &Variant::red_black());
    let (best, depth) = all_variants()
        .into_iter()
        .filter(|v| v.kind != TreeKind::RedBlack)
        .map(|v| (v, mean_depth(&rows, &v)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let gap = 1.0 - depth / rb;
    let detail = format!(
        "best {best} {depth:.4}, red-black {rb:.4}, gap {:.2}%",
        gap * 100.0
    );
    if gap >= 0.05 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rotation_ratios() -> Outcome {
    let (classic, integral, topdown, overtight) = (
        td(Canonical::Classic),
        td(Canonical::Integral),
        td(Canonical::TopDown),
        td(Canonical::Overtight),
    );
    let mut s = spec(
        Experiment::Rotations,
        vec![classic, integral, topdown, overtight],
        41,
    );
    s.op_pairs = Some(N);
    s.sample_interval = N;
    s.time_floor = Duration::ZERO;
    let rows = run(&s, None).map_err(|e| e.to_string())?;
    let total = |v: &Variant| -> f64 {
        rows_of(&rows, v)
            .filter(|r| r.ops == N as u64)
            .map(|r| r.rotation_count as f64)
            .sum()
    };
    let (c, i, t, o) = (
        total(&classic),
        total(&integral),
        total(&topdown),
        total(&overtight),
    );
    let (ri, rt, ro) = (i / c, t / c, o / i);
    let detail = format!("<3,2>/classic {ri:.3}, <3,4/3>/classic {rt:.3}, overtight/<3,2> {ro:.2}");
    let inside = |r: f64| (0.3..=0.7).contains(&r);
    if inside(ri) && inside(rt) && ro >= 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn top_down_faster() -> Outcome {
    let (top, bottom) = (td(Canonical::Classic), bu(Canonical::Classic));
    let mut s = spec(Experiment::InsertPct, vec![top, bottom], 51);
    s.serial = true;
    let rows = run(&s, None).map_err(|e| e.to_string())?;
    let mut wins = 0;
    let mut ratios = Vec::new();
    for b in 0..10 {
        let t = rows_of(&rows, &top)
            .find(|r| r.repetition == b)
            .unwrap()
            .mean_ns_per_op;
        let u = rows_of(&rows, &bottom)
            .find(|r| r.repetition == b)
            .unwrap()
            .mean_ns_per_op;
        wins += usize::from(t < u);
        ratios.push(t / u);
    }
    let detail = format!(
        "top-down faster on {wins}/10 base trees, mean time ratio top-down/bottom-up {:.3}",
        mean_stddev(&ratios).0
    );
    if wins >= 8 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn red_black_audit() -> Outcome {
    for seed in 0..5 {
        let mut rng = SplitMix64::fork(seed, &[0x4b]);
        let mut t = RbTree::new();
        let mut present = Vec::new();
        for i in 0..10_000 {
            if present.is_empty() || rng.below(5) < 3 {
                let k = rng.below(20_000) as i64;
                t.insert(k);
                present.push(k);
            } else {
                let k = present.swap_remove(rng.below(present.len() as u64) as usize);
                if !t.remove(&k) {
                    return Err(format!("seed {seed} op {i}: present key {k} not removed"));
                }
            }
            if let Some((kind, detail)) = t.audit().first() {
                return Err(format!("seed {seed} op {i}: {kind:?} {detail}"));
            }
        }
    }
    Ok("5 seeds x 10^4 ops, audit clean after every op".into())
}

fn determinism() -> Outcome {
    let windows = SkewWindows::default();
    for d in Distribution::ALL {
        let bytes = || {
            let w = generate(d, 20_000, 1 << 40, 1.0, windows, 61).unwrap();
            let mut buf = Vec::new();
            w.write_to(&mut buf).unwrap();
            buf
        };
        if bytes() != bytes() {
            return Err(format!("{d} key files differ"));
        }
    }

    let cli = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_wbtree-bench"))
            .args(["gen-keys", "--dist", "zipf", "--n", "5000", "--seed", seed])
            .output()
            .unwrap()
            .stdout
    };
    if cli("8") != cli("8") || cli("8") == cli("9") {
        return Err("CLI key output does not follow the seed".into());
    }

    let mut s = spec(Experiment::DepthChurn, all_variants(), 62);
    s.sizes = vec![2_000];
    s.base_trees = 3;
    s.distribution = Distribution::Skewed;
    let a = churn_shapes(&s).map_err(|e| e.to_string())?;
    s.serial = true;
    let b = churn_shapes(&s).map_err(|e| e.to_string())?;
    if a != b {
        return Err("churn shapes differ between runs".into());
    }

    let keys: Vec<i64> = generate(Distribution::Uniform, 6_000, 10_000, 1.0, windows, 63)
        .unwrap()
        .keys
        .into_iter()
        .map(|k| k as i64)
        .collect();
    let seq = OpSequence::mixed(&keys, 2_000, 63);
    let reloaded: OpSequence = seq.to_string().parse().map_err(|e| format!("{e}"))?;
    if replay_shapes(&all_variants(), &seq) != replay_shapes(&all_variants(), &reloaded) {
        return Err("replayed shapes differ after dump and reload".into());
    }
    Ok(format!(
        "4 key files, {} churn shapes, 11 replay shapes identical",
        a.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("feasibility invariant", feasibility),
        ("oracle equivalence", oracle_equivalence),
        ("violation stabilization", violation_stabilization),
        ("depth ordering", depth_ordering),
        ("zipf depth gap", zipf_depth_gap),
        ("rotation ratios", rotation_ratios),
        ("top-down faster than bottom-up", top_down_faster),
        ("red-black audit", red_black_audit),
        ("determinism", determinism),
    ];
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filters.is_empty() && !filters.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
