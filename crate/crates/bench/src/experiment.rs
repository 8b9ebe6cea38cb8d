//! The experiments: timed 5% insert/erase batches, depth after key churn,
//! violation and rotation counts over time, and sequence replay.
//!
//! Work is split into cells, one per (base size, base-tree index). Each
//! cell draws its own workload from a seed derived from the run seed, the
//! size and the index, and runs every variant on it in turn, so all
//! variants see identical key streams.

use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::{Duration, Instant};

use thiserror::Error;
use wbtree::keygen::{generate, WorkloadError};
use wbtree::metrics::{time_repeated, TimingStats};
use wbtree::{
    Canonical, Distribution, DoubleCount, MetricsRecord, MetricsSink, SkewWindows, SplitMix64,
};

use crate::ops::{Op, OpSequence, ParseError};
use crate::par;
use crate::variant::{AnyTree, TreeKind, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    InsertPct,
    ErasePct,
    DepthChurn,
    ViolationsOverTime,
    Rotations,
    Replay,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::InsertPct,
        Experiment::ErasePct,
        Experiment::DepthChurn,
        Experiment::ViolationsOverTime,
        Experiment::Rotations,
        Experiment::Replay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::InsertPct => "insert-pct",
            Experiment::ErasePct => "erase-pct",
            Experiment::DepthChurn => "depth-churn",
            Experiment::ViolationsOverTime => "violations",
            Experiment::Rotations => "rotations",
            Experiment::Replay => "replay",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error("audit failed: {0}")]
    Audit(String),
    #[error(transparent)]
    Workload(#[from] WorkloadError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub variants: Vec<Variant>,
    pub distribution: Distribution,
    pub zipf_s: f64,
    pub windows: SkewWindows,
    /// Keys are drawn from `[0, universe)`; ignored by the pre-sorted
    /// distribution, which uses `0..n`.
    pub universe: u64,
    pub sizes: Vec<usize>,
    pub base_trees: usize,
    pub seed: u64,
    pub time_floor: Duration,
    /// Sampling period, in op pairs, of the over-time experiments.
    pub sample_interval: usize,
    /// Op pairs for the over-time experiments; defaults to the base size.
    pub op_pairs: Option<usize>,
    pub double_counts: DoubleCount,
    pub audit: bool,
    pub serial: bool,
}

pub const DEFAULT_UNIVERSE: u64 = 1 << 62;

impl ExperimentSpec {
    pub fn new(experiment: Experiment, variants: Vec<Variant>) -> Self {
        ExperimentSpec {
            experiment,
            variants,
            distribution: Distribution::Uniform,
            zipf_s: 1.0,
            windows: SkewWindows::default(),
            universe: DEFAULT_UNIVERSE,
            sizes: vec![1_000, 10_000, 100_000],
            base_trees: 10,
            seed: 1,
            time_floor: Duration::from_secs(1),
            sample_interval: 10_000,
            op_pairs: None,
            double_counts: DoubleCount::Two,
            audit: false,
            serial: false,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Invalid(m.to_string()));
        if self.variants.is_empty() {
            return bad("no tree variants selected");
        }
        if self.base_trees == 0 {
            return bad("base-tree count must be at least 1");
        }
        if self.experiment != Experiment::Replay
            && (self.sizes.is_empty() || self.sizes.contains(&0))
        {
            return bad("sizes must be non-empty and strictly positive");
        }
        if self.sample_interval == 0 {
            return bad("sample interval must be positive");
        }
        if self.universe == 0 || self.universe > i64::MAX as u64 {
            return bad("universe must lie in 1..=2^63-1");
        }
        Ok(())
    }

    fn op_pairs_for(&self, size: usize) -> usize {
        self.op_pairs.unwrap_or(size)
    }

    fn sink(&self) -> MetricsSink {
        MetricsSink::enabled().with_double_counts(self.double_counts)
    }
}

/// `⌈size/20⌉`, the batch size of the 5% experiments.
pub fn five_percent(size: usize) -> usize {
    size.div_ceil(20)
}

/// Seed of one (size, base-tree) cell.
pub fn cell_seed(seed: u64, size: usize, base_index: usize) -> u64 {
    SplitMix64::fork(seed, &[size as u64, base_index as u64]).next_u64()
}

struct Cell {
    size: usize,
    index: usize,
    seed: u64,
    keys: Vec<i64>,
}

impl Cell {
    fn record(&self, spec: &ExperimentSpec, v: &Variant, operation: &str) -> MetricsRecord {
        MetricsRecord {
            experiment: spec.experiment.name().to_string(),
            tree_variant: v.kind.name().to_string(),
            params: v.params_name(),
            distribution: spec.distribution.name().to_string(),
            base_size: self.size as u64,
            operation: operation.to_string(),
            repetition: self.index as u64,
            seed: self.seed,
            ..Default::default()
        }
    }

    fn base(&self, v: &Variant, sink: MetricsSink) -> AnyTree {
        let mut t = v.build(sink);
        for &k in &self.keys[..self.size] {
            t.insert(k);
        }
        t.sink_mut().reset();
        t
    }

    /// Independent stream for choices other than keys (victims, erasures).
    fn choice_rng(&self) -> SplitMix64 {
        SplitMix64::fork(self.seed, &[0xc401ce])
    }
}

fn audit(
    spec: &ExperimentSpec,
    v: &Variant,
    t: &AnyTree,
    phase: &str,
) -> Result<(), ExperimentError> {
    if spec.audit {
        t.audit(v.feasible())
            .map_err(|e| ExperimentError::Audit(format!("{v}, {phase}: {e}")))?;
    }
    Ok(())
}

fn fill_metrics(row: &mut MetricsRecord, t: &AnyTree) {
    row.rotation_count = t.sink().rotation_count();
    row.rotated_weight_total = t.sink().rotated_weight_total();
    row.violation_count = t.violation_count() as u64;
    row.tree_size = t.len() as u64;
    row.average_depth = t.average_depth();
}

fn fill_timing(row: &mut MetricsRecord, stats: &TimingStats) {
    row.ops = stats.ops_per_repetition;
    row.elapsed_ns = stats.total_ns;
    row.timing_repetitions = stats.repetitions;
    row.mean_ns_per_op = stats.mean_ns_per_op;
    row.stddev_ns_per_op = stats.stddev_ns_per_op;
}

/// Runs `body` on every cell, each cell seeing a workload of
/// `size + extra(size)` keys, and concatenates the rows in cell order.
fn over_cells<F>(
    spec: &ExperimentSpec,
    extra: impl Fn(usize) -> usize + Sync,
    body: F,
) -> Result<Vec<MetricsRecord>, ExperimentError>
where
    F: Fn(&Cell) -> Result<Vec<MetricsRecord>, ExperimentError> + Sync + Send,
{
    spec.validate()?;
    let coords: Vec<(usize, usize)> = spec
        .sizes
        .iter()
        .flat_map(|&s| (0..spec.base_trees).map(move |b| (s, b)))
        .collect();
    let results = par::map_cells(&coords, spec.serial, |&(size, index)| {
        let seed = cell_seed(spec.seed, size, index);
        let n = size + extra(size);
        let w = generate(
            spec.distribution,
            n,
            spec.universe,
            spec.zipf_s,
            spec.windows,
            seed,
        )?;
        let keys = w.keys.into_iter().map(|k| k as i64).collect();
        body(&Cell {
            size,
            index,
            seed,
            keys,
        })
    });
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Times inserting `⌈5%⌉` fresh keys into each base tree; the tree is
/// restored from an untimed snapshot before every repetition.
pub fn run_insert_pct(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, ExperimentError> {
    over_cells(spec, five_percent, |cell| {
        let fresh = &cell.keys[cell.size..];
        let mut rows = Vec::new();
        for v in &spec.variants {
            let base = cell.base(v, MetricsSink::disabled());
            audit(spec, v, &base, "base tree")?;
            let stats = par::timed(|| {
                time_repeated(
                    spec.time_floor,
                    fresh.len() as u64,
                    || base.clone(),
                    |mut t| {
                        for &k in fresh {
                            t.insert(black_box(k));
                        }
                        t
                    },
                )
            });
            let mut t = base.clone();
            *t.sink_mut() = spec.sink();
            for &k in fresh {
                t.insert(k);
            }
            audit(spec, v, &t, "after insertions")?;
            let mut row = cell.record(spec, v, "insert");
            fill_timing(&mut row, &stats);
            fill_metrics(&mut row, &t);
            rows.push(row);
        }
        Ok(rows)
    })
}

/// Times deleting `⌈5%⌉` keys picked uniformly from each base tree.
pub fn run_erase_pct(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, ExperimentError> {
    over_cells(
        spec,
        |_| 0,
        |cell| {
            let m = five_percent(cell.size);
            let mut positions: Vec<usize> = (0..cell.size).collect();
            let mut rng = cell.choice_rng();
            for i in 0..m {
                let j = i + rng.below((cell.size - i) as u64) as usize;
                positions.swap(i, j);
            }
            let victims: Vec<i64> = positions[..m].iter().map(|&p| cell.keys[p]).collect();
            let mut rows = Vec::new();
            for v in &spec.variants {
                let base = cell.base(v, MetricsSink::disabled());
                audit(spec, v, &base, "base tree")?;
                let stats = par::timed(|| {
                    time_repeated(
                        spec.time_floor,
                        m as u64,
                        || base.clone(),
                        |mut t| {
                            for k in &victims {
                                black_box(t.remove(k));
                            }
                            t
                        },
                    )
                });
                let mut t = base.clone();
                *t.sink_mut() = spec.sink();
                let absent = victims.iter().filter(|k| !t.remove(k)).count();
                audit(spec, v, &t, "after deletions")?;
                let mut row = cell.record(spec, v, "erase");
                fill_timing(&mut row, &stats);
                fill_metrics(&mut row, &t);
                row.absent_deletes = absent as u64;
                rows.push(row);
            }
            Ok(rows)
        },
    )
}

/// Removes every base key in insertion order and reinserts a fresh key
/// from the same distribution, then records the average node depth.
pub fn run_depth_churn(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, ExperimentError> {
    over_cells(
        spec,
        |s| s,
        |cell| {
            let (old, fresh) = cell.keys.split_at(cell.size);
            let mut rows = Vec::new();
            for v in &spec.variants {
                let mut t = cell.base(v, spec.sink());
                audit(spec, v, &t, "base tree")?;
                let start = Instant::now();
                let mut absent = 0;
                for (k, &new) in old.iter().zip(fresh) {
                    absent += usize::from(!t.remove(k));
                    t.insert(new);
                }
                let elapsed = start.elapsed().as_nanos().max(1) as u64;
                audit(spec, v, &t, "after churn")?;
                let mut row = cell.record(spec, v, "churn");
                row.ops = cell.size as u64;
                row.elapsed_ns = elapsed;
                row.timing_repetitions = 1;
                row.mean_ns_per_op = elapsed as f64 / cell.size as f64;
                row.absent_deletes = absent as u64;
                fill_metrics(&mut row, &t);
                rows.push(row);
            }
            Ok(rows)
        },
    )
}

/// Op pairs (delete a uniformly chosen present key, insert a fresh one)
/// with a sample row every `sample_interval` pairs, plus one at the start
/// and one at the end. Rotation counters are cumulative from the start.
fn run_over_time(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, ExperimentError> {
    over_cells(
        spec,
        |s| spec.op_pairs_for(s),
        |cell| {
            let pairs = cell.keys.len() - cell.size;
            let mut rows = Vec::new();
            for v in &spec.variants {
                let mut t = cell.base(v, spec.sink());
                audit(spec, v, &t, "base tree")?;
                let mut present: Vec<i64> = cell.keys[..cell.size].to_vec();
                let mut rng = cell.choice_rng();
                let start = Instant::now();
                let sample = |t: &AnyTree, done: usize| {
                    let mut row = cell.record(spec, v, "sample");
                    row.ops = done as u64;
                    row.elapsed_ns = start.elapsed().as_nanos() as u64;
                    fill_metrics(&mut row, t);
                    row
                };
                rows.push(sample(&t, 0));
                for (i, &new) in cell.keys[cell.size..].iter().enumerate() {
                    let victim = present.swap_remove(rng.below(present.len() as u64) as usize);
                    let removed = t.remove(&victim);
                    debug_assert!(removed);
                    t.insert(new);
                    present.push(new);
                    let done = i + 1;
                    if done % spec.sample_interval == 0 || done == pairs {
                        audit(spec, v, &t, &format!("after {done} op pairs"))?;
                        rows.push(sample(&t, done));
                    }
                }
            }
            Ok(rows)
        },
    )
}

pub fn run_violations_over_time(
    spec: &ExperimentSpec,
) -> Result<Vec<MetricsRecord>, ExperimentError> {
    run_over_time(spec)
}

pub fn run_rotations(spec: &ExperimentSpec) -> Result<Vec<MetricsRecord>, ExperimentError> {
    run_over_time(spec)
}

fn apply(t: &mut AnyTree, seq: &OpSequence) -> usize {
    let mut absent = 0;
    for op in &seq.ops {
        match *op {
            Op::Insert(k) => t.insert(black_box(k)),
            Op::Delete(k) => absent += usize::from(!t.remove(&k)),
        }
    }
    absent
}

/// Replays `seq` on an empty tree of every variant. Times are also
/// reported relative to bottom-up ⟨1+√2,√2⟩, which is timed even when it
/// is not among the variants.
pub fn run_replay(
    spec: &ExperimentSpec,
    seq: &OpSequence,
) -> Result<Vec<MetricsRecord>, ExperimentError> {
    spec.validate()?;
    let baseline = Variant::weight_balanced(TreeKind::BottomUp, Canonical::Classic.params());
    let time = |v: &Variant| {
        par::timed(|| {
            time_repeated(
                spec.time_floor,
                seq.len() as u64,
                || v.build(MetricsSink::disabled()),
                |mut t| {
                    apply(&mut t, seq);
                    t
                },
            )
        })
    };
    let mut timed: Vec<(Variant, TimingStats)> = Vec::new();
    for v in &spec.variants {
        timed.push((*v, time(v)));
    }
    let base_mean = match timed.iter().find(|(v, _)| *v == baseline) {
        Some((_, s)) => s.mean_ns_per_op,
        None => time(&baseline).mean_ns_per_op,
    };
    let mut rows = Vec::new();
    for (v, stats) in &timed {
        let mut t = v.build(spec.sink());
        let absent = apply(&mut t, seq);
        audit(spec, v, &t, "after replay")?;
        let mut row = MetricsRecord {
            experiment: Experiment::Replay.name().to_string(),
            tree_variant: v.kind.name().to_string(),
            params: v.params_name(),
            distribution: "replay".to_string(),
            operation: "replay".to_string(),
            seed: spec.seed,
            ..Default::default()
        };
        fill_timing(&mut row, stats);
        fill_metrics(&mut row, &t);
        row.absent_deletes = absent as u64;
        row.normalized_time = (base_mean > 0.0).then(|| stats.mean_ns_per_op / base_mean);
        rows.push(row);
    }
    Ok(rows)
}

/// Dispatches on `spec.experiment`; `seq` is required for replay.
pub fn run(
    spec: &ExperimentSpec,
    seq: Option<&OpSequence>,
) -> Result<Vec<MetricsRecord>, ExperimentError> {
    match spec.experiment {
        Experiment::InsertPct => run_insert_pct(spec),
        Experiment::ErasePct => run_erase_pct(spec),
        Experiment::DepthChurn => run_depth_churn(spec),
        Experiment::ViolationsOverTime => run_violations_over_time(spec),
        Experiment::Rotations => run_rotations(spec),
        Experiment::Replay => match seq {
            Some(s) => run_replay(spec, s),
            None => Err(ExperimentError::Invalid(
                "replay needs an operation file".into(),
            )),
        },
    }
}

/// Final tree shape of every variant after replaying `seq`; used for
/// determinism checks.
pub fn replay_shapes(variants: &[Variant], seq: &OpSequence) -> Vec<String> {
    variants
        .iter()
        .map(|v| {
            let mut t = v.build(MetricsSink::disabled());
            apply(&mut t, seq);
            t.shape()
        })
        .collect()
}

/// Shapes of every (cell, variant) base tree after the churn workload of
/// `spec`; used for determinism checks.
pub fn churn_shapes(spec: &ExperimentSpec) -> Result<Vec<String>, ExperimentError> {
    let shapes = std::sync::Mutex::new(Vec::new());
    over_cells(
        spec,
        |s| s,
        |cell| {
            let (old, fresh) = cell.keys.split_at(cell.size);
            let mut local = Vec::new();
            for v in &spec.variants {
                let mut t = cell.base(v, MetricsSink::disabled());
                for (k, &new) in old.iter().zip(fresh) {
                    t.remove(k);
                    t.insert(new);
                }
                local.push(((cell.size, cell.index), t.shape()));
            }
            shapes.lock().unwrap().extend(local);
            Ok(Vec::new())
        },
    )?;
    let mut shapes = shapes.into_inner().unwrap();
    shapes.sort_by_key(|(cell, _)| *cell);
    Ok(shapes.into_iter().map(|(_, s)| s).collect())
}
