//! Instrumentation: rotation and touch counters, balance-violation counts,
//! average node depth and wall-clock timing.

use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::params::BalanceParams;
use crate::view::{Dir, TreeView, WeightedView};

/// How a double rotation shows up in the rotation counters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DoubleCount {
    /// One rotation, weighted by the outer pivot's pre-rotation weight.
    One,
    /// Two rotations: the inner pivot's weight, then the outer pivot's.
    #[default]
    Two,
}

impl FromStr for DoubleCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" => Ok(DoubleCount::One),
            "2" => Ok(DoubleCount::Two),
            other => Err(format!("double rotations count as 1 or 2, not `{other}`")),
        }
    }
}

/// Per-tree counters. A disabled sink records nothing.
#[derive(Clone, Debug, Default)]
pub struct MetricsSink {
    enabled: bool,
    shadow: bool,
    double_counts: DoubleCount,
    rotation_count: u64,
    rotated_weight_total: u64,
    touch_count: u64,
}

impl MetricsSink {
    pub fn enabled() -> Self {
        MetricsSink {
            enabled: true,
            ..Default::default()
        }
    }

    pub fn disabled() -> Self {
        MetricsSink::default()
    }

    pub fn with_double_counts(mut self, mode: DoubleCount) -> Self {
        self.double_counts = mode;
        self
    }

    /// Recount every pivot's subtree before rotating and assert it matches
    /// the stored weight. O(subtree) per rotation; meant for tests.
    pub fn with_shadow_check(mut self) -> Self {
        self.shadow = true;
        self
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn shadow_enabled(&self) -> bool {
        self.enabled && self.shadow
    }

    pub fn double_counts(&self) -> DoubleCount {
        self.double_counts
    }

    pub fn rotation_count(&self) -> u64 {
        self.rotation_count
    }

    pub fn rotated_weight_total(&self) -> u64 {
        self.rotated_weight_total
    }

    pub fn touch_count(&self) -> u64 {
        self.touch_count
    }

    pub fn reset(&mut self) {
        self.rotation_count = 0;
        self.rotated_weight_total = 0;
        self.touch_count = 0;
    }

    #[inline]
    pub fn rotation(&mut self, pivot_weight: u64) {
        if self.enabled {
            self.rotation_count += 1;
            self.rotated_weight_total += pivot_weight;
        }
    }

    #[inline]
    pub fn double_rotation(&mut self, inner_pivot_weight: u64, outer_pivot_weight: u64) {
        if !self.enabled {
            return;
        }
        match self.double_counts {
            DoubleCount::Two => {
                self.rotation(inner_pivot_weight);
                self.rotation(outer_pivot_weight);
            }
            DoubleCount::One => self.rotation(outer_pivot_weight),
        }
    }

    #[inline]
    pub fn touch(&mut self) {
        if self.enabled {
            self.touch_count += 1;
        }
    }
}

/// Nodes where `|L(v)|·Δ ≥ |R(v)|` or `|R(v)|·Δ ≥ |L(v)|` fails, by full
/// traversal over stored weights.
pub fn count_violations<T: WeightedView>(tree: &T, params: &BalanceParams) -> usize {
    let mut count = 0;
    let mut stack: Vec<_> = tree.root().into_iter().collect();
    while let Some(v) = stack.pop() {
        let l = tree.child(v, Dir::Left);
        let r = tree.child(v, Dir::Right);
        if !params.is_balanced(tree.weight(l), tree.weight(r)) {
            count += 1;
        }
        stack.extend(l);
        stack.extend(r);
    }
    count
}

/// Mean node depth with the root at depth 0; 0 for an empty tree.
pub fn average_depth<T: TreeView>(tree: &T) -> f64 {
    let (mut sum, mut n) = (0u64, 0u64);
    tree.for_each_depth(|_, d| {
        sum += d as u64;
        n += 1;
    });
    if n == 0 {
        0.0
    } else {
        sum as f64 / n as f64
    }
}

/// Average depth of the most compact tree on `n` nodes.
pub fn perfect_average_depth(n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (mut left, mut sum, mut depth) = (n as u64, 0u64, 0u64);
    while left > 0 {
        let level = (1u64 << depth).min(left);
        sum += level * depth;
        left -= level;
        depth += 1;
    }
    sum as f64 / n as f64
}

/// Runs `thunk` once and returns the elapsed monotonic time in nanoseconds.
pub fn time_block<F: FnOnce()>(_label: &str, thunk: F) -> u64 {
    let start = Instant::now();
    thunk();
    start.elapsed().as_nanos().max(1) as u64
}

/// Aggregate of repeated timings, expressed per operation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub repetitions: u64,
    pub ops_per_repetition: u64,
    pub total_ns: u64,
    pub mean_ns_per_op: f64,
    pub stddev_ns_per_op: f64,
}

/// Repeats `setup` + timed `run` until the timed total reaches `floor`
/// (at least once). Neither `setup` nor dropping `run`'s result is timed.
pub fn time_repeated<S, F, R, O>(
    floor: Duration,
    ops_per_repetition: u64,
    mut setup: S,
    mut run: F,
) -> TimingStats
where
    S: FnMut() -> R,
    F: FnMut(R) -> O,
{
    let floor_ns = floor.as_nanos() as u64;
    let mut samples = Vec::new();
    let mut total = 0u64;
    loop {
        let state = setup();
        let mut out = None;
        let ns = time_block("repetition", || out = Some(run(state)));
        drop(out);
        samples.push(ns);
        total += ns;
        if total >= floor_ns {
            break;
        }
    }
    let ops = ops_per_repetition.max(1) as f64;
    let per_op: Vec<f64> = samples.iter().map(|&s| s as f64 / ops).collect();
    let (mean, stddev) = mean_stddev(&per_op);
    TimingStats {
        repetitions: samples.len() as u64,
        ops_per_repetition,
        total_ns: total,
        mean_ns_per_op: mean,
        stddev_ns_per_op: stddev,
    }
}

/// Population mean and standard deviation.
pub fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One result row. Column order is the field order below and is part of
/// the output format; see the README.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub experiment: String,
    pub tree_variant: String,
    pub params: String,
    pub distribution: String,
    pub base_size: u64,
    pub operation: String,
    pub repetition: u64,
    pub seed: u64,
    pub ops: u64,
    pub elapsed_ns: u64,
    pub timing_repetitions: u64,
    pub mean_ns_per_op: f64,
    pub stddev_ns_per_op: f64,
    pub normalized_time: Option<f64>,
    pub rotation_count: u64,
    pub rotated_weight_total: u64,
    pub violation_count: u64,
    pub tree_size: u64,
    pub average_depth: f64,
    pub absent_deletes: u64,
}
