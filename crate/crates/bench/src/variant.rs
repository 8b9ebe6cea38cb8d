//! The trees under comparison and a uniform wrapper around them.

use std::fmt;
use std::str::FromStr;

use wbtree::oracle::audit_balance;
use wbtree::params::Feasibility;
use wbtree::view::{dump, structure};
use wbtree::{average_depth, BalanceParams, MetricsSink, RbTree, Rebalance, WbTree};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TreeKind {
    BottomUp,
    TopDown,
    RedBlack,
}

impl TreeKind {
    pub fn name(self) -> &'static str {
        match self {
            TreeKind::BottomUp => "bottom-up",
            TreeKind::TopDown => "top-down",
            TreeKind::RedBlack => "red-black",
        }
    }
}

impl FromStr for TreeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "bottom-up" | "bu" => Ok(TreeKind::BottomUp),
            "top-down" | "td" => Ok(TreeKind::TopDown),
            "red-black" | "rb" => Ok(TreeKind::RedBlack),
            other => Err(format!(
                "unknown tree variant `{other}` (bottom-up, top-down, red-black)"
            )),
        }
    }
}

/// One tree configuration: a rebalancing scheme plus its parameters. The
/// red-black tree has no parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Variant {
    pub kind: TreeKind,
    pub params: Option<BalanceParams>,
}

impl Variant {
    pub fn weight_balanced(kind: TreeKind, params: BalanceParams) -> Self {
        assert!(kind != TreeKind::RedBlack);
        Variant {
            kind,
            params: Some(params),
        }
    }

    pub fn red_black() -> Self {
        Variant {
            kind: TreeKind::RedBlack,
            params: None,
        }
    }

    pub fn params_name(&self) -> String {
        self.params.map_or_else(|| "-".to_string(), |p| p.name())
    }

    /// Whether balance is guaranteed, so that a violation is a bug.
    pub fn feasible(&self) -> bool {
        let Some(p) = self.params else { return true };
        let Feasibility {
            bottom_up_feasible,
            top_down_feasible,
        } = p.classify_feasibility();
        match self.kind {
            TreeKind::BottomUp => bottom_up_feasible,
            TreeKind::TopDown => top_down_feasible,
            TreeKind::RedBlack => true,
        }
    }

    pub fn build(&self, sink: MetricsSink) -> AnyTree {
        match (self.kind, self.params) {
            (TreeKind::BottomUp, Some(p)) => {
                AnyTree::Wb(WbTree::new(p, Rebalance::BottomUp).with_sink(sink))
            }
            (TreeKind::TopDown, Some(p)) => {
                AnyTree::Wb(WbTree::new(p, Rebalance::TopDown).with_sink(sink))
            }
            _ => AnyTree::Rb(RbTree::new().with_sink(sink)),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.params {
            Some(p) => write!(f, "{} {}", self.kind.name(), p.name()),
            None => f.write_str(self.kind.name()),
        }
    }
}

/// Cartesian product of weight-balanced kinds and parameter sets; the
/// red-black tree, if requested, appears once.
pub fn expand_variants(kinds: &[TreeKind], params: &[BalanceParams]) -> Vec<Variant> {
    let mut out = Vec::new();
    for &k in kinds {
        if k == TreeKind::RedBlack {
            out.push(Variant::red_black());
        } else {
            out.extend(params.iter().map(|&p| Variant::weight_balanced(k, p)));
        }
    }
    out
}

#[derive(Clone)]
pub enum AnyTree {
    Wb(WbTree<i64>),
    Rb(RbTree<i64>),
}

impl AnyTree {
    #[inline]
    pub fn insert(&mut self, key: i64) {
        match self {
            AnyTree::Wb(t) => {
                t.insert(key);
            }
            AnyTree::Rb(t) => {
                t.insert(key);
            }
        }
    }

    #[inline]
    pub fn remove(&mut self, key: &i64) -> bool {
        match self {
            AnyTree::Wb(t) => t.remove(key),
            AnyTree::Rb(t) => t.remove(key),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            AnyTree::Wb(t) => t.len(),
            AnyTree::Rb(t) => t.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn average_depth(&self) -> f64 {
        match self {
            AnyTree::Wb(t) => average_depth(t),
            AnyTree::Rb(t) => average_depth(t),
        }
    }

    /// Unbalanced nodes under the tree's own parameters; always 0 for the
    /// red-black tree, whose invariants are checked by [`AnyTree::audit`].
    pub fn violation_count(&self) -> usize {
        match self {
            AnyTree::Wb(t) => t.violation_count(),
            AnyTree::Rb(_) => 0,
        }
    }

    pub fn sink(&self) -> &MetricsSink {
        match self {
            AnyTree::Wb(t) => t.sink(),
            AnyTree::Rb(t) => t.sink(),
        }
    }

    pub fn sink_mut(&mut self) -> &mut MetricsSink {
        match self {
            AnyTree::Wb(t) => t.sink_mut(),
            AnyTree::Rb(t) => t.sink_mut(),
        }
    }

    /// Shape dump for determinism checks; weights are included for
    /// weight-balanced trees.
    pub fn shape(&self) -> String {
        match self {
            AnyTree::Wb(t) => dump(t),
            AnyTree::Rb(t) => structure(t),
        }
    }

    /// Structural checks, plus an exact balance audit when `check_balance`.
    /// Returns a description of the first problems found.
    pub fn audit(&self, check_balance: bool) -> Result<(), String> {
        match self {
            AnyTree::Wb(t) => {
                let report = t.validate();
                if !report.is_clean() {
                    return Err(format!(
                        "{} structural violations, first: {:?}",
                        report.violations.len(),
                        report.violations[0]
                    ));
                }
                if check_balance {
                    let found = audit_balance(t, t.params());
                    if let Some(first) = found.first() {
                        return Err(format!(
                            "{} unbalanced nodes, first: {}",
                            found.len(),
                            first.detail
                        ));
                    }
                }
                Ok(())
            }
            AnyTree::Rb(t) => match t.audit().first() {
                Some((kind, detail)) => Err(format!("red-black {kind:?}: {detail}")),
                None => Ok(()),
            },
        }
    }
}
