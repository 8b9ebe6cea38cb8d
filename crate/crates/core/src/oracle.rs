//! Reference implementations used to check the trees: a sorted-vector
//! multiset and auditors that recompute subtree sizes by traversal and
//! re-evaluate the balance inequalities in exact arithmetic.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::FromPrimitive;

use crate::params::{BalanceParams, Value, CLASSIC_DELTA};
use crate::view::{Dir, NodeId, TreeView, WeightedView};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SortedMultisetOracle<K> {
    keys: Vec<K>,
}

impl<K: Ord + Clone> SortedMultisetOracle<K> {
    pub fn new() -> Self {
        SortedMultisetOracle { keys: Vec::new() }
    }

    pub fn insert(&mut self, key: K) {
        let at = self.keys.partition_point(|k| *k <= key);
        self.keys.insert(at, key);
    }

    /// Removes one occurrence.
    pub fn delete(&mut self, key: &K) -> bool {
        match self.keys.binary_search(key) {
            Ok(i) => {
                self.keys.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn inorder(&self) -> &[K] {
        &self.keys
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&K> {
        self.keys.get(i)
    }
}

pub fn equivalence_check<T>(tree: &T, oracle: &SortedMultisetOracle<T::Key>) -> bool
where
    T: TreeView,
    T::Key: Ord + Clone,
{
    if tree.len() != oracle.len() {
        return false;
    }
    let nodes = tree.inorder_nodes();
    nodes.len() == oracle.len()
        && nodes
            .iter()
            .zip(oracle.inorder())
            .all(|(&v, k)| tree.key(v) == k)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditKind {
    /// Stored weight differs from the recounted one.
    Weight,
    /// Balance inequality fails at the node.
    Balance,
    /// Key outside the bounds implied by its ancestors.
    Order,
    /// Child's parent pointer does not point back.
    Link,
    /// Reported length differs from the reachable node count.
    Size,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditFinding {
    pub kind: AuditKind,
    pub node: Option<NodeId>,
    pub detail: String,
}

/// Weight of every reachable node, counted bottom-up without reading any
/// stored weight.
fn recount<T: TreeView>(tree: &T) -> HashMap<NodeId, u64> {
    let mut weights = HashMap::with_capacity(tree.len());
    let mut stack: Vec<(NodeId, bool)> = tree.root().map(|r| (r, false)).into_iter().collect();
    while let Some((v, expanded)) = stack.pop() {
        if expanded {
            let side = |d| tree.child(v, d).map_or(1, |c| weights[&c]);
            let w = side(Dir::Left) + side(Dir::Right);
            weights.insert(v, w);
        } else {
            if weights.contains_key(&v) || weights.len() > tree.len() + 1 {
                // revisit means a cycle; stop before looping forever
                break;
            }
            stack.push((v, true));
            for d in [Dir::Left, Dir::Right] {
                if let Some(c) = tree.child(v, d) {
                    stack.push((c, false));
                }
            }
        }
    }
    weights
}

/// Weight identity, weak key order, parent links and size, all against a
/// fresh recount.
pub fn audit_structure<T>(tree: &T) -> Vec<AuditFinding>
where
    T: WeightedView,
    T::Key: Ord,
{
    let mut out = Vec::new();
    let weights = recount(tree);
    if weights.len() != tree.len() {
        out.push(AuditFinding {
            kind: AuditKind::Size,
            node: None,
            detail: format!("len {} but {} reachable nodes", tree.len(), weights.len()),
        });
    }
    for (&v, &w) in &weights {
        let stored = tree.weight(Some(v));
        if stored != w {
            out.push(AuditFinding {
                kind: AuditKind::Weight,
                node: Some(v),
                detail: format!("stored {stored}, counted {w}"),
            });
        }
    }
    if let Some(r) = tree.root() {
        if tree.parent(r).is_some() {
            out.push(AuditFinding {
                kind: AuditKind::Link,
                node: Some(r),
                detail: "root has a parent".into(),
            });
        }
    }
    // node with the key bounds implied by its ancestors
    type Frame<'a, K> = (NodeId, Option<&'a K>, Option<&'a K>);
    let mut stack: Vec<Frame<T::Key>> = tree.root().map(|r| (r, None, None)).into_iter().collect();
    let mut seen = 0;
    while let Some((v, lo, hi)) = stack.pop() {
        seen += 1;
        if seen > weights.len() {
            break;
        }
        let k = tree.key(v);
        if lo.is_some_and(|b| k < b) || hi.is_some_and(|b| k > b) {
            out.push(AuditFinding {
                kind: AuditKind::Order,
                node: Some(v),
                detail: "key outside ancestor bounds".into(),
            });
        }
        for (d, bounds) in [(Dir::Left, (lo, Some(k))), (Dir::Right, (Some(k), hi))] {
            if let Some(c) = tree.child(v, d) {
                if tree.parent(c) != Some(v) {
                    out.push(AuditFinding {
                        kind: AuditKind::Link,
                        node: Some(c),
                        detail: format!("parent of {c:?} is not {v:?}"),
                    });
                }
                stack.push((c, bounds.0, bounds.1));
            }
        }
    }
    out
}

/// Nodes where `|L|·Δ ≥ |R|` or `|R|·Δ ≥ |L|` fails, using recounted sizes
/// and exact arithmetic.
pub fn audit_balance<T: TreeView>(tree: &T, params: &BalanceParams) -> Vec<AuditFinding> {
    let weights = recount(tree);
    let check = ExactDelta::new(params.delta());
    let mut out = Vec::new();
    for v in tree.inorder_nodes() {
        let side = |d| tree.child(v, d).map_or(1, |c| weights[&c]);
        let (l, r) = (side(Dir::Left), side(Dir::Right));
        if !check.dominates(l, r) || !check.dominates(r, l) {
            out.push(AuditFinding {
                kind: AuditKind::Balance,
                node: Some(v),
                detail: format!("|L|={l} |R|={r}"),
            });
        }
    }
    out.sort_by_key(|f| f.node);
    out
}

enum ExactDelta {
    Rational(BigUint, BigUint),
    /// 1 + √2, compared without rounding.
    Classic,
    Dyadic(BigRational),
}

impl ExactDelta {
    fn new(delta: Value) -> Self {
        match delta {
            Value::Exact(r) => ExactDelta::Rational(BigUint::from(r.num()), BigUint::from(r.den())),
            Value::Real(x) if x == CLASSIC_DELTA => ExactDelta::Classic,
            Value::Real(x) => ExactDelta::Dyadic(BigRational::from_f64(x).expect("finite delta")),
        }
    }

    /// `a·Δ ≥ b`.
    fn dominates(&self, a: u64, b: u64) -> bool {
        match self {
            ExactDelta::Rational(num, den) => BigUint::from(a) * num >= BigUint::from(b) * den,
            ExactDelta::Classic => {
                // a(1+√2) ≥ b  ⇔  b ≤ a  or  (b−a)² ≤ 2a²
                b <= a || {
                    let d = (b - a) as u128;
                    d * d <= 2 * (a as u128) * (a as u128)
                }
            }
            ExactDelta::Dyadic(delta) => {
                let a = BigRational::from_integer(a.into());
                let b = BigRational::from_integer(b.into());
                a * delta >= b
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Canonical;
    use crate::tree::{Rebalance, WbTree};

    #[test]
    fn oracle_examples() {
        let mut o = SortedMultisetOracle::new();
        for k in [3, 1, 2] {
            o.insert(k);
        }
        assert_eq!(o.inorder(), &[1, 2, 3]);
        assert!(!o.delete(&7));
        o.insert(5);
        o.insert(5);
        assert!(o.delete(&5));
        assert_eq!(o.inorder().iter().filter(|&&k| k == 5).count(), 1);
    }

    #[test]
    fn equivalence_examples() {
        let t: WbTree<i64> = WbTree::new(Canonical::Integral.params(), Rebalance::BottomUp);
        let mut o = SortedMultisetOracle::new();
        assert!(equivalence_check(&t, &o));
        let mut t = t;
        t.insert(4);
        t.insert(4);
        o.insert(4);
        assert!(!equivalence_check(&t, &o));
        o.insert(4);
        assert!(equivalence_check(&t, &o));
    }

    #[test]
    fn audits_on_correct_and_corrupt_trees() {
        let p = Canonical::Integral.params();
        let mut t = WbTree::new(p, Rebalance::BottomUp);
        for k in 0..100 {
            t.insert(k);
        }
        assert!(audit_structure(&t).is_empty());
        assert!(audit_balance(&t, &p).is_empty());
        let v = t.find(&40).unwrap();
        t.corrupt_weight(v, 99);
        let found = audit_structure(&t);
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].kind, found[0].node), (AuditKind::Weight, Some(v)));
        // the balance audit never looks at stored weights
        assert!(audit_balance(&t, &p).is_empty());
    }

    #[test]
    fn left_path_flags_only_the_root() {
        let p = Canonical::Integral.params();
        let mut t = WbTree::new(p, Rebalance::BottomUp);
        for k in [4, 3, 2, 1] {
            t.insert_unbalanced(k);
        }
        let found = audit_balance(&t, &p);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].node, t.root());
    }

    #[test]
    fn classic_surd_comparison() {
        let e = ExactDelta::Classic;
        // 2·(1+√2) ≈ 4.83
        assert!(e.dominates(2, 4));
        assert!(!e.dominates(2, 5));
        // 5·(1+√2) ≈ 12.07, 12 fits and 13 does not
        assert!(e.dominates(5, 12));
        assert!(!e.dominates(5, 13));
        for a in 1..200u64 {
            for b in 1..600u64 {
                let f = a as f64 * CLASSIC_DELTA >= b as f64;
                assert_eq!(e.dominates(a, b), f, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn dyadic_delta() {
        let e = ExactDelta::new(Value::Real(2.5));
        assert!(e.dominates(2, 5));
        assert!(!e.dominates(2, 6));
    }
}
