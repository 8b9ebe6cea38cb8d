//! Arena-backed weight-balanced tree: node storage, rotations, navigation
//! and structural validation shared by both rebalancing schemes.

use std::fmt;

use crate::metrics::MetricsSink;
use crate::params::BalanceParams;
use crate::view::{Dir, NodeId, TreeView, WeightedView};

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub(crate) struct Node<K> {
    pub(crate) key: K,
    pub(crate) child: [u32; 2],
    pub(crate) parent: u32,
    /// Number of nodes in the subtree plus one. Zero marks a free slot.
    pub(crate) weight: u32,
}

/// Which rebalancing scheme [`WbTree::insert`] and [`WbTree::remove`] use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rebalance {
    BottomUp,
    TopDown,
}

impl Rebalance {
    pub fn name(self) -> &'static str {
        match self {
            Rebalance::BottomUp => "bottom-up",
            Rebalance::TopDown => "top-down",
        }
    }
}

/// A weight-balanced binary search tree over a multiset of keys.
///
/// Duplicates descend to the left. Every node stores its weight `|v|`, the
/// number of nodes below and including it plus one, so an empty subtree
/// weighs 1 and a leaf weighs 2.
#[derive(Clone)]
pub struct WbTree<K> {
    pub(crate) nodes: Vec<Node<K>>,
    free: Vec<u32>,
    pub(crate) root: u32,
    len: usize,
    pub(crate) params: BalanceParams,
    scheme: Rebalance,
    pub(crate) sink: MetricsSink,
    /// Adjustment already applied to a rotation pivot's weight for a node
    /// not yet attached (+1) or not yet removed (-1); read by the shadow
    /// check only.
    pub(crate) pending: i8,
}

impl<K: Ord> WbTree<K> {
    pub fn new(params: BalanceParams, scheme: Rebalance) -> Self {
        WbTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            len: 0,
            params,
            scheme,
            sink: MetricsSink::disabled(),
            pending: 0,
        }
    }

    pub fn with_sink(mut self, sink: MetricsSink) -> Self {
        self.sink = sink;
        self
    }

    pub fn params(&self) -> &BalanceParams {
        &self.params
    }

    pub fn scheme(&self) -> Rebalance {
        self.scheme
    }

    pub fn sink(&self) -> &MetricsSink {
        &self.sink
    }

    pub fn sink_mut(&mut self) -> &mut MetricsSink {
        &mut self.sink
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn clear(&mut self) {
        self.nodes.clear();
        self.free.clear();
        self.root = NIL;
        self.len = 0;
    }

    /// Inserts with the tree's configured scheme.
    pub fn insert(&mut self, key: K) -> NodeId {
        match self.scheme {
            Rebalance::BottomUp => self.insert_bottom_up(key),
            Rebalance::TopDown => self.insert_top_down(key),
        }
    }

    /// Removes one occurrence of `key` with the tree's configured scheme.
    pub fn remove(&mut self, key: &K) -> bool {
        match self.scheme {
            Rebalance::BottomUp => self.delete_bottom_up(key),
            Rebalance::TopDown => self.delete_top_down(key),
        }
    }

    /// Plain BST insertion without any rebalancing.
    pub fn insert_unbalanced(&mut self, key: K) -> NodeId {
        if self.root == NIL {
            let n = self.alloc(key, NIL);
            self.root = n;
            return NodeId(n);
        }
        let mut x = self.root;
        loop {
            self.nodes[x as usize].weight += 1;
            let d = self.descent_dir(&key, x);
            let c = self.link(x, d);
            if c == NIL {
                let n = self.alloc(key, x);
                self.set_child(x, d, n);
                return NodeId(n);
            }
            x = c;
        }
    }

    /// First node with `key` on the root-to-leaf search path.
    pub fn find(&self, key: &K) -> Option<NodeId> {
        let x = self.find_raw(key);
        (x != NIL).then_some(NodeId(x))
    }

    pub fn contains(&self, key: &K) -> bool {
        self.find_raw(key) != NIL
    }

    pub fn minimum(&self) -> Option<NodeId> {
        self.root().map(|r| self.min_in_subtree(r))
    }

    pub fn maximum(&self) -> Option<NodeId> {
        self.root().map(|r| self.max_in_subtree(r))
    }

    pub fn min_in_subtree(&self, v: NodeId) -> NodeId {
        NodeId(self.extreme(v.0, Dir::Left))
    }

    pub fn max_in_subtree(&self, v: NodeId) -> NodeId {
        NodeId(self.extreme(v.0, Dir::Right))
    }

    /// Largest node of `L(v)`, the replacement used by two-child deletion.
    pub fn predecessor_in_subtree(&self, v: NodeId) -> Option<NodeId> {
        let l = self.link(v.0, Dir::Left);
        (l != NIL).then(|| NodeId(self.extreme(l, Dir::Right)))
    }

    /// Single rotation around `v`. `Dir::Left` raises the right child.
    ///
    /// Returns the node now occupying `v`'s position.
    pub fn rotate_single(&mut self, v: NodeId, dir: Dir) -> NodeId {
        assert!(
            self.link(v.0, dir.flip()) != NIL,
            "rotation needs a rising child"
        );
        NodeId(self.rotate(v.0, dir))
    }

    /// Double rotation: first around the child on the rising side (in the
    /// opposite direction), then around `v`.
    pub fn rotate_double(&mut self, v: NodeId, dir: Dir) -> NodeId {
        let c = self.link(v.0, dir.flip());
        assert!(
            c != NIL && self.link(c, dir) != NIL,
            "double rotation needs an inner grandchild"
        );
        NodeId(self.rotate_twice(v.0, dir))
    }

    // ---- internal navigation --------------------------------------------

    #[inline]
    pub(crate) fn link(&self, x: u32, d: Dir) -> u32 {
        self.nodes[x as usize].child[d as usize]
    }

    #[inline]
    pub(crate) fn parent_of(&self, x: u32) -> u32 {
        self.nodes[x as usize].parent
    }

    #[inline]
    pub(crate) fn set_child(&mut self, x: u32, d: Dir, c: u32) {
        self.nodes[x as usize].child[d as usize] = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    /// Weight of a possibly empty subtree.
    #[inline]
    pub(crate) fn w(&self, x: u32) -> u64 {
        if x == NIL {
            1
        } else {
            self.nodes[x as usize].weight as u64
        }
    }

    #[inline]
    pub(crate) fn child_weights(&self, x: u32) -> (u64, u64) {
        let c = self.nodes[x as usize].child;
        (self.w(c[0]), self.w(c[1]))
    }

    #[inline]
    pub(crate) fn descent_dir(&self, key: &K, x: u32) -> Dir {
        if *key <= self.nodes[x as usize].key {
            Dir::Left
        } else {
            Dir::Right
        }
    }

    pub(crate) fn find_raw(&self, key: &K) -> u32 {
        let mut x = self.root;
        while x != NIL {
            let n = &self.nodes[x as usize];
            x = match key.cmp(&n.key) {
                std::cmp::Ordering::Equal => return x,
                std::cmp::Ordering::Less => n.child[0],
                std::cmp::Ordering::Greater => n.child[1],
            };
        }
        NIL
    }

    pub(crate) fn extreme(&self, mut x: u32, d: Dir) -> u32 {
        loop {
            let c = self.link(x, d);
            if c == NIL {
                return x;
            }
            x = c;
        }
    }

    /// Points `p`'s link that referenced `old` at `new` (or the root).
    #[inline]
    pub(crate) fn replace_child(&mut self, p: u32, old: u32, new: u32) {
        if p == NIL {
            self.root = new;
        } else {
            let n = &mut self.nodes[p as usize];
            if n.child[0] == old {
                n.child[0] = new;
            } else {
                debug_assert_eq!(n.child[1], old);
                n.child[1] = new;
            }
        }
        if new != NIL {
            self.nodes[new as usize].parent = p;
        }
    }

    pub(crate) fn alloc(&mut self, key: K, parent: u32) -> u32 {
        let node = Node {
            key,
            child: [NIL, NIL],
            parent,
            weight: 2,
        };
        self.len += 1;
        match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                let i = u32::try_from(self.nodes.len())
                    .ok()
                    .filter(|&i| i < NIL)
                    .expect("tree capacity exceeded");
                self.nodes.push(node);
                i
            }
        }
    }

    pub(crate) fn release(&mut self, x: u32) {
        let n = &mut self.nodes[x as usize];
        n.weight = 0;
        n.child = [NIL, NIL];
        n.parent = NIL;
        self.free.push(x);
        self.len -= 1;
    }

    // ---- rotations ------------------------------------------------------

    /// Rotation without metrics. `dir == Left` raises the right child.
    pub(crate) fn rotate_raw(&mut self, v: u32, dir: Dir) -> u32 {
        let up = dir.flip();
        let r = self.link(v, up);
        debug_assert!(r != NIL);
        let inner = self.link(r, dir);
        let p = self.parent_of(v);
        self.set_child(v, up, inner);
        self.set_child(r, dir, v);
        self.replace_child(p, v, r);
        let total = self.nodes[v as usize].weight;
        self.nodes[r as usize].weight = total;
        let other = self.link(v, dir);
        self.nodes[v as usize].weight = (self.w(other) + self.w(inner)) as u32;
        r
    }

    pub(crate) fn rotate(&mut self, v: u32, dir: Dir) -> u32 {
        self.sink.rotation(self.nodes[v as usize].weight as u64);
        self.shadow_check(v);
        self.rotate_raw(v, dir)
    }

    pub(crate) fn rotate_twice(&mut self, v: u32, dir: Dir) -> u32 {
        let c = self.link(v, dir.flip());
        let (wc, wv) = (
            self.nodes[c as usize].weight as u64,
            self.nodes[v as usize].weight as u64,
        );
        self.sink.double_rotation(wc, wv);
        self.shadow_check(v);
        if self.sink.shadow_enabled() {
            assert_eq!(
                self.count_subtree(c) + 1,
                wc,
                "stored inner pivot weight disagrees with its subtree"
            );
        }
        self.rotate_raw(c, dir.flip());
        self.rotate_raw(v, dir)
    }

    /// Recounts the pivot's subtree when the sink asks for it.
    fn shadow_check(&self, v: u32) {
        if self.sink.shadow_enabled() {
            let counted = (self.count_subtree(v) + 1) as i64 + self.pending as i64;
            assert_eq!(
                counted, self.nodes[v as usize].weight as i64,
                "stored pivot weight disagrees with its subtree"
            );
        }
    }

    fn count_subtree(&self, v: u32) -> u64 {
        let mut stack = vec![v];
        let mut count = 0;
        while let Some(x) = stack.pop() {
            if x == NIL {
                continue;
            }
            count += 1;
            stack.extend(self.nodes[x as usize].child);
        }
        count
    }

    /// Single or double rotation at `v` to relieve a heavy `heavy` side.
    /// `double_at_tie` selects the inclusive Γ-test.
    pub(crate) fn rotate_toward_balance(&mut self, v: u32, heavy: Dir, double_at_tie: bool) -> u32 {
        let h = self.link(v, heavy);
        let inner = self.w(self.link(h, heavy.flip()));
        let outer = self.w(self.link(h, heavy));
        // With Γ = 1 an empty inner side ties with an empty outer side.
        let double = if double_at_tie {
            inner > 1 && self.params.needs_double_rotation_at_tie(inner, outer)
        } else {
            self.params.needs_double_rotation(inner, outer)
        };
        if double {
            self.rotate_twice(v, heavy.flip())
        } else {
            self.rotate(v, heavy.flip())
        }
    }

    // ---- node relinking -------------------------------------------------

    /// Exchanges the tree positions of `t` and its in-order predecessor `p`
    /// (the maximum of `L(t)`). Weights stay with the positions.
    pub(crate) fn swap_with_predecessor(&mut self, t: u32, p: u32) {
        debug_assert_eq!(self.link(p, Dir::Right), NIL);
        let tp = self.parent_of(t);
        let [tl, tr] = self.nodes[t as usize].child;
        let pl = self.link(p, Dir::Left);
        let tw = self.nodes[t as usize].weight;
        let pw = self.nodes[p as usize].weight;

        if tl == p {
            self.set_child(p, Dir::Left, t);
        } else {
            let pp = self.parent_of(p);
            self.set_child(p, Dir::Left, tl);
            self.set_child(pp, Dir::Right, t);
        }
        self.set_child(p, Dir::Right, tr);
        self.replace_child(tp, t, p);
        self.set_child(t, Dir::Left, pl);
        self.set_child(t, Dir::Right, NIL);
        self.nodes[p as usize].weight = tw;
        self.nodes[t as usize].weight = pw;
    }

    /// Unlinks a node with at most one child; returns its former parent.
    pub(crate) fn splice_out(&mut self, x: u32) -> u32 {
        let [l, r] = self.nodes[x as usize].child;
        debug_assert!(l == NIL || r == NIL);
        let c = if l != NIL { l } else { r };
        let p = self.parent_of(x);
        self.replace_child(p, x, c);
        self.release(x);
        p
    }

    // ---- validation -----------------------------------------------------

    /// Same count as [`count_violations`](crate::metrics::count_violations)
    /// under the tree's own parameters, by a linear scan of the node arena
    /// instead of a traversal.
    pub fn violation_count(&self) -> usize {
        // Slot 0 stands for an empty subtree; node `i` sits at `i + 1`, so
        // `NIL + 1` wraps to 0.
        let mut ws = Vec::with_capacity(self.nodes.len() + 1);
        ws.push(1u32);
        ws.extend(self.nodes.iter().map(|n| n.weight));
        let at = |c: u32| ws[c.wrapping_add(1) as usize];
        let balanced = self.params.balance_test();
        self.nodes
            .iter()
            .filter(|n| n.weight != 0 && !balanced(at(n.child[0]), at(n.child[1])))
            .count()
    }

    /// Checks weak BST order, the weight identity, parent-link symmetry and
    /// size consistency using the stored weights.
    pub fn validate(&self) -> ValidationReport<K>
    where
        K: Clone,
    {
        let mut report = ValidationReport::default();
        if self.root != NIL && self.parent_of(self.root) != NIL {
            report.push(
                ViolationKind::ParentLink,
                &self.nodes[self.root as usize].key,
                "root has a parent".into(),
            );
        }
        // (node, lower bound, upper bound): lower <= key <= upper
        let mut stack: Vec<(u32, Option<u32>, Option<u32>)> = Vec::new();
        if self.root != NIL {
            stack.push((self.root, None, None));
        }
        let mut visited = 0usize;
        while let Some((x, lo, hi)) = stack.pop() {
            visited += 1;
            if visited > self.nodes.len() {
                report.push(
                    ViolationKind::Cycle,
                    &self.nodes[x as usize].key,
                    "node reachable twice".into(),
                );
                break;
            }
            let n = &self.nodes[x as usize];
            let out_of_order = lo.is_some_and(|b| n.key < self.nodes[b as usize].key)
                || hi.is_some_and(|b| n.key > self.nodes[b as usize].key);
            if out_of_order {
                report.push(
                    ViolationKind::Order,
                    &n.key,
                    "key outside the range of its ancestors".into(),
                );
            }
            let (wl, wr) = self.child_weights(x);
            if n.weight as u64 != wl + wr {
                report.push(
                    ViolationKind::WeightMismatch,
                    &n.key,
                    format!("stored {} but children sum to {wl}+{wr}", n.weight),
                );
            }
            for d in [Dir::Left, Dir::Right] {
                let c = n.child[d as usize];
                if c == NIL {
                    continue;
                }
                if self.parent_of(c) != x {
                    report.push(
                        ViolationKind::ParentLink,
                        &self.nodes[c as usize].key,
                        "parent link does not mirror child link".into(),
                    );
                }
                let (clo, chi) = match d {
                    Dir::Left => (lo, Some(x)),
                    Dir::Right => (Some(x), hi),
                };
                stack.push((c, clo, chi));
            }
        }
        let root_size = if self.root == NIL {
            0
        } else {
            self.w(self.root) - 1
        };
        if visited != self.len || root_size != self.len as u64 {
            report.violations.push(Violation {
                kind: ViolationKind::SizeMismatch,
                key: None,
                details: format!(
                    "len {} but {visited} reachable nodes and root weight implies {root_size}",
                    self.len
                ),
            });
        }
        report
    }

    /// Overwrites a stored weight. Only useful for exercising the validators.
    #[doc(hidden)]
    pub fn corrupt_weight(&mut self, v: NodeId, weight: u32) {
        self.nodes[v.0 as usize].weight = weight;
    }
}

impl<K> TreeView for WbTree<K> {
    type Key = K;

    fn root(&self) -> Option<NodeId> {
        (self.root != NIL).then_some(NodeId(self.root))
    }

    fn child(&self, v: NodeId, d: Dir) -> Option<NodeId> {
        let c = self.nodes[v.0 as usize].child[d as usize];
        (c != NIL).then_some(NodeId(c))
    }

    fn parent(&self, v: NodeId) -> Option<NodeId> {
        let p = self.nodes[v.0 as usize].parent;
        (p != NIL).then_some(NodeId(p))
    }

    fn key(&self, v: NodeId) -> &K {
        &self.nodes[v.0 as usize].key
    }

    fn len(&self) -> usize {
        self.len
    }
}

impl<K> WeightedView for WbTree<K> {
    fn weight(&self, v: Option<NodeId>) -> u64 {
        v.map_or(1, |v| self.nodes[v.0 as usize].weight as u64)
    }
}

impl<K: fmt::Debug> fmt::Debug for WbTree<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WbTree")
            .field("len", &self.len)
            .field("params", &self.params)
            .field("scheme", &self.scheme)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Order,
    WeightMismatch,
    ParentLink,
    SizeMismatch,
    Cycle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation<K> {
    pub kind: ViolationKind,
    pub key: Option<K>,
    pub details: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport<K> {
    pub violations: Vec<Violation<K>>,
}

impl<K> Default for ValidationReport<K> {
    fn default() -> Self {
        ValidationReport {
            violations: Vec::new(),
        }
    }
}

impl<K: Clone> ValidationReport<K> {
    fn push(&mut self, kind: ViolationKind, key: &K, details: String) {
        self.violations.push(Violation {
            kind,
            key: Some(key.clone()),
            details,
        });
    }
}

impl<K> ValidationReport<K> {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, kind: ViolationKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Canonical;
    use crate::view::dump;

    fn plain(keys: &[i64]) -> WbTree<i64> {
        let mut t = WbTree::new(Canonical::Integral.params(), Rebalance::BottomUp);
        for &k in keys {
            t.insert_unbalanced(k);
        }
        t
    }

    #[test]
    fn left_rotation_of_right_path() {
        let mut t = plain(&[1, 2, 3]);
        let v = t.find(&1).unwrap();
        let r = t.rotate_single(v, Dir::Left);
        assert_eq!(*t.key(r), 2);
        assert_eq!(t.root(), Some(r));
        assert_eq!(t.weight(Some(r)), 4);
        assert_eq!(t.weight(Some(v)), 2);
        assert!(t.validate().is_clean());
    }

    #[test]
    fn rotations_are_inverse() {
        let mut t = plain(&[4, 2, 6, 1, 3, 5, 7]);
        let before = dump(&t);
        let root = t.root().unwrap();
        let r = t.rotate_single(root, Dir::Right);
        assert_ne!(dump(&t), before);
        t.rotate_single(r, Dir::Left);
        assert_eq!(dump(&t), before);
    }

    #[test]
    fn double_rotation_raises_inner_grandchild() {
        // v=1, r=5, rl=3 with children 2 and 4; rr=6
        let mut t = plain(&[1, 5, 3, 6, 2, 4]);
        let root = t.root().unwrap();
        let total = t.weight(Some(root));
        let top = t.rotate_double(root, Dir::Left);
        assert_eq!(*t.key(top), 3);
        assert_eq!(t.weight(Some(top)), total);
        let l = t.child(top, Dir::Left).unwrap();
        let r = t.child(top, Dir::Right).unwrap();
        assert_eq!((*t.key(l), *t.key(r)), (1, 5));
        // rll = 2 ends under v, rlr = 4 under r
        assert_eq!(*t.key(t.child(l, Dir::Right).unwrap()), 2);
        assert_eq!(*t.key(t.child(r, Dir::Left).unwrap()), 4);
        assert!(t.validate().is_clean());
    }

    #[test]
    fn double_rotation_with_leaf_inner_child() {
        let mut t = plain(&[1, 3, 2]);
        let top = t.rotate_double(t.root().unwrap(), Dir::Left);
        assert_eq!(*t.key(top), 2);
        let l = t.child(top, Dir::Left).unwrap();
        let r = t.child(top, Dir::Right).unwrap();
        assert_eq!(t.child(l, Dir::Right), None);
        assert_eq!(t.child(r, Dir::Left), None);
        assert_eq!(dump(&t), "1:2 2:4 3:2\n(2 (1 . .) (3 . .))");
    }

    #[test]
    #[should_panic]
    fn rotation_without_rising_child_panics() {
        let mut t = plain(&[1, 0]);
        let root = t.root().unwrap();
        t.rotate_single(root, Dir::Left);
    }

    #[test]
    fn validate_examples() {
        let t = plain(&[]);
        assert!(t.validate().is_clean());

        // node 2 has children weights 1 + 2 but claims 5
        let mut t = plain(&[2, 3]);
        let root = t.root().unwrap();
        t.corrupt_weight(root, 5);
        let report = t.validate();
        assert_eq!(report.count(ViolationKind::WeightMismatch), 1);
        assert_eq!(report.violations[0].key, Some(2));
    }

    #[test]
    fn search_and_extremes() {
        let t = plain(&[]);
        assert_eq!(t.find(&5), None);
        assert_eq!(t.minimum(), None);

        let t = plain(&[5, 5, 3, 8, 7]);
        assert_eq!(*t.key(t.find(&5).unwrap()), 5);
        assert_eq!(*t.key(t.minimum().unwrap()), 3);
        assert_eq!(*t.key(t.maximum().unwrap()), 8);
        let root = t.root().unwrap();
        assert_eq!(*t.key(t.predecessor_in_subtree(root).unwrap()), 5);
        assert_eq!(t.find(&4), None);
    }

    #[test]
    fn swap_with_direct_and_deep_predecessor() {
        for keys in [&[5, 3, 8][..], &[8, 3, 9, 1, 5, 4, 6]] {
            let mut t = plain(keys);
            let root = t.root;
            let p = t.extreme(t.link(root, Dir::Left), Dir::Right);
            let mut expected = t.inorder();
            let i = expected.iter().position(|&k| k == keys[0]).unwrap();
            expected.swap(i - 1, i);
            t.swap_with_predecessor(root, p);
            assert_eq!(t.root, p);
            assert_eq!(t.inorder(), expected);
            // order is now broken exactly at the swapped pair, links stay intact
            let report = t.validate();
            assert_eq!(report.count(ViolationKind::ParentLink), 0);
            assert_eq!(report.count(ViolationKind::WeightMismatch), 0);
        }
    }
}
