//! Top-down rebalancing: every node on the descent is repaired as if the
//! pending insertion (or deletion) had already happened below it, so no
//! second pass is needed.
//!
//! Insertion follows the textbook single-pass scheme: increment `|v|`, test
//! `|L(v)| + 1 > |R(v)|·Δ` (for a key heading left), pick a single or double
//! rotation with the `+1` applied to whichever grandchild receives the key,
//! then continue the descent from whatever node now sits at `v`'s position.
//!
//! Deletion is the mirror image. Removing a node from side `s` of `v` can
//! only make the opposite side too heavy, so the test is
//! `|other| > (|s| - 1)·Δ`; the grandchildren of the heavy side are not on
//! the deletion path, so the single/double choice uses their weights as is.
//! A key that turns out to be absent is handled with a second, upward pass
//! that recomputes the weights decremented on the way down.

use std::cmp::Ordering;

use crate::tree::{WbTree, NIL};
use crate::view::{Dir, NodeId};

enum Repair {
    Kept,
    Rotated(u32),
    /// The double rotation's inner grandchild is the node being inserted:
    /// attach it under `heavy` first, then rotate at `pivot`.
    AttachThenDouble {
        pivot: u32,
        heavy: u32,
        side: Dir,
    },
}

impl<K: Ord> WbTree<K> {
    pub fn insert_top_down(&mut self, key: K) -> NodeId {
        if self.root == NIL {
            let n = self.alloc(key, NIL);
            self.root = n;
            return NodeId(n);
        }
        let mut x = self.root;
        self.pending = 1;
        loop {
            self.sink.touch();
            self.nodes[x as usize].weight += 1;
            match self.insertion_repair(&key, x) {
                Repair::Kept => {}
                Repair::Rotated(u) => {
                    self.sink.touch();
                    x = u;
                }
                Repair::AttachThenDouble { pivot, heavy, side } => {
                    let n = self.alloc(key, heavy);
                    self.set_child(heavy, side.flip(), n);
                    self.nodes[heavy as usize].weight += 1;
                    self.pending = 0;
                    self.rotate_twice(pivot, side.flip());
                    return NodeId(n);
                }
            }
            let d = self.descent_dir(&key, x);
            let c = self.link(x, d);
            if c == NIL {
                let n = self.alloc(key, x);
                self.set_child(x, d, n);
                self.pending = 0;
                return NodeId(n);
            }
            x = c;
        }
    }

    /// Repairs `v` in anticipation of `key` being inserted below it and
    /// returns the node now at `v`'s position. `|v|` is expected to already
    /// include the pending node.
    ///
    /// If the rotation would have to raise the pending node itself, nothing
    /// is rotated here; [`WbTree::insert_top_down`] handles that case once
    /// the node exists.
    pub fn repair_during_insertion(&mut self, key: &K, v: NodeId) -> NodeId {
        match self.insertion_repair(key, v.0) {
            Repair::Rotated(u) => NodeId(u),
            Repair::Kept | Repair::AttachThenDouble { .. } => v,
        }
    }

    fn insertion_repair(&mut self, key: &K, v: u32) -> Repair {
        let d = self.descent_dir(key, v);
        let heavy = self.link(v, d);
        let grown = self.w(heavy) + 1;
        let other = self.w(self.link(v, d.flip()));
        // With Δ < 2 a missing child can already tip the balance; there is
        // nothing to rotate yet.
        if heavy == NIL || !self.params.exceeds_delta(grown, other) {
            return Repair::Kept;
        }
        let inner_node = self.link(heavy, d.flip());
        let inner = self.w(inner_node);
        let outer = self.w(self.link(heavy, d));
        let (inner, outer) = match self.descent_dir(key, heavy) == d {
            true => (inner, outer + 1),
            false => (inner + 1, outer),
        };
        if self.params.needs_double_rotation(inner, outer) {
            if inner_node == NIL {
                return Repair::AttachThenDouble {
                    pivot: v,
                    heavy,
                    side: d,
                };
            }
            Repair::Rotated(self.rotate_twice(v, d.flip()))
        } else {
            Repair::Rotated(self.rotate(v, d.flip()))
        }
    }

    /// Repairs `v` in anticipation of one node leaving its `side` subtree.
    /// `|v|` is expected to already exclude that node.
    pub fn repair_during_deletion(&mut self, v: NodeId, side: Dir) -> NodeId {
        NodeId(self.deletion_repair(v.0, side))
    }

    fn deletion_repair(&mut self, v: u32, side: Dir) -> u32 {
        let shrunk = self.w(self.link(v, side));
        debug_assert!(shrunk >= 2, "deleting from an empty subtree");
        let other = self.w(self.link(v, side.flip()));
        if self.params.exceeds_delta(other, shrunk - 1) {
            self.rotate_toward_balance(v, side.flip(), false)
        } else {
            v
        }
    }

    pub fn delete_top_down(&mut self, key: &K) -> bool {
        let mut x = self.root;
        if x == NIL {
            return false;
        }
        // `settled`: x's weight is already decremented (it took over the
        // position of a node repaired above).
        let mut settled = false;
        self.pending = -1;
        loop {
            self.sink.touch();
            let d = match key.cmp(&self.nodes[x as usize].key) {
                Ordering::Equal => {
                    self.remove_located(x, settled);
                    self.pending = 0;
                    return true;
                }
                Ordering::Less => Dir::Left,
                Ordering::Greater => Dir::Right,
            };
            if self.link(x, d) == NIL {
                self.restore_weights(if settled { x } else { self.parent_of(x) });
                self.pending = 0;
                return false;
            }
            if !settled {
                self.nodes[x as usize].weight -= 1;
                let u = self.deletion_repair(x, d);
                if u != x {
                    x = u;
                    settled = true;
                    continue;
                }
            }
            x = self.link(x, d);
            settled = false;
        }
    }

    /// Continues the descent below the node holding the key and unlinks it.
    ///
    /// With two children the descent carries on through `L(t)`'s right
    /// spine, repairing as it goes; the spine's last node (the in-order
    /// predecessor) then takes over `t`'s position.
    fn remove_located(&mut self, t: u32, settled: bool) {
        if self.link(t, Dir::Left) == NIL || self.link(t, Dir::Right) == NIL {
            self.splice_out(t);
            return;
        }
        // Rotations at or above t only ever raise nodes from the right, so
        // t keeps its left subtree and stays on the path.
        let mut y = t;
        let mut settled = settled;
        let mut on_spine = false;
        loop {
            self.sink.touch();
            let side = if on_spine { Dir::Right } else { Dir::Left };
            if on_spine && self.link(y, Dir::Right) == NIL {
                self.swap_with_predecessor(t, y);
                self.splice_out(t);
                return;
            }
            if !settled {
                self.nodes[y as usize].weight -= 1;
                let u = self.deletion_repair(y, side);
                if u != y {
                    y = u;
                    settled = true;
                    continue;
                }
            }
            if y == t {
                on_spine = true;
            }
            y = self.link(y, side);
            settled = false;
        }
    }

    /// Second pass for a deletion that found nothing: recompute weights from
    /// `x` up to the root.
    fn restore_weights(&mut self, mut x: u32) {
        while x != NIL {
            self.sink.touch();
            let (l, r) = self.child_weights(x);
            self.nodes[x as usize].weight = (l + r) as u32;
            x = self.parent_of(x);
        }
    }
}
