//! Classic rebalancing: an unbalanced BST modification followed by a walk
//! back up the modified path that repairs every ancestor.
//!
//! A tie in the Γ-test (`inner = outer·Γ`) takes the double rotation.

use crate::params::Overhang;
use crate::tree::{WbTree, NIL};
use crate::view::{Dir, NodeId};

impl<K: Ord> WbTree<K> {
    pub fn insert_bottom_up(&mut self, key: K) -> NodeId {
        if self.root == NIL {
            let n = self.alloc(key, NIL);
            self.root = n;
            return NodeId(n);
        }
        let mut x = self.root;
        let (parent, side) = loop {
            self.sink.touch();
            self.nodes[x as usize].weight += 1;
            let d = self.descent_dir(&key, x);
            let c = self.link(x, d);
            if c == NIL {
                break (x, d);
            }
            x = c;
        };
        let n = self.alloc(key, parent);
        self.set_child(parent, side, n);
        self.rebalance_upward(parent, false);
        NodeId(n)
    }

    pub fn delete_bottom_up(&mut self, key: &K) -> bool {
        let mut t = self.root;
        while t != NIL {
            self.sink.touch();
            let n = &self.nodes[t as usize];
            t = match key.cmp(&n.key) {
                std::cmp::Ordering::Equal => break,
                std::cmp::Ordering::Less => n.child[0],
                std::cmp::Ordering::Greater => n.child[1],
            };
        }
        if t == NIL {
            return false;
        }
        let [l, r] = self.nodes[t as usize].child;
        if l != NIL && r != NIL {
            let mut p = l;
            loop {
                self.sink.touch();
                let c = self.link(p, Dir::Right);
                if c == NIL {
                    break;
                }
                p = c;
            }
            self.swap_with_predecessor(t, p);
        }
        let parent = self.splice_out(t);
        self.rebalance_upward(parent, true);
        true
    }

    /// Walks from `x` to the root, fixing weights on deletion and repairing
    /// any overhang at each ancestor.
    fn rebalance_upward(&mut self, mut x: u32, shrink: bool) {
        while x != NIL {
            self.sink.touch();
            if shrink {
                self.nodes[x as usize].weight -= 1;
            }
            let top = self.rebalance_at(x);
            x = self.parent_of(top);
        }
    }

    /// Returns the node occupying `v`'s position afterwards.
    pub(crate) fn rebalance_at(&mut self, v: u32) -> u32 {
        let (l, r) = self.child_weights(v);
        match self.params.overhang_side(l, r) {
            Overhang::None => v,
            Overhang::Right => self.rotate_toward_balance(v, Dir::Right, true),
            Overhang::Left => self.rotate_toward_balance(v, Dir::Left, true),
        }
    }
}
