//! Bottom-up red-black tree (CLRS insertion and deletion fixups) with the
//! same multiset semantics and arena layout as [`WbTree`](crate::WbTree).

use std::cmp::Ordering;

use crate::metrics::MetricsSink;
use crate::view::{Dir, NodeId, TreeView};

const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Color {
    Red,
    Black,
}

#[derive(Clone, Debug)]
struct RbNode<K> {
    key: K,
    child: [u32; 2],
    parent: u32,
    color: Color,
}

#[derive(Clone)]
pub struct RbTree<K> {
    nodes: Vec<RbNode<K>>,
    free: Vec<u32>,
    root: u32,
    len: usize,
    sink: MetricsSink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RbViolationKind {
    RootRed,
    RedRed,
    BlackHeight,
    Order,
    ParentLink,
    SizeMismatch,
}

impl<K: Ord> Default for RbTree<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord> RbTree<K> {
    pub fn new() -> Self {
        RbTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            len: 0,
            sink: MetricsSink::disabled(),
        }
    }

    pub fn with_sink(mut self, sink: MetricsSink) -> Self {
        self.sink = sink;
        self
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

    pub fn color(&self, v: NodeId) -> Color {
        self.nodes[v.0 as usize].color
    }

    pub fn find(&self, key: &K) -> Option<NodeId> {
        let x = self.find_raw(key);
        (x != NIL).then_some(NodeId(x))
    }

    #[inline]
    fn ch(&self, x: u32, d: Dir) -> u32 {
        self.nodes[x as usize].child[d as usize]
    }

    #[inline]
    fn par(&self, x: u32) -> u32 {
        self.nodes[x as usize].parent
    }

    #[inline]
    fn is_red(&self, x: u32) -> bool {
        x != NIL && self.nodes[x as usize].color == Color::Red
    }

    #[inline]
    fn paint(&mut self, x: u32, c: Color) {
        if x != NIL {
            self.nodes[x as usize].color = c;
        }
    }

    #[inline]
    fn set_child(&mut self, x: u32, d: Dir, c: u32) {
        self.nodes[x as usize].child[d as usize] = c;
        if c != NIL {
            self.nodes[c as usize].parent = x;
        }
    }

    fn replace_child(&mut self, p: u32, old: u32, new: u32) {
        if p == NIL {
            self.root = new;
        } else if self.ch(p, Dir::Left) == old {
            self.nodes[p as usize].child[0] = new;
        } else {
            self.nodes[p as usize].child[1] = new;
        }
        if new != NIL {
            self.nodes[new as usize].parent = p;
        }
    }

    fn find_raw(&self, key: &K) -> u32 {
        let mut x = self.root;
        while x != NIL {
            let n = &self.nodes[x as usize];
            x = match key.cmp(&n.key) {
                Ordering::Equal => return x,
                Ordering::Less => n.child[0],
                Ordering::Greater => n.child[1],
            };
        }
        NIL
    }

    fn subtree_weight(&self, v: u32) -> u64 {
        let mut stack = vec![v];
        let mut n = 1;
        while let Some(x) = stack.pop() {
            if x != NIL {
                n += 1;
                stack.extend(self.nodes[x as usize].child);
            }
        }
        n
    }

    /// `dir == Left` raises the right child.
    fn rotate(&mut self, v: u32, dir: Dir) {
        if self.sink.is_enabled() {
            // no stored weights here; count the pivot's subtree instead
            let w = self.subtree_weight(v);
            self.sink.rotation(w);
        }
        let up = dir.flip();
        let r = self.ch(v, up);
        let inner = self.ch(r, dir);
        let p = self.par(v);
        self.set_child(v, up, inner);
        self.set_child(r, dir, v);
        self.replace_child(p, v, r);
    }

    pub fn insert(&mut self, key: K) -> NodeId {
        let mut parent = NIL;
        let mut side = Dir::Left;
        let mut x = self.root;
        while x != NIL {
            self.sink.touch();
            parent = x;
            side = if key <= self.nodes[x as usize].key {
                Dir::Left
            } else {
                Dir::Right
            };
            x = self.ch(x, side);
        }
        let node = RbNode {
            key,
            child: [NIL, NIL],
            parent,
            color: Color::Red,
        };
        let z = match self.free.pop() {
            Some(i) => {
                self.nodes[i as usize] = node;
                i
            }
            None => {
                self.nodes.push(node);
                (self.nodes.len() - 1) as u32
            }
        };
        self.len += 1;
        if parent == NIL {
            self.root = z;
        } else {
            self.set_child(parent, side, z);
        }
        self.insert_fixup(z);
        NodeId(z)
    }

    fn insert_fixup(&mut self, mut z: u32) {
        while self.is_red(self.par(z)) {
            let p = self.par(z);
            let g = self.par(p);
            let side = if self.ch(g, Dir::Left) == p {
                Dir::Left
            } else {
                Dir::Right
            };
            let uncle = self.ch(g, side.flip());
            if self.is_red(uncle) {
                self.paint(p, Color::Black);
                self.paint(uncle, Color::Black);
                self.paint(g, Color::Red);
                z = g;
                continue;
            }
            if z == self.ch(p, side.flip()) {
                z = p;
                self.rotate(z, side);
            }
            let p = self.par(z);
            self.paint(p, Color::Black);
            self.paint(g, Color::Red);
            self.rotate(g, side.flip());
        }
        let r = self.root;
        self.paint(r, Color::Black);
    }

    /// Removes one occurrence of `key`.
    pub fn remove(&mut self, key: &K) -> bool {
        let z = {
            let mut x = self.root;
            while x != NIL {
                self.sink.touch();
                let n = &self.nodes[x as usize];
                x = match key.cmp(&n.key) {
                    Ordering::Equal => break,
                    Ordering::Less => n.child[0],
                    Ordering::Greater => n.child[1],
                };
            }
            x
        };
        if z == NIL {
            return false;
        }
        let [zl, zr] = self.nodes[z as usize].child;
        let mut removed_color = self.nodes[z as usize].color;
        let (x, xp);
        if zl == NIL {
            x = zr;
            xp = self.par(z);
            self.replace_child(xp, z, x);
        } else if zr == NIL {
            x = zl;
            xp = self.par(z);
            self.replace_child(xp, z, x);
        } else {
            let mut y = zr;
            while self.ch(y, Dir::Left) != NIL {
                self.sink.touch();
                y = self.ch(y, Dir::Left);
            }
            removed_color = self.nodes[y as usize].color;
            x = self.ch(y, Dir::Right);
            if self.par(y) == z {
                xp = y;
            } else {
                xp = self.par(y);
                self.replace_child(xp, y, x);
                self.set_child(y, Dir::Right, zr);
            }
            let zp = self.par(z);
            self.replace_child(zp, z, y);
            self.set_child(y, Dir::Left, zl);
            self.nodes[y as usize].color = self.nodes[z as usize].color;
        }
        let n = &mut self.nodes[z as usize];
        n.child = [NIL, NIL];
        n.parent = NIL;
        self.free.push(z);
        self.len -= 1;
        if removed_color == Color::Black {
            self.delete_fixup(x, xp);
        }
        true
    }

    fn delete_fixup(&mut self, mut x: u32, mut xp: u32) {
        while x != self.root && !self.is_red(x) {
            let side = if self.ch(xp, Dir::Left) == x {
                Dir::Left
            } else {
                Dir::Right
            };
            let mut w = self.ch(xp, side.flip());
            if self.is_red(w) {
                self.paint(w, Color::Black);
                self.paint(xp, Color::Red);
                self.rotate(xp, side);
                w = self.ch(xp, side.flip());
            }
            if !self.is_red(self.ch(w, Dir::Left)) && !self.is_red(self.ch(w, Dir::Right)) {
                self.paint(w, Color::Red);
                x = xp;
                xp = self.par(x);
            } else {
                if !self.is_red(self.ch(w, side.flip())) {
                    let near = self.ch(w, side);
                    self.paint(near, Color::Black);
                    self.paint(w, Color::Red);
                    self.rotate(w, side.flip());
                    w = self.ch(xp, side.flip());
                }
                let c = self.nodes[xp as usize].color;
                self.paint(w, c);
                self.paint(xp, Color::Black);
                let far = self.ch(w, side.flip());
                self.paint(far, Color::Black);
                self.rotate(xp, side);
                x = self.root;
                break;
            }
        }
        self.paint(x, Color::Black);
    }

    /// Color rules, black heights, weak key order and parent links.
    pub fn audit(&self) -> Vec<(RbViolationKind, String)> {
        let mut out = Vec::new();
        if self.is_red(self.root) {
            out.push((RbViolationKind::RootRed, "root is red".to_string()));
        }
        if self.root != NIL && self.par(self.root) != NIL {
            out.push((RbViolationKind::ParentLink, "root has a parent".to_string()));
        }
        let mut count = 0usize;
        self.audit_node(self.root, None, None, &mut count, &mut out);
        if count != self.len {
            out.push((
                RbViolationKind::SizeMismatch,
                format!("len {} but {count} reachable nodes", self.len),
            ));
        }
        out
    }

    /// Returns the black height of `x` (NIL counts as one black node).
    fn audit_node(
        &self,
        x: u32,
        lo: Option<&K>,
        hi: Option<&K>,
        count: &mut usize,
        out: &mut Vec<(RbViolationKind, String)>,
    ) -> usize {
        if x == NIL {
            return 1;
        }
        *count += 1;
        if *count > self.nodes.len() {
            out.push((RbViolationKind::ParentLink, "cycle".to_string()));
            return 1;
        }
        let n = &self.nodes[x as usize];
        if lo.is_some_and(|b| n.key < *b) || hi.is_some_and(|b| n.key > *b) {
            out.push((RbViolationKind::Order, format!("node {x} out of order")));
        }
        for c in n.child {
            if c != NIL && self.par(c) != x {
                out.push((RbViolationKind::ParentLink, format!("child {c} of {x}")));
            }
            if n.color == Color::Red && self.is_red(c) {
                out.push((
                    RbViolationKind::RedRed,
                    format!("red {x} has red child {c}"),
                ));
            }
        }
        let bl = self.audit_node(n.child[0], lo, Some(&n.key), count, out);
        let br = self.audit_node(n.child[1], Some(&n.key), hi, count, out);
        if bl != br {
            out.push((
                RbViolationKind::BlackHeight,
                format!("node {x}: black heights {bl} and {br}"),
            ));
        }
        bl.max(br) + usize::from(n.color == Color::Black)
    }
}

impl<K> TreeView for RbTree<K> {
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
