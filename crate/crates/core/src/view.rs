//! Read-only access to binary tree shape, shared by the weight-balanced and
//! red-black trees so that metrics, audits and dumps are written once.

use std::fmt::{Display, Write};

/// Handle to a node inside one tree's arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Side of a node; also the direction of a rotation (`Left` lowers the
/// pivot to the left and raises its right child).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Left = 0,
    Right = 1,
}

impl Dir {
    #[inline]
    pub fn flip(self) -> Dir {
        match self {
            Dir::Left => Dir::Right,
            Dir::Right => Dir::Left,
        }
    }
}

pub trait TreeView {
    type Key;

    fn root(&self) -> Option<NodeId>;
    fn child(&self, v: NodeId, d: Dir) -> Option<NodeId>;
    fn parent(&self, v: NodeId) -> Option<NodeId>;
    fn key(&self, v: NodeId) -> &Self::Key;
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Nodes in key order.
    fn inorder_nodes(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.len());
        let mut stack = Vec::new();
        let mut cur = self.root();
        loop {
            while let Some(v) = cur {
                stack.push(v);
                cur = self.child(v, Dir::Left);
            }
            let Some(v) = stack.pop() else { break };
            out.push(v);
            cur = self.child(v, Dir::Right);
        }
        out
    }

    fn inorder(&self) -> Vec<Self::Key>
    where
        Self::Key: Clone,
    {
        self.inorder_nodes()
            .into_iter()
            .map(|v| self.key(v).clone())
            .collect()
    }

    /// Calls `f(node, depth)` for every node, root depth 0.
    fn for_each_depth(&self, mut f: impl FnMut(NodeId, usize)) {
        let mut stack: Vec<(NodeId, usize)> = self.root().map(|r| (r, 0)).into_iter().collect();
        while let Some((v, d)) = stack.pop() {
            f(v, d);
            for side in [Dir::Right, Dir::Left] {
                if let Some(c) = self.child(v, side) {
                    stack.push((c, d + 1));
                }
            }
        }
    }

    fn height(&self) -> usize {
        let mut h = 0;
        self.for_each_depth(|_, d| h = h.max(d + 1));
        h
    }

    fn depth_of(&self, mut v: NodeId) -> usize {
        let mut d = 0;
        while let Some(p) = self.parent(v) {
            v = p;
            d += 1;
        }
        d
    }
}

/// Trees that store subtree weights.
pub trait WeightedView: TreeView {
    /// Stored weight of a subtree, 1 for the empty subtree.
    fn weight(&self, v: Option<NodeId>) -> u64;
}

/// Shape dump used by golden and determinism tests.
///
/// First line: in-order `key:weight` pairs. Second line: the structure as
/// `(key L R)` with `.` for an empty subtree.
pub fn dump<T>(tree: &T) -> String
where
    T: WeightedView,
    T::Key: Display,
{
    let pairs: Vec<String> = tree
        .inorder_nodes()
        .into_iter()
        .map(|v| format!("{}:{}", tree.key(v), tree.weight(Some(v))))
        .collect();
    let mut out = pairs.join(" ");
    out.push('\n');
    out.push_str(&structure(tree));
    out
}

/// Parenthesised structure string alone; for trees without weights.
pub fn structure<T>(tree: &T) -> String
where
    T: TreeView,
    T::Key: Display,
{
    enum Item {
        Node(NodeId),
        Text(&'static str),
    }
    let mut out = String::new();
    let mut stack = vec![match tree.root() {
        Some(r) => Item::Node(r),
        None => Item::Text("."),
    }];
    while let Some(item) = stack.pop() {
        match item {
            Item::Text(s) => out.push_str(s),
            Item::Node(v) => {
                let _ = write!(out, "({} ", tree.key(v));
                stack.push(Item::Text(")"));
                stack.push(
                    tree.child(v, Dir::Right)
                        .map_or(Item::Text("."), Item::Node),
                );
                stack.push(Item::Text(" "));
                stack.push(tree.child(v, Dir::Left).map_or(Item::Text("."), Item::Node));
            }
        }
    }
    out
}
