use std::cmp::Ordering;

use super::costs::CostVector;
use super::LinePoint;
use crate::cost::CostAlgebra;

#[derive(Debug, Clone)]
pub(crate) struct Children {
    pub left: Box<Node>,
    pub right: Box<Node>,
    /// Distance between `left.rightmost` and `right.leftmost`.
    pub gap: f64,
}

/// A node of the leaf-oriented tree. Points live at leaves; internal nodes
/// have exactly two children and aggregate their subtree.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub leftmost: LinePoint,
    pub rightmost: LinePoint,
    pub costs: CostVector,
    pub height: u32,
    pub leaf_count: usize,
    pub children: Option<Children>,
}

/// Shared state threaded through structural updates.
pub(crate) struct Ctx {
    pub algebra: CostAlgebra,
    pub touched: u64,
}

impl Node {
    pub fn leaf(p: LinePoint) -> Box<Node> {
        Box::new(Node {
            leftmost: p,
            rightmost: p,
            costs: CostVector::LEAF,
            height: 0,
            leaf_count: 1,
            children: None,
        })
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Install `left` and `right` under `shell` and recompute its attributes.
pub(crate) fn join(mut shell: Box<Node>, left: Box<Node>, right: Box<Node>, ctx: &mut Ctx) -> Box<Node> {
    ctx.touched += 1;
    let gap = (left.rightmost.x - right.leftmost.x).abs();
    shell.leftmost = left.leftmost;
    shell.rightmost = right.rightmost;
    shell.costs = CostVector::combine(ctx.algebra, &left.costs, &right.costs, gap);
    shell.height = 1 + left.height.max(right.height);
    shell.leaf_count = left.leaf_count + right.leaf_count;
    shell.children = Some(Children { left, right, gap });
    shell
}

fn split(mut node: Box<Node>) -> (Box<Node>, Box<Node>, Box<Node>) {
    let c = node.children.take().expect("split called on a leaf");
    (node, c.left, c.right)
}

/// Join with AVL rebalancing; children heights may differ by at most two.
pub(crate) fn balance(shell: Box<Node>, left: Box<Node>, right: Box<Node>, ctx: &mut Ctx) -> Box<Node> {
    let (hl, hr) = (left.height, right.height);
    if hl > hr + 1 {
        let (ls, ll, lr) = split(left);
        if ll.height >= lr.height {
            let r = join(shell, lr, right, ctx);
            join(ls, ll, r, ctx)
        } else {
            let (lrs, lrl, lrr) = split(lr);
            let l = join(ls, ll, lrl, ctx);
            let r = join(shell, lrr, right, ctx);
            join(lrs, l, r, ctx)
        }
    } else if hr > hl + 1 {
        let (rs, rl, rr) = split(right);
        if rr.height >= rl.height {
            let l = join(shell, left, rl, ctx);
            join(rs, l, rr, ctx)
        } else {
            let (rls, rll, rlr) = split(rl);
            let l = join(shell, left, rll, ctx);
            let r = join(rs, rlr, rr, ctx);
            join(rls, l, r, ctx)
        }
    } else {
        join(shell, left, right, ctx)
    }
}

pub(crate) fn insert(node: Box<Node>, p: LinePoint, ctx: &mut Ctx) -> Box<Node> {
    if node.is_leaf() {
        let shell = Node::leaf(p);
        let new = Node::leaf(p);
        return if p.key_cmp(&node.leftmost) == Ordering::Less {
            join(shell, new, node, ctx)
        } else {
            join(shell, node, new, ctx)
        };
    }
    let (shell, left, right) = split(node);
    if p.key_cmp(&right.leftmost) == Ordering::Less {
        let left = insert(left, p, ctx);
        balance(shell, left, right, ctx)
    } else {
        let right = insert(right, p, ctx);
        balance(shell, left, right, ctx)
    }
}

/// Remove the leaf holding `p`; returns `None` when `node` was that leaf.
/// The caller guarantees `p` is present.
pub(crate) fn remove(node: Box<Node>, p: &LinePoint, ctx: &mut Ctx) -> Option<Box<Node>> {
    if node.is_leaf() {
        debug_assert_eq!(node.leftmost.id, p.id);
        return None;
    }
    let (shell, left, right) = split(node);
    if p.key_cmp(&right.leftmost) == Ordering::Less {
        match remove(left, p, ctx) {
            None => Some(right),
            Some(left) => Some(balance(shell, left, right, ctx)),
        }
    } else {
        match remove(right, p, ctx) {
            None => Some(left),
            Some(right) => Some(balance(shell, left, right, ctx)),
        }
    }
}

/// Perfectly balanced tree over points already sorted by key.
pub(crate) fn build_sorted(points: &[LinePoint], ctx: &mut Ctx) -> Box<Node> {
    if points.len() == 1 {
        return Node::leaf(points[0]);
    }
    let mid = points.len() / 2;
    let left = build_sorted(&points[..mid], ctx);
    let right = build_sorted(&points[mid..], ctx);
    join(Node::leaf(points[0]), left, right, ctx)
}
