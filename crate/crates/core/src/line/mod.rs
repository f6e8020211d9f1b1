//! Exact dynamic matching of points on a line.
//!
//! [`LineMatchTree`] keeps the points at the leaves of a height-balanced,
//! leaf-oriented binary tree. Every node stores the optimal matching cost of
//! its subtree under eight boundary variants (see [`CostVector`]): with or
//! without its leftmost and rightmost points, and with or without one extra
//! skipped point. A parent's variants follow from its children's in constant
//! time because in an optimal matching on a line the only edge that can cross
//! the boundary between two adjacent runs of points is the one joining the
//! left run's rightmost point to the right run's leftmost point. An update
//! therefore only recomputes the leaf-to-root path plus rotated nodes.

mod costs;
mod node;

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::costs::{Choice, CostVector, Variant};
use self::costs::best_choice;
use self::node::{Ctx, Node};
pub use crate::cost::{Cost, CostAlgebra};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinePoint {
    pub id: u64,
    pub x: f64,
}

impl LinePoint {
    pub fn new(id: u64, x: f64) -> Self {
        LinePoint { id, x }
    }

    /// Total order on `(x, id)`.
    pub fn key_cmp(&self, other: &LinePoint) -> Ordering {
        self.x.total_cmp(&other.x).then(self.id.cmp(&other.id))
    }

    pub fn distance(&self, other: &LinePoint) -> f64 {
        (self.x - other.x).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LineError {
    #[error("point id {0} is already present")]
    DuplicateId(u64),
    #[error("point id {0} is not present")]
    UnknownId(u64),
    #[error("point id {0} has a non-finite coordinate")]
    NonFinite(u64),
}

/// A witness matching together with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResult {
    pub value: Cost,
    pub edges: Vec<(LinePoint, LinePoint)>,
    /// The point left out when the count is odd.
    pub skipped: Option<LinePoint>,
}

impl MatchingResult {
    /// Cost recomputed from `edges` alone.
    pub fn edge_cost(&self, algebra: CostAlgebra) -> Cost {
        algebra.combine_all(self.edges.iter().map(|(a, b)| Cost::Finite(a.distance(b))))
    }
}

/// Dynamic optimal matching of points on a line, bottleneck or minimum-weight.
#[derive(Debug, Clone)]
pub struct LineMatchTree {
    algebra: CostAlgebra,
    root: Option<Box<Node>>,
    coords: HashMap<u64, f64>,
    last_touched: u64,
    total_touched: u64,
}

impl LineMatchTree {
    pub fn new(algebra: CostAlgebra) -> Self {
        LineMatchTree {
            algebra,
            root: None,
            coords: HashMap::new(),
            last_touched: 0,
            total_touched: 0,
        }
    }

    /// Bulk construction in linear time after sorting.
    pub fn build(points: &[LinePoint], algebra: CostAlgebra) -> Result<Self, LineError> {
        let mut tree = LineMatchTree::new(algebra);
        for p in points {
            if !p.x.is_finite() {
                return Err(LineError::NonFinite(p.id));
            }
            if tree.coords.insert(p.id, p.x).is_some() {
                return Err(LineError::DuplicateId(p.id));
            }
        }
        if points.is_empty() {
            return Ok(tree);
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(LinePoint::key_cmp);
        let mut ctx = Ctx {
            algebra,
            touched: 0,
        };
        tree.root = Some(node::build_sorted(&sorted, &mut ctx));
        tree.record(ctx.touched);
        Ok(tree)
    }

    pub fn algebra(&self) -> CostAlgebra {
        self.algebra
    }

    pub fn size(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.coords.contains_key(&id)
    }

    pub fn get(&self, id: u64) -> Option<LinePoint> {
        self.coords.get(&id).map(|&x| LinePoint::new(id, x))
    }

    pub fn insert(&mut self, p: LinePoint) -> Result<(), LineError> {
        if !p.x.is_finite() {
            return Err(LineError::NonFinite(p.id));
        }
        if self.coords.contains_key(&p.id) {
            return Err(LineError::DuplicateId(p.id));
        }
        self.coords.insert(p.id, p.x);
        let mut ctx = Ctx {
            algebra: self.algebra,
            touched: 0,
        };
        self.root = Some(match self.root.take() {
            None => Node::leaf(p),
            Some(root) => node::insert(root, p, &mut ctx),
        });
        self.record(ctx.touched);
        Ok(())
    }

    pub fn delete(&mut self, id: u64) -> Result<LinePoint, LineError> {
        let x = self.coords.remove(&id).ok_or(LineError::UnknownId(id))?;
        let p = LinePoint::new(id, x);
        let mut ctx = Ctx {
            algebra: self.algebra,
            touched: 0,
        };
        let root = self.root.take().expect("non-empty tree has a root");
        self.root = node::remove(root, &p, &mut ctx);
        self.record(ctx.touched);
        Ok(p)
    }

    fn record(&mut self, touched: u64) {
        self.last_touched = touched;
        self.total_touched += touched;
    }

    /// Attribute recomputations performed by the most recent mutation.
    pub fn last_touched(&self) -> u64 {
        self.last_touched
    }

    pub fn total_touched(&self) -> u64 {
        self.total_touched
    }

    pub fn root_costs(&self) -> Option<&CostVector> {
        self.root.as_ref().map(|r| &r.costs)
    }

    pub fn height(&self) -> u32 {
        self.root.as_ref().map_or(0, |r| r.height)
    }

    /// Optimal cost over all points (even count) or over all points but one
    /// (odd count); zero for fewer than two points.
    pub fn match_value(&self) -> Cost {
        match &self.root {
            Some(root) if self.size() >= 2 => {
                if self.size() % 2 == 0 {
                    root.costs.all
                } else {
                    root.costs.all_1
                }
            }
            _ => Cost::ZERO,
        }
    }

    /// Replays the minimizing alternative of every recurrence top-down.
    pub fn extract_matching(&self) -> MatchingResult {
        let mut out = MatchingResult {
            value: self.match_value(),
            edges: Vec::with_capacity(self.size() / 2),
            skipped: None,
        };
        if let Some(root) = &self.root {
            let variant = if self.size() % 2 == 0 {
                Variant::ALL
            } else {
                Variant::ALL_1
            };
            self.descend(root, variant, &mut out);
        }
        out
    }

    fn descend(&self, node: &Node, variant: Variant, out: &mut MatchingResult) {
        let Some(c) = &node.children else {
            if variant.skip_one {
                debug_assert!(!variant.drop_left && !variant.drop_right);
                out.skipped = Some(node.leftmost);
            }
            return;
        };
        let (choice, _) = best_choice(self.algebra, variant, &c.left.costs, &c.right.costs, c.gap);
        if choice.cross {
            out.edges.push((c.left.rightmost, c.right.leftmost));
        }
        self.descend(&c.left, choice.left, out);
        self.descend(&c.right, choice.right, out);
    }

    /// Points in key order.
    pub fn points(&self) -> Vec<LinePoint> {
        let mut out = Vec::with_capacity(self.size());
        let mut stack: Vec<&Node> = self.root.iter().map(|b| b.as_ref()).collect();
        while let Some(n) = stack.pop() {
            match &n.children {
                None => out.push(n.leftmost),
                Some(c) => {
                    stack.push(&c.right);
                    stack.push(&c.left);
                }
            }
        }
        out
    }

    /// Full structural audit: key order, balance, boundary points, gaps,
    /// the parity law, and recomputation of every attribute from the leaves.
    pub fn validate(&self) -> Result<(), String> {
        let Some(root) = &self.root else {
            return if self.coords.is_empty() {
                Ok(())
            } else {
                Err("empty tree with registered ids".into())
            };
        };
        let leaves = self.points();
        if leaves.len() != self.coords.len() || root.leaf_count != leaves.len() {
            return Err(format!(
                "leaf count {} / {} does not match {} registered ids",
                leaves.len(),
                root.leaf_count,
                self.coords.len()
            ));
        }
        for w in leaves.windows(2) {
            if w[0].key_cmp(&w[1]) != Ordering::Less {
                return Err(format!("leaves {} and {} out of order", w[0].id, w[1].id));
            }
        }
        for p in &leaves {
            if self.coords.get(&p.id) != Some(&p.x) {
                return Err(format!("leaf {} disagrees with the id index", p.id));
            }
        }
        self.audit(root).map(|_| ())
    }

    fn audit(&self, node: &Node) -> Result<CostVector, String> {
        let Some(c) = &node.children else {
            if node.height != 0 || node.leaf_count != 1 || node.costs != CostVector::LEAF {
                return Err(format!("bad leaf {}", node.leftmost.id));
            }
            return Ok(CostVector::LEAF);
        };
        let lc = self.audit(&c.left)?;
        let rc = self.audit(&c.right)?;
        let at = node.leftmost.id;
        if c.left.height.abs_diff(c.right.height) > 1 {
            return Err(format!("node at {at} is unbalanced"));
        }
        if node.height != 1 + c.left.height.max(c.right.height)
            || node.leaf_count != c.left.leaf_count + c.right.leaf_count
        {
            return Err(format!("node at {at} has stale height or leaf count"));
        }
        if node.leftmost != c.left.leftmost || node.rightmost != c.right.rightmost {
            return Err(format!("node at {at} has stale boundary points"));
        }
        if c.gap != c.left.rightmost.distance(&c.right.leftmost) {
            return Err(format!("node at {at} has a stale gap"));
        }
        let expect = CostVector::combine(self.algebra, &lc, &rc, c.gap);
        if expect != node.costs {
            return Err(format!("node at {at} has stale costs"));
        }
        if !node.costs.satisfies_parity_law(node.leaf_count) {
            return Err(format!("node at {at} violates the parity law"));
        }
        Ok(expect)
    }

    /// Shifts every finite root attribute by `delta`. Exists so that harness
    /// tests can check that verification catches a corrupted structure.
    #[doc(hidden)]
    pub fn perturb_root(&mut self, delta: f64) {
        if let Some(root) = &mut self.root {
            for v in Variant::iter() {
                let c = root.costs.get_mut(v);
                if let Cost::Finite(x) = *c {
                    *c = Cost::Finite(x + delta);
                }
            }
        }
    }
}
