use serde::{Deserialize, Serialize};

use crate::cost::{Cost, CostAlgebra};

/// Which boundary points of a subtree are held out of its matching, and
/// whether one further point may be skipped.
///
/// The eight combinations index the eight attributes of a [`CostVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Variant {
    pub drop_left: bool,
    pub drop_right: bool,
    pub skip_one: bool,
}

impl Variant {
    pub const ALL: Variant = Variant::new(false, false, false);
    pub const ALL_1: Variant = Variant::new(false, false, true);

    pub const fn new(drop_left: bool, drop_right: bool, skip_one: bool) -> Self {
        Variant {
            drop_left,
            drop_right,
            skip_one,
        }
    }

    pub fn iter() -> impl Iterator<Item = Variant> {
        (0..8u8).map(|i| Variant::new(i & 1 != 0, i & 2 != 0, i & 4 != 0))
    }
}

/// One way of assembling a node's variant out of its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub left: Variant,
    pub right: Variant,
    /// Whether the gap edge `(RightMost(left), LeftMost(right))` is used.
    pub cross: bool,
}

/// Alternatives for `variant`, listed in recurrence order: without the cross
/// edge before with it, and for skip variants the skip in the left child
/// before the skip in the right child.
pub fn choices(variant: Variant) -> ([Choice; 4], usize) {
    let Variant {
        drop_left: dl,
        drop_right: dr,
        skip_one,
    } = variant;
    let c = |ls: bool, rs: bool, cross: bool| Choice {
        left: Variant::new(dl, cross, ls),
        right: Variant::new(cross, dr, rs),
        cross,
    };
    if skip_one {
        (
            [
                c(true, false, false),
                c(false, true, false),
                c(true, false, true),
                c(false, true, true),
            ],
            4,
        )
    } else {
        let none = c(false, false, false);
        ([none, c(false, false, true), none, none], 2)
    }
}

/// Matching costs of a subtree under every boundary-exclusion variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostVector {
    pub all: Cost,
    pub all_l: Cost,
    pub all_r: Cost,
    pub all_lr: Cost,
    pub all_1: Cost,
    pub all_1_l: Cost,
    pub all_1_r: Cost,
    pub all_1_lr: Cost,
}

impl CostVector {
    pub const LEAF: CostVector = CostVector {
        all: Cost::Infinite,
        all_l: Cost::ZERO,
        all_r: Cost::ZERO,
        all_lr: Cost::Infinite,
        all_1: Cost::ZERO,
        all_1_l: Cost::Infinite,
        all_1_r: Cost::Infinite,
        all_1_lr: Cost::Infinite,
    };

    pub fn get(&self, v: Variant) -> Cost {
        match (v.skip_one, v.drop_left, v.drop_right) {
            (false, false, false) => self.all,
            (false, true, false) => self.all_l,
            (false, false, true) => self.all_r,
            (false, true, true) => self.all_lr,
            (true, false, false) => self.all_1,
            (true, true, false) => self.all_1_l,
            (true, false, true) => self.all_1_r,
            (true, true, true) => self.all_1_lr,
        }
    }

    pub fn get_mut(&mut self, v: Variant) -> &mut Cost {
        match (v.skip_one, v.drop_left, v.drop_right) {
            (false, false, false) => &mut self.all,
            (false, true, false) => &mut self.all_l,
            (false, false, true) => &mut self.all_r,
            (false, true, true) => &mut self.all_lr,
            (true, false, false) => &mut self.all_1,
            (true, true, false) => &mut self.all_1_l,
            (true, false, true) => &mut self.all_1_r,
            (true, true, true) => &mut self.all_1_lr,
        }
    }

    /// Attributes of a parent whose children carry `left` and `right` and
    /// whose boundary gap is `gap`.
    pub fn combine(algebra: CostAlgebra, left: &CostVector, right: &CostVector, gap: f64) -> Self {
        let mut out = CostVector::LEAF;
        for v in Variant::iter() {
            *out.get_mut(v) = best_choice(algebra, v, left, right, gap).1;
        }
        out
    }

    /// Parity law: which attributes are finite is fixed by the leaf count.
    pub fn satisfies_parity_law(&self, leaf_count: usize) -> bool {
        let f = |c: Cost| c.is_finite();
        let base = if leaf_count % 2 == 0 {
            f(self.all) && f(self.all_lr) && !f(self.all_l) && !f(self.all_r)
        } else {
            !f(self.all) && !f(self.all_lr) && f(self.all_l) && f(self.all_r)
        };
        let skip = if leaf_count == 1 {
            *self == CostVector::LEAF
        } else {
            let odd = leaf_count % 2 == 1;
            f(self.all_1) == odd
                && f(self.all_1_lr) == odd
                && f(self.all_1_l) != odd
                && f(self.all_1_r) != odd
        };
        base && skip
    }
}

pub fn choice_cost(
    algebra: CostAlgebra,
    choice: Choice,
    left: &CostVector,
    right: &CostVector,
    gap: f64,
) -> Cost {
    let parts = [left.get(choice.left), right.get(choice.right)];
    let cost = algebra.combine_all(parts);
    if choice.cross {
        algebra.combine(cost, Cost::Finite(gap))
    } else {
        cost
    }
}

/// The first alternative attaining the minimum, with its cost.
pub fn best_choice(
    algebra: CostAlgebra,
    variant: Variant,
    left: &CostVector,
    right: &CostVector,
    gap: f64,
) -> (Choice, Cost) {
    let (list, len) = choices(variant);
    let mut best = (list[0], choice_cost(algebra, list[0], left, right, gap));
    for &choice in &list[1..len] {
        let cost = choice_cost(algebra, choice, left, right, gap);
        if cost < best.1 {
            best = (choice, cost);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_leaves_bottleneck() {
        let v = CostVector::combine(CostAlgebra::Bottleneck, &CostVector::LEAF, &CostVector::LEAF, 2.0);
        assert_eq!(v.all, Cost::Finite(2.0));
        assert_eq!(v.all_l, Cost::Infinite);
        assert_eq!(v.all_r, Cost::Infinite);
        assert_eq!(v.all_lr, Cost::ZERO);
        assert_eq!(v.all_1, Cost::Infinite);
        assert_eq!(v.all_1_l, Cost::ZERO);
        assert_eq!(v.all_1_r, Cost::ZERO);
        assert_eq!(v.all_1_lr, Cost::Infinite);
        assert!(v.satisfies_parity_law(2));
    }

    #[test]
    fn skip_variants_follow_listed_recurrence() {
        // ALL-1-L(v) = min{ (1-L, ALL), (L, 1), (1-LR, L, pi), (LR, 1-L, pi) }
        let (list, len) = choices(Variant::new(true, false, true));
        assert_eq!(len, 4);
        assert_eq!(list[0].left, Variant::new(true, false, true));
        assert_eq!(list[0].right, Variant::ALL);
        assert_eq!(list[1].left, Variant::new(true, false, false));
        assert_eq!(list[1].right, Variant::ALL_1);
        assert_eq!(list[2].left, Variant::new(true, true, true));
        assert_eq!(list[2].right, Variant::new(true, false, false));
        assert!(list[2].cross);
        assert_eq!(list[3].left, Variant::new(true, true, false));
        assert_eq!(list[3].right, Variant::new(true, false, true));
    }

    #[test]
    fn leaf_vector_layout() {
        let leaf = CostVector::LEAF;
        assert!(leaf.satisfies_parity_law(1));
        assert_eq!(leaf.get(Variant::new(true, false, false)), Cost::ZERO);
        assert_eq!(leaf.get(Variant::new(true, true, false)), Cost::Infinite);
        assert_eq!(leaf.get(Variant::ALL_1), Cost::ZERO);
    }
}
