use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A matching cost: a finite non-negative length or the infinite sentinel
/// used for configurations that admit no matching. Serializes as a number,
/// or `null` when infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "Option<f64>", into = "Option<f64>")]
pub enum Cost {
    Finite(f64),
    Infinite,
}

impl From<Option<f64>> for Cost {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cost::Infinite, Cost::Finite)
    }
}

impl From<Cost> for Option<f64> {
    fn from(c: Cost) -> Self {
        c.finite()
    }
}

impl Cost {
    pub const ZERO: Cost = Cost::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Cost::Finite(v) => Some(v),
            Cost::Infinite => None,
        }
    }

    /// Larger of the two; `Infinite` dominates.
    pub fn max(self, other: Cost) -> Cost {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a.max(b)),
            _ => Cost::Infinite,
        }
    }

    /// Smaller of the two; `min(Infinite, x) = x`.
    pub fn min(self, other: Cost) -> Cost {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Sum; `Infinite` absorbs.
    pub fn add(self, other: Cost) -> Cost {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Eq for Cost {}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.total_cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl From<f64> for Cost {
    fn from(v: f64) -> Self {
        Cost::Finite(v)
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(v) => write!(f, "{v}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

/// Which objective a matching structure optimizes.
///
/// Both objectives select among alternatives with `min`; they differ only in
/// how the parts of one alternative are combined (`max` for the longest
/// edge, `+` for total length).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostAlgebra {
    Bottleneck,
    MinWeight,
}

impl CostAlgebra {
    pub fn combine(self, a: Cost, b: Cost) -> Cost {
        match self {
            CostAlgebra::Bottleneck => a.max(b),
            CostAlgebra::MinWeight => a.add(b),
        }
    }

    pub fn combine_all<I: IntoIterator<Item = Cost>>(self, parts: I) -> Cost {
        parts
            .into_iter()
            .fold(Cost::ZERO, |acc, c| self.combine(acc, c))
    }
}
