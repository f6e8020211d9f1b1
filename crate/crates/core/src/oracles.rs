//! Brute-force reference matchers.
//!
//! These are deliberately independent of the dynamic structures: they only
//! sort, scan, or enumerate, and are what the tests and the replay harness
//! compare maintained values against.

use thiserror::Error;

use crate::cost::{Cost, CostAlgebra};
use crate::grid::PlanePoint;
use crate::line::{LinePoint, MatchingResult};

/// Largest instance the subset DP accepts.
pub const DP_MAX_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("a perfect matching needs an even number of points, got {0}")]
    OddCount(usize),
    #[error("skip-one matching needs an odd number of points, got {0}")]
    EvenCount(usize),
    #[error("exact DP is limited to {DP_MAX_POINTS} points, got {0}")]
    TooLarge(usize),
}

/// Point sets the exact DP can consume, with their metric.
#[derive(Debug, Clone, Copy)]
pub enum OracleInstance<'a> {
    Line(&'a [LinePoint]),
    Plane(&'a [PlanePoint]),
}

impl OracleInstance<'_> {
    pub fn len(&self) -> usize {
        match self {
            OracleInstance::Line(p) => p.len(),
            OracleInstance::Plane(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, a: usize, b: usize) -> f64 {
        match self {
            OracleInstance::Line(p) => p[a].distance(&p[b]),
            OracleInstance::Plane(p) => p[a].distance(&p[b]),
        }
    }
}

fn sorted(points: &[LinePoint]) -> Vec<LinePoint> {
    let mut v = points.to_vec();
    v.sort_by(LinePoint::key_cmp);
    v
}

fn pair_up(sorted: &[LinePoint], objective: CostAlgebra) -> MatchingResult {
    let edges: Vec<_> = sorted.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    let mut m = MatchingResult {
        value: Cost::ZERO,
        edges,
        skipped: None,
    };
    m.value = m.edge_cost(objective);
    m
}

/// Pairs sorted points as (p1,p2), (p3,p4), ... which is the optimal
/// matching on a line for both objectives.
pub fn line_consecutive(points: &[LinePoint], objective: CostAlgebra) -> Result<MatchingResult, OracleError> {
    if points.len() % 2 == 1 {
        return Err(OracleError::OddCount(points.len()));
    }
    Ok(pair_up(&sorted(points), objective))
}

/// Best consecutive pairing after removing one point, trying every point.
/// Ties go to the leftmost removed point.
pub fn line_skip_one(points: &[LinePoint], objective: CostAlgebra) -> Result<MatchingResult, OracleError> {
    if points.len() % 2 == 0 {
        return Err(OracleError::EvenCount(points.len()));
    }
    let s = sorted(points);
    let mut best: Option<MatchingResult> = None;
    let mut rest = Vec::with_capacity(s.len() - 1);
    for skip in 0..s.len() {
        rest.clear();
        rest.extend(s.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, p)| *p));
        let mut m = pair_up(&rest, objective);
        m.skipped = Some(s[skip]);
        if best.as_ref().is_none_or(|b| m.value < b.value) {
            best = Some(m);
        }
    }
    Ok(best.expect("at least one point"))
}

/// Exact optimum over all perfect matchings by subset DP. Each state pairs
/// its lowest-index point with every other remaining point.
pub fn exact_dp(instance: OracleInstance<'_>, objective: CostAlgebra) -> Result<Cost, OracleError> {
    let n = instance.len();
    if n % 2 == 1 {
        return Err(OracleError::OddCount(n));
    }
    if n > DP_MAX_POINTS {
        return Err(OracleError::TooLarge(n));
    }
    let mut dist = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            dist[a * n + b] = instance.distance(a, b);
        }
    }
    let full = (1usize << n) - 1;
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        if mask.count_ones() % 2 == 1 {
            continue;
        }
        let a = mask.trailing_zeros() as usize;
        let without_a = mask & !(1 << a);
        let mut rest = without_a;
        let mut value = f64::INFINITY;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let sub = best[without_a & !(1 << b)];
            let d = dist[a * n + b];
            let cand = match objective {
                CostAlgebra::Bottleneck => d.max(sub),
                CostAlgebra::MinWeight => d + sub,
            };
            if cand < value {
                value = cand;
            }
        }
        best[mask] = value;
    }
    Ok(Cost::Finite(best[full]))
}
