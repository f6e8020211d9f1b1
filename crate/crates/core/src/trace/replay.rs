use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use serde::{Serialize, Serializer};
use thiserror::Error;

use super::{Mode, OpRecord, Trace, TraceOp};
use crate::cost::{Cost, CostAlgebra};
use crate::grid::{GridMatcher, PlanePoint};
use crate::line::{LineMatchTree, LinePoint, MatchingResult};
use crate::oracles::{self, OracleInstance};

/// Plane states up to this size are checked against the exact DP.
pub const PLANE_ORACLE_MAX: usize = 16;
/// Relative slack on the upper side of the plane sandwich.
const UPPER_SLACK: f64 = 1e-9;
/// Absolute slack on the extraction bound.
const EXTRACT_SLACK: f64 = 1e-9;

/// `check_every` used when none is given: every step for small traces.
pub fn default_check_every(peak: usize) -> usize {
    if peak <= 256 {
        1
    } else {
        16
    }
}

/// Deliberate corruption of the line structure, for testing the checker.
/// From `from_step` on, the maintained root attributes are kept shifted by
/// `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub from_step: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReplayOptions {
    pub verify: bool,
    /// Oracle checks run on steps divisible by this; `None` picks
    /// [`default_check_every`].
    pub check_every: Option<usize>,
    pub fault: Option<Fault>,
}

impl ReplayOptions {
    pub fn verified() -> Self {
        ReplayOptions {
            verify: true,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepValue {
    /// Line query: optimal value over the live points.
    Match { value: Cost },
    /// Plane query: threshold level and `t`.
    Threshold { level: usize, t: f64, virtual_level: bool },
    /// Extracted matching as id pairs, with its cost and any skipped id.
    Matching {
        value: Cost,
        pairs: Vec<(u64, u64)>,
        skipped: Option<u64>,
    },
    /// Plane query or extract on a state without a perfect matching.
    NoMatching { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub step: usize,
    #[serde(serialize_with = "op_as_record")]
    pub op: TraceOp,
    /// Live points after the step.
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<StepValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<Cost>,
    pub elapsed_ns: u64,
    pub touched_nodes: u64,
}

fn op_as_record<S: Serializer>(op: &TraceOp, s: S) -> Result<S::Ok, S::Error> {
    OpRecord::from(op).serialize(s)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReplayError {
    #[error("step {step}: {what}: got {got}, expected {expected}")]
    Mismatch {
        step: usize,
        what: String,
        got: String,
        expected: String,
    },
    #[error("step {step}: {msg}")]
    Structure { step: usize, msg: String },
    #[error("{0}")]
    Setup(String),
}

impl ReplayError {
    pub fn step(&self) -> Option<usize> {
        match self {
            ReplayError::Mismatch { step, .. } | ReplayError::Structure { step, .. } => Some(*step),
            ReplayError::Setup(_) => None,
        }
    }
}

pub(crate) enum Engine {
    Line {
        tree: LineMatchTree,
        live: BTreeMap<u64, LinePoint>,
    },
    Plane {
        grid: GridMatcher,
        live: BTreeMap<u64, PlanePoint>,
    },
}

impl Engine {
    pub(crate) fn for_trace(trace: &Trace) -> Result<Self, ReplayError> {
        Ok(match trace.header.mode.algebra() {
            Some(alg) => Engine::Line {
                tree: LineMatchTree::new(alg),
                live: BTreeMap::new(),
            },
            None => {
                let cfg = trace
                    .header
                    .grid_config()
                    .map_err(|e| ReplayError::Setup(e.to_string()))?;
                Engine::Plane {
                    grid: GridMatcher::new(cfg),
                    live: BTreeMap::new(),
                }
            }
        })
    }

    pub(crate) fn size(&self) -> usize {
        match self {
            Engine::Line { live, .. } => live.len(),
            Engine::Plane { live, .. } => live.len(),
        }
    }

    /// Applies `op`; returns the value it produced and the touched count.
    pub(crate) fn apply(&mut self, step: usize, op: &TraceOp) -> Result<(Option<StepValue>, u64), ReplayError> {
        let bad = |msg: String| ReplayError::Structure { step, msg };
        match (self, *op) {
            (Engine::Line { tree, live }, TraceOp::Insert { id, x, .. }) => {
                let p = LinePoint::new(id, x);
                tree.insert(p).map_err(|e| bad(e.to_string()))?;
                live.insert(id, p);
                Ok((None, tree.last_touched()))
            }
            (Engine::Line { tree, live }, TraceOp::Delete { id }) => {
                tree.delete(id).map_err(|e| bad(e.to_string()))?;
                live.remove(&id);
                Ok((None, tree.last_touched()))
            }
            (Engine::Line { tree, .. }, TraceOp::Query { .. }) => {
                Ok((Some(StepValue::Match { value: tree.match_value() }), 0))
            }
            (Engine::Line { tree, .. }, TraceOp::Extract) => {
                let m = tree.extract_matching();
                Ok((
                    Some(StepValue::Matching {
                        value: m.value,
                        pairs: m.edges.iter().map(|(a, b)| (a.id, b.id)).collect(),
                        skipped: m.skipped.map(|p| p.id),
                    }),
                    0,
                ))
            }
            (Engine::Plane { grid, live }, TraceOp::Insert { id, x, y }) => {
                let p = PlanePoint::new(id, x, y.ok_or_else(|| bad("plane insert without y".into()))?);
                grid.insert(p).map_err(|e| bad(e.to_string()))?;
                live.insert(id, p);
                Ok((None, grid.last_stats().set_ops))
            }
            (Engine::Plane { grid, live }, TraceOp::Delete { id }) => {
                grid.delete(id).map_err(|e| bad(e.to_string()))?;
                live.remove(&id);
                Ok((None, grid.last_stats().set_ops))
            }
            (Engine::Plane { grid, .. }, TraceOp::Query { .. }) => Ok((
                Some(match grid.threshold() {
                    Ok(th) => StepValue::Threshold {
                        level: th.level,
                        t: th.t,
                        virtual_level: th.virtual_level,
                    },
                    Err(_) => StepValue::NoMatching { n: grid.size() },
                }),
                0,
            )),
            (Engine::Plane { grid, .. }, TraceOp::Extract) => Ok((
                Some(match grid.extract_matching() {
                    Ok(pairs) => StepValue::Matching {
                        value: CostAlgebra::Bottleneck
                            .combine_all(pairs.iter().map(|(a, b)| Cost::Finite(a.distance(b)))),
                        pairs: pairs.iter().map(|(a, b)| (a.id, b.id)).collect(),
                        skipped: None,
                    },
                    Err(_) => StepValue::NoMatching { n: grid.size() },
                }),
                0,
            )),
        }
    }
}

/// Line-mode agreement: exact for bottleneck; for sums, within the rounding
/// error of adding the same terms in a different order.
fn line_agrees(alg: CostAlgebra, n: usize, got: Cost, want: Cost) -> bool {
    match (alg, got, want) {
        (CostAlgebra::Bottleneck, _, _) => got == want,
        (CostAlgebra::MinWeight, Cost::Finite(a), Cost::Finite(b)) => {
            (a - b).abs() <= (n as f64) * f64::EPSILON * b.abs()
        }
        _ => got == want,
    }
}

fn mismatch(step: usize, what: &str, got: impl ToString, expected: impl ToString) -> ReplayError {
    ReplayError::Mismatch {
        step,
        what: what.to_string(),
        got: got.to_string(),
        expected: expected.to_string(),
    }
}

/// Checks that `pairs` (plus `skipped`) use every live id exactly once.
fn check_cover(
    step: usize,
    live: impl Iterator<Item = u64>,
    pairs: &[(u64, u64)],
    skipped: Option<u64>,
) -> Result<(), ReplayError> {
    let want: HashSet<u64> = live.collect();
    let mut seen = HashSet::new();
    for id in pairs.iter().flat_map(|&(a, b)| [a, b]).chain(skipped) {
        if !want.contains(&id) || !seen.insert(id) {
            return Err(ReplayError::Structure {
                step,
                msg: format!("extracted matching uses id {id} wrongly"),
            });
        }
    }
    if seen.len() != want.len() {
        return Err(ReplayError::Structure {
            step,
            msg: format!("extracted matching covers {} of {} points", seen.len(), want.len()),
        });
    }
    Ok(())
}

fn line_oracle(alg: CostAlgebra, live: &BTreeMap<u64, LinePoint>) -> MatchingResult {
    let pts: Vec<LinePoint> = live.values().copied().collect();
    if pts.len() % 2 == 0 {
        oracles::line_consecutive(&pts, alg).expect("even count")
    } else {
        oracles::line_skip_one(&pts, alg).expect("odd count")
    }
}

/// Runs the oracle checks that apply to one step; returns the oracle value.
fn verify_step(engine: &mut Engine, step: usize, value: Option<&StepValue>) -> Result<Option<Cost>, ReplayError> {
    match engine {
        Engine::Line { tree, live } => {
            let Some(value) = value else {
                return Ok(None);
            };
            let alg = tree.algebra();
            let want = line_oracle(alg, live).value;
            let n = live.len();
            match value {
                StepValue::Match { value } => {
                    if !line_agrees(alg, n, *value, want) {
                        return Err(mismatch(step, "matching value", value, want));
                    }
                }
                StepValue::Matching { value, pairs, skipped } => {
                    if !line_agrees(alg, n, *value, want) {
                        return Err(mismatch(step, "extracted value", value, want));
                    }
                    check_cover(step, live.keys().copied(), pairs, *skipped)?;
                    let cost = alg.combine_all(pairs.iter().map(|(a, b)| Cost::Finite(live[a].distance(&live[b]))));
                    if !line_agrees(alg, n, cost, want) {
                        return Err(mismatch(step, "extracted edge cost", cost, want));
                    }
                }
                _ => unreachable!("line steps produce line values"),
            }
            Ok(Some(want))
        }
        Engine::Plane { grid, live } => {
            grid.validate().map_err(|msg| ReplayError::Structure { step, msg })?;
            let Some(value) = value else {
                return Ok(None);
            };
            let n = live.len();
            let oracle = if n >= 2 && n % 2 == 0 && n <= PLANE_ORACLE_MAX {
                let pts: Vec<PlanePoint> = live.values().copied().collect();
                Some(
                    oracles::exact_dp(OracleInstance::Plane(&pts), CostAlgebra::Bottleneck)
                        .expect("small even instance")
                        .finite()
                        .expect("finite distances"),
                )
            } else {
                None
            };
            let th = grid.threshold();
            match (value, &th) {
                (StepValue::NoMatching { .. }, Err(_)) => {}
                (StepValue::NoMatching { .. }, Ok(_)) | (_, Err(_)) => {
                    return Err(ReplayError::Structure {
                        step,
                        msg: "threshold availability changed between calls".into(),
                    })
                }
                (StepValue::Threshold { t, .. }, Ok(_)) => {
                    if let Some(bn) = oracle {
                        check_sandwich(step, *t, bn)?;
                    }
                }
                (StepValue::Matching { value, pairs, .. }, Ok(th)) => {
                    check_cover(step, live.keys().copied(), pairs, None)?;
                    let bound = 3.0 * 2f64.sqrt() * grid.config().cell_side(th.level);
                    let longest = value.finite().unwrap_or(0.0);
                    if longest > bound + EXTRACT_SLACK {
                        return Err(mismatch(step, "longest extracted edge", longest, format!("<= {bound}")));
                    }
                    if let Some(bn) = oracle {
                        check_sandwich(step, th.t, bn)?;
                    }
                }
                (StepValue::Match { .. }, _) => unreachable!("plane steps produce plane values"),
            }
            Ok(oracle.map(Cost::Finite))
        }
    }
}

fn check_sandwich(step: usize, t: f64, bn: f64) -> Result<(), ReplayError> {
    let upper = 6.0 * 2f64.sqrt() * t;
    if t >= bn || bn.is_nan() {
        return Err(mismatch(step, "threshold t must be below the optimum", t, format!("< {bn}")));
    }
    if bn > upper * (1.0 + UPPER_SLACK) {
        return Err(mismatch(step, "optimum above 6*sqrt(2)*t", bn, format!("<= {upper}")));
    }
    Ok(())
}

/// Numeric value a stored `expect` field is compared with.
fn headline(value: &StepValue) -> Option<f64> {
    match value {
        StepValue::Match { value } | StepValue::Matching { value, .. } => value.finite(),
        StepValue::Threshold { t, .. } => Some(*t),
        StepValue::NoMatching { .. } => None,
    }
}

/// Applies every operation in order, recording one report per step. In
/// verify mode, steps divisible by `check_every` are cross-checked against
/// the oracles; stored expectations are always checked. The first failure
/// aborts the replay.
pub fn replay(trace: &Trace, opts: &ReplayOptions) -> Result<Vec<StepReport>, ReplayError> {
    let mut engine = Engine::for_trace(trace)?;
    let check_every = opts
        .check_every
        .unwrap_or_else(|| default_check_every(trace.peak_size()))
        .max(1);
    if opts.fault.is_some() && trace.header.mode == Mode::Plane {
        return Err(ReplayError::Setup("fault injection needs a line mode".into()));
    }
    let mut reports = Vec::with_capacity(trace.ops.len());
    for (step, op) in trace.ops.iter().enumerate() {
        let fault = opts.fault.filter(|f| step >= f.from_step);
        if let (Some(f), Engine::Line { tree, .. }) = (fault, &mut engine) {
            if step == f.from_step && !op.is_update() {
                tree.perturb_root(f.delta);
            }
        }
        let start = Instant::now();
        let (value, touched) = engine.apply(step, op)?;
        let elapsed_ns = start.elapsed().as_nanos() as u64;
        if let (Some(f), Engine::Line { tree, .. }) = (fault, &mut engine) {
            // updates rewrite the root, so the corruption is re-applied
            if op.is_update() {
                tree.perturb_root(f.delta);
            }
        }
        let oracle_value = if opts.verify && step % check_every == 0 {
            verify_step(&mut engine, step, value.as_ref())?
        } else {
            None
        };
        if let (TraceOp::Query { expect: Some(want) }, Some(v)) = (op, &value) {
            let got = headline(v);
            let ok = match (&engine, got) {
                (Engine::Line { tree, live }, Some(g)) => {
                    line_agrees(tree.algebra(), live.len(), Cost::Finite(g), Cost::Finite(*want))
                }
                (_, Some(g)) => g == *want,
                (_, None) => false,
            };
            if !ok {
                let got = got.map_or("none".to_string(), |g| g.to_string());
                return Err(mismatch(step, "stored expectation", got, want));
            }
        }
        reports.push(StepReport {
            step,
            op: *op,
            n: engine.size(),
            value,
            oracle_value,
            elapsed_ns,
            touched_nodes: touched,
        });
    }
    Ok(reports)
}
