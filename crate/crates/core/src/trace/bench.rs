use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use super::replay::Engine;
use super::{Trace, TraceError, TraceOp};
use crate::grid::{GridMatcher, PlanePoint};
use crate::line::{LineMatchTree, LinePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    /// The incremental structures.
    Dynamic,
    /// Updates only edit a point list; every query builds from scratch.
    Rebuild,
}

impl FromStr for Baseline {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dynamic" => Ok(Baseline::Dynamic),
            "rebuild" => Ok(Baseline::Rebuild),
            other => Err(format!("unknown baseline {other:?}; expected dynamic or rebuild")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub step: usize,
    pub op: &'static str,
    pub elapsed_ns: u64,
    pub touched_nodes: u64,
    /// Live points after the step.
    pub n: usize,
}

/// Times every operation of `trace` under the chosen baseline.
pub fn bench(trace: &Trace, baseline: Baseline) -> Result<Vec<BenchRow>, TraceError> {
    match baseline {
        Baseline::Dynamic => bench_dynamic(trace),
        Baseline::Rebuild => Ok(bench_rebuild(trace)),
    }
}

fn bench_dynamic(trace: &Trace) -> Result<Vec<BenchRow>, TraceError> {
    let mut engine = Engine::for_trace(trace).map_err(|e| TraceError::Invalid(e.to_string()))?;
    let mut rows = Vec::with_capacity(trace.ops.len());
    for (step, op) in trace.ops.iter().enumerate() {
        let start = Instant::now();
        let (value, touched) = engine
            .apply(step, op)
            .map_err(|e| TraceError::Invalid(e.to_string()))?;
        let elapsed_ns = start.elapsed().as_nanos() as u64;
        std::hint::black_box(value);
        rows.push(BenchRow {
            step,
            op: op.name(),
            elapsed_ns,
            touched_nodes: touched,
            n: engine.size(),
        });
    }
    Ok(rows)
}

fn bench_rebuild(trace: &Trace) -> Vec<BenchRow> {
    let algebra = trace.header.mode.algebra();
    let grid_config = trace.header.grid_config().ok();
    let mut live: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut rows = Vec::with_capacity(trace.ops.len());
    for (step, op) in trace.ops.iter().enumerate() {
        let start = Instant::now();
        let touched = match *op {
            TraceOp::Insert { id, x, y } => {
                live.insert(id, (x, y.unwrap_or(0.0)));
                0
            }
            TraceOp::Delete { id } => {
                live.remove(&id);
                0
            }
            TraceOp::Query { .. } | TraceOp::Extract => {
                let extract = matches!(op, TraceOp::Extract);
                if let Some(alg) = algebra {
                    let pts: Vec<LinePoint> = live.iter().map(|(&id, &(x, _))| LinePoint::new(id, x)).collect();
                    let tree = LineMatchTree::build(&pts, alg).expect("trace ids are unique");
                    if extract {
                        std::hint::black_box(tree.extract_matching());
                    } else {
                        std::hint::black_box(tree.match_value());
                    }
                    tree.total_touched()
                } else {
                    let cfg = grid_config.expect("plane header validated at parse time");
                    let mut grid = GridMatcher::new(cfg);
                    let mut ops = 0;
                    for (&id, &(x, y)) in &live {
                        grid.insert(PlanePoint::new(id, x, y)).expect("trace points are valid");
                        ops += grid.last_stats().set_ops;
                    }
                    if extract {
                        let _ = std::hint::black_box(grid.extract_matching());
                    } else {
                        let _ = std::hint::black_box(grid.threshold());
                    }
                    ops
                }
            }
        };
        rows.push(BenchRow {
            step,
            op: op.name(),
            elapsed_ns: start.elapsed().as_nanos() as u64,
            touched_nodes: touched,
            n: live.len(),
        });
    }
    rows
}

/// Writes the rows as CSV with a header line.
pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "step,op,elapsed_ns,touched_nodes,n")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.step, r.op, r.elapsed_ns, r.touched_nodes, r.n)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{generate, GenSpec, Mode};

    #[test]
    fn one_row_per_op() {
        let t = generate(&GenSpec::new(Mode::LineBottleneck, 16, 3)).unwrap();
        for b in [Baseline::Dynamic, Baseline::Rebuild] {
            let rows = bench(&t, b).unwrap();
            assert_eq!(rows.len(), t.ops.len());
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            assert_eq!(text.lines().next(), Some("step,op,elapsed_ns,touched_nodes,n"));
            assert_eq!(text.lines().count(), t.ops.len() + 1);
        }
    }

    #[test]
    fn rebuild_touches_grow_with_n() {
        let t = generate(&GenSpec::new(Mode::Plane, 12, 5)).unwrap();
        let rows = bench(&t, Baseline::Rebuild).unwrap();
        let q = rows.iter().rfind(|r| r.op == "query").unwrap();
        assert!(q.touched_nodes as usize >= q.n);
    }
}
