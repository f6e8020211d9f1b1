//! Operation traces: file format, generator, verifying replay, benchmarks.
//!
//! A trace is line-delimited JSON. The first record is the header, every
//! following record one operation:
//!
//! ```text
//! {"mode":"plane","lambda":1.0,"bbox_origin":[0.0,0.0],"bbox_side":64.0,"seed":7}
//! {"op":"insert","id":0,"x":3.25,"y":10.5}
//! {"op":"insert","id":1,"x":4.5,"y":12.0}
//! {"op":"query"}
//! {"op":"delete","id":0}
//! {"op":"extract"}
//! ```
//!
//! Line modes omit `y` and the plane-only header fields. A query may carry
//! an `expect` field holding the value the replay must reproduce.

mod bench;
mod generate;
mod replay;

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use self::bench::{bench, write_csv, Baseline, BenchRow};
pub use self::generate::{generate, GenSpec};
pub use self::replay::{default_check_every, replay, Fault, ReplayError, ReplayOptions, StepReport, StepValue};
use crate::cost::CostAlgebra;
use crate::grid::{GridConfig, GridError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "line-bottleneck")]
    LineBottleneck,
    #[serde(rename = "line-minweight")]
    LineMinWeight,
    #[serde(rename = "plane")]
    Plane,
}

impl Mode {
    pub fn algebra(self) -> Option<CostAlgebra> {
        match self {
            Mode::LineBottleneck => Some(CostAlgebra::Bottleneck),
            Mode::LineMinWeight => Some(CostAlgebra::MinWeight),
            Mode::Plane => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::LineBottleneck => "line-bottleneck",
            Mode::LineMinWeight => "line-minweight",
            Mode::Plane => "plane",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "line-bottleneck" => Ok(Mode::LineBottleneck),
            "line-minweight" => Ok(Mode::LineMinWeight),
            "plane" => Ok(Mode::Plane),
            other => Err(format!(
                "unknown mode {other:?}; expected line-bottleneck, line-minweight or plane"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox_origin: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox_side: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TraceHeader {
    pub fn line(mode: Mode, seed: Option<u64>) -> Self {
        TraceHeader {
            mode,
            lambda: None,
            bbox_origin: None,
            bbox_side: None,
            seed,
        }
    }

    pub fn plane(lambda: f64, origin: (f64, f64), side: f64, seed: Option<u64>) -> Self {
        TraceHeader {
            mode: Mode::Plane,
            lambda: Some(lambda),
            bbox_origin: Some(origin),
            bbox_side: Some(side),
            seed,
        }
    }

    /// Grid configuration of a plane trace.
    pub fn grid_config(&self) -> Result<GridConfig, GridError> {
        let lambda = self
            .lambda
            .ok_or_else(|| GridError::InvalidConfig("plane mode needs lambda".into()))?;
        let side = self
            .bbox_side
            .ok_or_else(|| GridError::InvalidConfig("plane mode needs bbox_side".into()))?;
        let origin = self.bbox_origin.unwrap_or((0.0, 0.0));
        GridConfig::new(origin, side, lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceOp {
    Insert { id: u64, x: f64, y: Option<f64> },
    Delete { id: u64 },
    Query { expect: Option<f64> },
    Extract,
}

impl TraceOp {
    pub fn name(&self) -> &'static str {
        match self {
            TraceOp::Insert { .. } => "insert",
            TraceOp::Delete { .. } => "delete",
            TraceOp::Query { .. } => "query",
            TraceOp::Extract => "extract",
        }
    }

    pub fn is_update(&self) -> bool {
        matches!(self, TraceOp::Insert { .. } | TraceOp::Delete { .. })
    }
}

/// Wire form of one operation record.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpRecord {
    op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expect: Option<f64>,
}

impl From<&TraceOp> for OpRecord {
    fn from(op: &TraceOp) -> Self {
        let mut r = OpRecord {
            op: op.name().to_string(),
            id: None,
            x: None,
            y: None,
            expect: None,
        };
        match *op {
            TraceOp::Insert { id, x, y } => {
                r.id = Some(id);
                r.x = Some(x);
                r.y = y;
            }
            TraceOp::Delete { id } => r.id = Some(id),
            TraceOp::Query { expect } => r.expect = expect,
            TraceOp::Extract => {}
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub header: TraceHeader,
    pub ops: Vec<TraceOp>,
}

impl Trace {
    /// Largest number of simultaneously live points.
    pub fn peak_size(&self) -> usize {
        let (mut live, mut peak) = (0usize, 0usize);
        for op in &self.ops {
            match op {
                TraceOp::Insert { .. } => {
                    live += 1;
                    peak = peak.max(live);
                }
                TraceOp::Delete { .. } => live -= 1,
                _ => {}
            }
        }
        peak
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        msg: msg.into(),
    }
}

fn finite(line: usize, name: &str, v: f64) -> Result<f64, TraceError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_err(line, format!("{name} must be finite")))
    }
}

/// Reads and validates a trace. Line numbers in errors are 1-based.
pub fn parse_trace<R: BufRead>(reader: R) -> Result<Trace, TraceError> {
    let mut header: Option<(TraceHeader, Option<GridConfig>)> = None;
    let mut ops = Vec::new();
    let mut live: HashSet<u64> = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let Some((h, grid)) = &header else {
            let h: TraceHeader = serde_json::from_str(text)
                .map_err(|e| parse_err(lineno, format!("bad header: {e}")))?;
            let grid = match h.mode {
                Mode::Plane => Some(h.grid_config().map_err(|e| parse_err(lineno, e.to_string()))?),
                _ => None,
            };
            header = Some((h, grid));
            continue;
        };
        let rec: OpRecord =
            serde_json::from_str(text).map_err(|e| parse_err(lineno, format!("bad record: {e}")))?;
        let need_id = || rec.id.ok_or_else(|| parse_err(lineno, format!("{} needs an id", rec.op)));
        let op = match rec.op.as_str() {
            "insert" => {
                let id = need_id()?;
                let x = finite(lineno, "x", rec.x.ok_or_else(|| parse_err(lineno, "insert needs x"))?)?;
                let y = match (h.mode, rec.y) {
                    (Mode::Plane, None) => return Err(parse_err(lineno, "plane insert needs y")),
                    (Mode::Plane, Some(y)) => Some(finite(lineno, "y", y)?),
                    (_, Some(_)) => return Err(parse_err(lineno, "line insert must not carry y")),
                    (_, None) => None,
                };
                if let (Some(g), Some(y)) = (grid, y) {
                    if !g.contains(x, y) {
                        return Err(parse_err(lineno, format!("point {id} lies outside the bounding box")));
                    }
                }
                if !live.insert(id) {
                    return Err(parse_err(lineno, format!("id {id} is already live")));
                }
                TraceOp::Insert { id, x, y }
            }
            "delete" => {
                let id = need_id()?;
                if !live.remove(&id) {
                    return Err(parse_err(lineno, format!("delete of unknown id {id}")));
                }
                TraceOp::Delete { id }
            }
            "query" => TraceOp::Query { expect: rec.expect },
            "extract" => TraceOp::Extract,
            other => return Err(parse_err(lineno, format!("unknown op {other:?}"))),
        };
        ops.push(op);
    }
    let (header, _) = header.ok_or_else(|| parse_err(1, "missing header"))?;
    Ok(Trace { header, ops })
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> Result<(), TraceError> {
    serde_json::to_writer(&mut out, &trace.header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    for op in &trace.ops {
        serde_json::to_writer(&mut out, &OpRecord::from(op)).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn trace_to_string(trace: &Trace) -> String {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<Trace, TraceError> {
        parse_trace(s.as_bytes())
    }

    fn err_line(s: &str) -> usize {
        match parse(s) {
            Err(TraceError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parses_line_trace() {
        let t = parse(
            "{\"mode\":\"line-bottleneck\"}\n{\"op\":\"insert\",\"id\":1,\"x\":0.5}\n\
             {\"op\":\"insert\",\"id\":2,\"x\":2}\n{\"op\":\"query\"}\n",
        )
        .unwrap();
        assert_eq!(t.header.mode, Mode::LineBottleneck);
        assert_eq!(t.ops.len(), 3);
        assert_eq!(t.ops[1], TraceOp::Insert { id: 2, x: 2.0, y: None });
        assert_eq!(t.peak_size(), 2);
    }

    #[test]
    fn plane_insert_needs_y() {
        let h = "{\"mode\":\"plane\",\"lambda\":1,\"bbox_origin\":[0,0],\"bbox_side\":4}\n";
        assert_eq!(err_line(&format!("{h}{{\"op\":\"insert\",\"id\":1,\"x\":0.5}}\n")), 2);
        assert_eq!(
            err_line(&format!("{h}{{\"op\":\"query\"}}\n{{\"op\":\"insert\",\"id\":1,\"x\":5,\"y\":1}}\n")),
            3
        );
    }

    #[test]
    fn validation_errors_carry_line_numbers() {
        let h = "{\"mode\":\"line-minweight\"}\n";
        assert_eq!(err_line(&format!("{h}{{\"op\":\"delete\",\"id\":4}}\n")), 2);
        assert_eq!(err_line(&format!("{h}{{\"op\":\"jump\"}}\n")), 2);
        assert_eq!(err_line(&format!("{h}{{\"op\":\"insert\",\"x\":1}}\n")), 2);
        assert_eq!(
            err_line(&format!(
                "{h}{{\"op\":\"insert\",\"id\":1,\"x\":1}}\n{{\"op\":\"insert\",\"id\":1,\"x\":2}}\n"
            )),
            3
        );
        assert_eq!(err_line(&format!("{h}{{\"op\":\"insert\",\"id\":1,\"x\":1,\"y\":2}}\n")), 2);
        assert_eq!(err_line("{\"mode\":\"plane\",\"lambda\":2,\"bbox_side\":1}\n"), 1);
        assert_eq!(err_line("{\"mode\":\"cube\"}\n"), 1);
        assert_eq!(err_line(""), 1);
    }

    #[test]
    fn writes_canonical_records() {
        let t = Trace {
            header: TraceHeader::plane(1.0, (0.0, 0.0), 8.0, Some(3)),
            ops: vec![
                TraceOp::Insert { id: 0, x: 1.5, y: Some(2.0) },
                TraceOp::Query { expect: Some(0.5) },
                TraceOp::Delete { id: 0 },
                TraceOp::Extract,
            ],
        };
        let s = trace_to_string(&t);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(
            lines[0],
            "{\"mode\":\"plane\",\"lambda\":1.0,\"bbox_origin\":[0.0,0.0],\"bbox_side\":8.0,\"seed\":3}"
        );
        assert_eq!(lines[1], "{\"op\":\"insert\",\"id\":0,\"x\":1.5,\"y\":2.0}");
        assert_eq!(lines[2], "{\"op\":\"query\",\"expect\":0.5}");
        assert_eq!(lines[4], "{\"op\":\"extract\"}");
        assert_eq!(parse(&s).unwrap(), t);
    }
}
