use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Mode, Trace, TraceError, TraceHeader, TraceOp};

/// Line coordinates are multiples of this, so sums of gaps stay exact.
const LINE_GRID: f64 = 1.0 / 16.0;
const LINE_SLOTS: u64 = 1 << 24;
const PLACEMENT_TRIES: usize = 100_000;

/// Parameters of a random trace.
#[derive(Debug, Clone, PartialEq)]
pub struct GenSpec {
    pub mode: Mode,
    /// Largest number of simultaneously live points.
    pub n: usize,
    pub seed: u64,
    pub lambda: f64,
    pub bbox_origin: (f64, f64),
    pub bbox_side: f64,
    /// Update rounds; `None` means `2 * n`.
    pub rounds: Option<usize>,
    /// Query after every single update, so odd sizes get queried too.
    pub odd_queries: bool,
}

impl GenSpec {
    pub fn new(mode: Mode, n: usize, seed: u64) -> Self {
        GenSpec {
            mode,
            n,
            seed,
            lambda: 1.0,
            bbox_origin: (0.0, 0.0),
            bbox_side: 64.0,
            rounds: None,
            odd_queries: false,
        }
    }
}

/// Samples points no closer than lambda to each other, using level-0 sized
/// buckets to keep each rejection test local.
#[allow(clippy::type_complexity)]
struct PlaneSampler {
    lambda: f64,
    origin: (f64, f64),
    side: f64,
    /// (id, x, y) of the live points in each bucket.
    buckets: HashMap<(i64, i64), Vec<(u64, f64, f64)>>,
}

impl PlaneSampler {
    fn bucket(&self, x: f64, y: f64) -> (i64, i64) {
        (
            ((x - self.origin.0) / self.lambda).floor() as i64,
            ((y - self.origin.1) / self.lambda).floor() as i64,
        )
    }

    fn fits(&self, x: f64, y: f64) -> bool {
        let (bx, by) = self.bucket(x, y);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = self.buckets.get(&(bx + dx, by + dy)) {
                    if v.iter().any(|&(_, px, py)| (px - x).hypot(py - y) < self.lambda) {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn sample<R: Rng>(&mut self, rng: &mut R, id: u64) -> Result<(f64, f64), TraceError> {
        for _ in 0..PLACEMENT_TRIES {
            let x = self.origin.0 + rng.gen::<f64>() * self.side;
            let y = self.origin.1 + rng.gen::<f64>() * self.side;
            if self.fits(x, y) {
                let b = self.bucket(x, y);
                self.buckets.entry(b).or_default().push((id, x, y));
                return Ok((x, y));
            }
        }
        Err(TraceError::Invalid(format!(
            "could not place point {id} after {PLACEMENT_TRIES} tries"
        )))
    }

    fn remove(&mut self, id: u64, x: f64, y: f64) {
        let b = self.bucket(x, y);
        if let Some(v) = self.buckets.get_mut(&b) {
            v.retain(|e| e.0 != id);
        }
    }
}

/// Random interleaved insert/delete/query schedule, deterministic in the
/// seed. Without `odd_queries` updates come in pairs, so every query and
/// extract sees an even number of points.
pub fn generate(spec: &GenSpec) -> Result<Trace, TraceError> {
    let header = match spec.mode {
        Mode::Plane => {
            let h = TraceHeader::plane(spec.lambda, spec.bbox_origin, spec.bbox_side, Some(spec.seed));
            h.grid_config().map_err(|e| TraceError::Invalid(e.to_string()))?;
            let need = spec.n as f64 * (2.0 * spec.lambda).powi(2);
            if need > spec.bbox_side * spec.bbox_side {
                return Err(TraceError::Invalid(format!(
                    "{} points at separation {} do not fit a box of side {}",
                    spec.n, spec.lambda, spec.bbox_side
                )));
            }
            h
        }
        mode => TraceHeader::line(mode, Some(spec.seed)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sampler = PlaneSampler {
        lambda: spec.lambda,
        origin: spec.bbox_origin,
        side: spec.bbox_side,
        buckets: HashMap::new(),
    };
    let mut live: Vec<(u64, f64, f64)> = Vec::new();
    let mut next_id = 0u64;
    let mut ops = Vec::new();
    let step = if spec.odd_queries { 1 } else { 2 };
    let cap = if spec.odd_queries { spec.n } else { spec.n - spec.n % 2 };
    let rounds = spec.rounds.unwrap_or(2 * spec.n);

    for _ in 0..rounds {
        if cap < step {
            break;
        }
        // insert-heavy until full, then a random walk around the cap
        let grow = live.len() + step <= cap && (live.len() < step || rng.gen_bool(0.6));
        for _ in 0..step {
            if grow {
                let id = next_id;
                next_id += 1;
                let (x, y) = match spec.mode {
                    Mode::Plane => {
                        let (x, y) = sampler.sample(&mut rng, id)?;
                        (x, Some(y))
                    }
                    _ => (rng.gen_range(0..LINE_SLOTS) as f64 * LINE_GRID, None),
                };
                live.push((id, x, y.unwrap_or(0.0)));
                ops.push(TraceOp::Insert { id, x, y });
            } else {
                let (id, x, y) = live.swap_remove(rng.gen_range(0..live.len()));
                if spec.mode == Mode::Plane {
                    sampler.remove(id, x, y);
                }
                ops.push(TraceOp::Delete { id });
            }
        }
        ops.push(TraceOp::Query { expect: None });
        if !live.is_empty() && rng.gen_bool(0.1) {
            ops.push(TraceOp::Extract);
        }
    }
    Ok(Trace { header, ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::trace_to_string;

    #[test]
    fn same_seed_same_bytes() {
        let s = GenSpec::new(Mode::Plane, 20, 9);
        assert_eq!(trace_to_string(&generate(&s).unwrap()), trace_to_string(&generate(&s).unwrap()));
        let other = GenSpec { seed: 10, ..s };
        assert_ne!(generate(&other).unwrap(), generate(&GenSpec::new(Mode::Plane, 20, 9)).unwrap());
    }

    #[test]
    fn plane_points_are_separated() {
        let s = GenSpec {
            bbox_side: 32.0,
            ..GenSpec::new(Mode::Plane, 8, 4)
        };
        let t = generate(&s).unwrap();
        let mut live: HashMap<u64, (f64, f64)> = HashMap::new();
        for op in &t.ops {
            match *op {
                TraceOp::Insert { id, x, y } => {
                    let y = y.unwrap();
                    for &(px, py) in live.values() {
                        assert!((px - x).hypot(py - y) >= 1.0);
                    }
                    live.insert(id, (x, y));
                }
                TraceOp::Delete { id } => {
                    live.remove(&id);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn queries_see_even_sizes() {
        let t = generate(&GenSpec::new(Mode::LineBottleneck, 9, 2)).unwrap();
        let mut size = 0usize;
        for op in &t.ops {
            match op {
                TraceOp::Insert { .. } => size += 1,
                TraceOp::Delete { .. } => size -= 1,
                _ => assert_eq!(size % 2, 0),
            }
            assert!(size <= 8);
        }
        assert_eq!(t.peak_size(), 8);
    }

    #[test]
    fn capacity_guard() {
        let s = GenSpec {
            bbox_side: 10.0,
            ..GenSpec::new(Mode::Plane, 26, 1)
        };
        assert!(matches!(generate(&s), Err(TraceError::Invalid(_))));
    }
}
