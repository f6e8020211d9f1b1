//! Approximate bottleneck matching of a dynamic planar point set.
//!
//! The bounding box is covered by grids of cell side `2^i * lambda` for
//! `i = 0..=c`. For each level the matcher tracks the connected components of
//! the graph whose vertices are non-empty cells (8-adjacency), and the parity
//! of the number of points in each component. The smallest level at which
//! every component is even pins the optimal bottleneck within a factor of
//! `6 * sqrt(2)`, and a spanning-tree sweep of that level's components yields
//! a matching within the same factor.

mod extract;
mod level;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use self::level::{Cell, LevelState, Retirement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub id: u64,
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(id: u64, x: f64, y: f64) -> Self {
        PlanePoint { id, x, y }
    }

    pub fn distance(&self, other: &PlanePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid configuration: {0}")]
    InvalidConfig(String),
    #[error("point id {0} is already present")]
    DuplicateId(u64),
    #[error("point id {0} is not present")]
    UnknownId(u64),
    #[error("point {id} at ({x}, {y}) lies outside the bounding box")]
    OutOfBounds { id: u64, x: f64, y: f64 },
    #[error("point {id} is closer than lambda to point {other}")]
    TooClose { id: u64, other: u64 },
    #[error("no perfect matching exists for {0} points")]
    NoPerfectMatching(usize),
    #[error("level {level} is out of range 0..={max}")]
    LevelOutOfRange { level: usize, max: usize },
}

/// Bounding box and separation bound for the grid hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub origin: (f64, f64),
    pub side: f64,
    pub lambda: f64,
    /// Smallest `c` with `2^c * lambda >= side`, i.e. `ceil(log2(side / lambda))`.
    pub levels_c: usize,
}

impl GridConfig {
    pub fn new(origin: (f64, f64), side: f64, lambda: f64) -> Result<Self, GridError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(GridError::InvalidConfig(format!("lambda must be positive, got {lambda}")));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(GridError::InvalidConfig(format!("box side must be positive, got {side}")));
        }
        if side < lambda {
            return Err(GridError::InvalidConfig(format!(
                "box side {side} is smaller than lambda {lambda}"
            )));
        }
        if !(origin.0.is_finite() && origin.1.is_finite()) {
            return Err(GridError::InvalidConfig("origin must be finite".into()));
        }
        let mut levels_c = 0;
        while lambda * 2f64.powi(levels_c as i32) < side {
            levels_c += 1;
            if levels_c > 1024 {
                return Err(GridError::InvalidConfig("spread too large".into()));
            }
        }
        Ok(GridConfig {
            origin,
            side,
            lambda,
            levels_c,
        })
    }

    pub fn level_count(&self) -> usize {
        self.levels_c + 1
    }

    pub fn cell_side(&self, level: usize) -> f64 {
        self.lambda * 2f64.powi(level as i32)
    }

    /// Cells per axis at `level`.
    pub fn cells_per_axis(&self, level: usize) -> i64 {
        let base = (self.side / self.lambda).ceil().max(1.0) as i64;
        // ceil(base / 2^level)
        ((base - 1) >> level.min(62)) + 1
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let inside = |v: f64, o: f64| v >= o && v <= o + self.side;
        inside(x, self.origin.0) && inside(y, self.origin.1)
    }

    /// Cell of `(x, y)` at `level`. Cells are half-open; the top and right
    /// box boundary fold into the last row and column.
    pub fn cell_of(&self, x: f64, y: f64, level: usize) -> CellIndex {
        let last = self.cells_per_axis(level) - 1;
        let base = |v: f64, o: f64| ((v - o) / self.lambda).floor() as i64;
        let ix = (base(x, self.origin.0).max(0) >> level).min(last);
        let iy = (base(y, self.origin.1).max(0) >> level).min(last);
        CellIndex { level, ix, iy }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub level: usize,
    pub ix: i64,
    pub iy: i64,
}

impl CellIndex {
    pub fn is_adjacent(&self, other: &CellIndex) -> bool {
        self.level == other.level
            && self != other
            && (self.ix - other.ix).abs() <= 1
            && (self.iy - other.iy).abs() <= 1
    }

    fn cell(&self) -> Cell {
        (self.ix, self.iy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub level: usize,
    /// `2^(level - 1) * lambda`; satisfies `t < bn* <= 6 * sqrt(2) * t`.
    pub t: f64,
    /// Set when no real level was all-even and the single-cell level above
    /// the hierarchy was used instead.
    pub virtual_level: bool,
}

/// Instrumentation for the most recent update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Disjoint-set operations performed.
    pub set_ops: u64,
    /// Levels at which the emptied cell had no occupied neighbour.
    pub isolated: u32,
    /// Levels settled by the ring test alone.
    pub ring_connected: u32,
    /// Levels that needed a search and found no split.
    pub probes: u32,
    /// Levels whose component split and was rebuilt.
    pub splits: u32,
    /// Levels at which the deleted point's cell became empty.
    pub emptied_levels: u32,
}

#[derive(Debug, Clone)]
pub struct GridMatcher {
    config: GridConfig,
    levels: Vec<LevelState>,
    points: HashMap<u64, PlanePoint>,
    check_separation: bool,
    last: UpdateStats,
}

impl GridMatcher {
    pub fn new(config: GridConfig) -> Self {
        GridMatcher {
            levels: vec![LevelState::default(); config.level_count()],
            config,
            points: HashMap::new(),
            check_separation: false,
            last: UpdateStats::default(),
        }
    }

    /// Enables the lambda-separation check on insert.
    pub fn with_separation_check(mut self, on: bool) -> Self {
        self.check_separation = on;
        self
    }

    pub fn config(&self) -> &GridConfig {
        &self.config
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn contains(&self, id: u64) -> bool {
        self.points.contains_key(&id)
    }

    pub fn points(&self) -> impl Iterator<Item = &PlanePoint> {
        self.points.values()
    }

    pub fn last_stats(&self) -> UpdateStats {
        self.last
    }

    fn set_ops(&self) -> u64 {
        self.levels.iter().map(|l| l.sets.op_count()).sum()
    }

    pub fn insert(&mut self, p: PlanePoint) -> Result<(), GridError> {
        if self.points.contains_key(&p.id) {
            return Err(GridError::DuplicateId(p.id));
        }
        if !self.config.contains(p.x, p.y) {
            return Err(GridError::OutOfBounds {
                id: p.id,
                x: p.x,
                y: p.y,
            });
        }
        if self.check_separation {
            if let Some(other) = self.too_close(&p) {
                return Err(GridError::TooClose { id: p.id, other });
            }
        }
        let before = self.set_ops();
        for (level, state) in self.levels.iter_mut().enumerate() {
            let c = self.config.cell_of(p.x, p.y, level).cell();
            state.add_point(c, p.id);
        }
        self.points.insert(p.id, p);
        self.last = UpdateStats {
            set_ops: self.set_ops() - before,
            ..UpdateStats::default()
        };
        Ok(())
    }

    fn too_close(&self, p: &PlanePoint) -> Option<u64> {
        let c = self.config.cell_of(p.x, p.y, 0).cell();
        let level0 = &self.levels[0];
        std::iter::once(c)
            .chain(level::neighbors(c))
            .filter_map(|n| level0.cells.get(&n))
            .flatten()
            .find(|id| self.points[id].distance(p) < self.config.lambda)
            .copied()
    }

    pub fn delete(&mut self, id: u64) -> Result<PlanePoint, GridError> {
        let p = self.points.remove(&id).ok_or(GridError::UnknownId(id))?;
        let before = self.set_ops();
        let mut stats = UpdateStats::default();
        for (level, state) in self.levels.iter_mut().enumerate() {
            let c = self.config.cell_of(p.x, p.y, level).cell();
            let Some(kind) = state.remove_point(c, id) else {
                continue;
            };
            stats.emptied_levels += 1;
            match kind {
                Retirement::Isolated => stats.isolated += 1,
                Retirement::RingConnected => stats.ring_connected += 1,
                Retirement::ProbedConnected => stats.probes += 1,
                Retirement::Split => stats.splits += 1,
            }
        }
        stats.set_ops = self.set_ops() - before;
        self.last = stats;
        Ok(p)
    }

    pub fn all_even_at(&self, level: usize) -> Result<bool, GridError> {
        self.levels
            .get(level)
            .map(|l| l.sets.all_even())
            .ok_or(GridError::LevelOutOfRange {
                level,
                max: self.config.levels_c,
            })
    }

    /// Smallest level whose components all hold an even number of points.
    pub fn threshold(&self) -> Result<ThresholdResult, GridError> {
        let n = self.size();
        if n == 0 || n % 2 == 1 {
            return Err(GridError::NoPerfectMatching(n));
        }
        let lambda = self.config.lambda;
        let t_of = |level: usize| lambda * 2f64.powi(level as i32 - 1);
        for (level, state) in self.levels.iter().enumerate() {
            if state.sets.all_even() {
                return Ok(ThresholdResult {
                    level,
                    t: t_of(level),
                    virtual_level: false,
                });
            }
        }
        let level = self.config.level_count();
        Ok(ThresholdResult {
            level,
            t: t_of(level),
            virtual_level: true,
        })
    }

    /// Perfect matching whose longest edge is at most
    /// `3 * sqrt(2) * 2^level * lambda` for the threshold level.
    pub fn extract_matching(&self) -> Result<Vec<(PlanePoint, PlanePoint)>, GridError> {
        let th = self.threshold()?;
        let pairs = if th.virtual_level {
            let mut ids: Vec<u64> = self.points.keys().copied().collect();
            ids.sort_unstable();
            ids.chunks_exact(2).map(|c| (c[0], c[1])).collect()
        } else {
            extract::sweep(&self.levels[th.level])
        };
        Ok(pairs
            .into_iter()
            .map(|(a, b)| (self.points[&a], self.points[&b]))
            .collect())
    }

    /// Connected components of non-empty cells at `level`, from scratch.
    pub fn components_at(&self, level: usize) -> Result<Vec<Vec<CellIndex>>, GridError> {
        let state = self.levels.get(level).ok_or(GridError::LevelOutOfRange {
            level,
            max: self.config.levels_c,
        })?;
        Ok(state
            .components()
            .into_iter()
            .map(|comp| {
                comp.into_iter()
                    .map(|(ix, iy)| CellIndex { level, ix, iy })
                    .collect()
            })
            .collect())
    }

    /// Rebuilds occupancy and components of every level from the stored
    /// points and compares them with the maintained state.
    pub fn validate(&mut self) -> Result<(), String> {
        for level in 0..self.levels.len() {
            let mut occupancy: HashMap<Cell, Vec<u64>> = HashMap::new();
            for p in self.points.values() {
                let c = self.config.cell_of(p.x, p.y, level).cell();
                occupancy.entry(c).or_default().push(p.id);
            }
            let state = &mut self.levels[level];
            if occupancy.len() != state.cells.len() {
                return Err(format!(
                    "level {level}: {} occupied cells, expected {}",
                    state.cells.len(),
                    occupancy.len()
                ));
            }
            for (c, ids) in &occupancy {
                let stored = state.cells.get(c).map(|s| s.len());
                if stored != Some(ids.len()) {
                    return Err(format!("level {level}: cell {c:?} holds {stored:?}, expected {}", ids.len()));
                }
            }
            state.audit().map_err(|e| format!("level {level}: {e}"))?;
        }
        Ok(())
    }
}
