//! Dynamic geometric matching.
//!
//! * [`line`]: exact bottleneck or minimum-weight matching value of points on
//!   a line, maintained in logarithmic time per insertion or deletion.
//! * [`grid`]: a `6 * sqrt(2)`-approximate bottleneck matching of points in
//!   the plane with a known bounding box and minimum separation.
//! * [`oracles`]: brute-force references used for verification.
//! * [`trace`]: operation traces, a generator, a verifying replayer and a
//!   benchmark runner.

pub mod cost;
pub mod dsu;
pub mod grid;
pub mod line;
pub mod oracles;
pub mod trace;

pub use cost::{Cost, CostAlgebra};
pub use dsu::{Parity, ParitySet};
pub use grid::{CellIndex, GridConfig, GridMatcher, PlanePoint, ThresholdResult};
pub use line::{LineMatchTree, LinePoint, MatchingResult};
