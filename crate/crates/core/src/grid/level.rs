use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::dsu::{Parity, ParitySet};

pub(crate) type Cell = (i64, i64);

/// Disjoint-set element: a cell tagged with the epoch in which it became
/// occupied, so an emptied cell can be retired without touching its set.
pub(crate) type CellKey = (i64, i64, u32);

pub(crate) const RING: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

pub(crate) fn neighbors(c: Cell) -> impl Iterator<Item = Cell> {
    RING.iter().map(move |(dx, dy)| (c.0 + dx, c.1 + dy))
}

/// What a retirement had to do to keep the components right.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Retirement {
    /// No occupied neighbour; the set was dropped.
    Isolated,
    /// Occupied neighbours stay connected through the ring around the cell.
    RingConnected,
    /// The ring test failed but a search found the neighbours still connected.
    ProbedConnected,
    /// The component split and was rebuilt.
    Split,
}

/// One grid level: occupancy, epochs and the components of the
/// non-empty-cell adjacency graph.
#[derive(Debug, Clone, Default)]
pub(crate) struct LevelState {
    pub cells: HashMap<Cell, BTreeSet<u64>>,
    epochs: HashMap<Cell, u32>,
    pub sets: ParitySet<CellKey>,
}

impl LevelState {
    pub fn key(&self, c: Cell) -> CellKey {
        (c.0, c.1, self.epochs.get(&c).copied().unwrap_or(0))
    }

    pub fn is_occupied(&self, c: Cell) -> bool {
        self.cells.contains_key(&c)
    }

    pub fn add_point(&mut self, c: Cell, id: u64) {
        let key = self.key(c);
        if let Some(ids) = self.cells.get_mut(&c) {
            ids.insert(id);
            self.sets.change_parity(&key).expect("occupied cell is registered");
            return;
        }
        self.cells.insert(c, BTreeSet::from([id]));
        self.sets.make_set(key).expect("fresh epoch is unregistered");
        for n in neighbors(c) {
            if self.is_occupied(n) {
                let nk = self.key(n);
                self.sets.union(&nk, &key).expect("occupied cell is registered");
            }
        }
    }

    /// Removes `id` from `c`; returns how the emptied cell was retired, or
    /// `None` if the cell still holds other points.
    pub fn remove_point(&mut self, c: Cell, id: u64) -> Option<Retirement> {
        let key = self.key(c);
        self.sets.change_parity(&key).expect("occupied cell is registered");
        let ids = self.cells.get_mut(&c).expect("point's cell is occupied");
        ids.remove(&id);
        if !ids.is_empty() {
            return None;
        }
        self.cells.remove(&c);
        *self.epochs.entry(c).or_insert(0) += 1;
        Some(self.retire(c, key))
    }

    fn retire(&mut self, c: Cell, key: CellKey) -> Retirement {
        let ring: Vec<Cell> = neighbors(c).filter(|n| self.is_occupied(*n)).collect();
        if ring.is_empty() {
            let members = self.sets.members(&key).expect("retired key is registered");
            self.sets.remove_all(&members).expect("members form a whole set");
            return Retirement::Isolated;
        }
        let groups = ring_groups(&ring);
        if groups.len() == 1 {
            return Retirement::RingConnected;
        }
        let targets: Vec<Cell> = groups.iter().map(|g| g[0]).collect();
        let first = self.search(targets[0], &targets[1..]);
        if first.reached_all {
            return Retirement::ProbedConnected;
        }
        let mut components = vec![first.visited];
        for &t in &targets[1..] {
            if components.iter().any(|comp| comp.contains(&t)) {
                continue;
            }
            components.push(self.search(t, &[]).visited);
        }
        let members = self.sets.members(&key).expect("retired key is registered");
        self.sets.remove_all(&members).expect("members form a whole set");
        for comp in &components {
            self.install_component(comp.iter().copied());
        }
        Retirement::Split
    }

    /// Registers a connected group of occupied cells as one set.
    fn install_component(&mut self, comp: impl Iterator<Item = Cell>) {
        let mut head: Option<CellKey> = None;
        for c in comp {
            let key = self.key(c);
            self.sets.make_set(key).expect("rebuilt key is unregistered");
            if self.cells[&c].len() % 2 == 0 {
                self.sets.change_parity(&key).expect("just registered");
            }
            match head {
                None => head = Some(key),
                Some(h) => self.sets.union(&h, &key).expect("registered"),
            }
        }
    }

    /// Breadth-first search over occupied cells from `start`, stopping early
    /// once every cell in `targets` has been seen.
    fn search(&self, start: Cell, targets: &[Cell]) -> Search {
        let mut visited = std::collections::HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        let mut remaining: std::collections::HashSet<Cell> = targets.iter().copied().collect();
        remaining.remove(&start);
        while let Some(c) = queue.pop_front() {
            if !targets.is_empty() && remaining.is_empty() {
                return Search {
                    visited,
                    reached_all: true,
                };
            }
            for n in neighbors(c) {
                if self.is_occupied(n) && visited.insert(n) {
                    remaining.remove(&n);
                    queue.push_back(n);
                }
            }
        }
        Search {
            reached_all: remaining.is_empty(),
            visited,
        }
    }

    /// Connected components of the occupied cells, computed from scratch.
    /// Components and their cells come out in lexicographic order.
    pub fn components(&self) -> Vec<Vec<Cell>> {
        let mut cells: Vec<Cell> = self.cells.keys().copied().collect();
        cells.sort_unstable();
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for c in cells {
            if seen.contains(&c) {
                continue;
            }
            let mut comp: Vec<Cell> = self.search(c, &[]).visited.into_iter().collect();
            comp.sort_unstable();
            seen.extend(comp.iter().copied());
            out.push(comp);
        }
        out
    }

    /// Checks the disjoint sets against a from-scratch component computation.
    pub fn audit(&mut self) -> Result<(), String> {
        let comps = self.components();
        let mut odd = 0;
        let mut roots = std::collections::HashSet::new();
        for comp in &comps {
            let points: usize = comp.iter().map(|c| self.cells[c].len()).sum();
            let parity = Parity::of_count(points);
            if parity == Parity::Odd {
                odd += 1;
            }
            let first = self.key(comp[0]);
            let root = self
                .sets
                .find(&first)
                .map_err(|e| format!("cell {:?}: {e}", comp[0]))?;
            for &c in comp {
                let k = self.key(c);
                let r = self.sets.find(&k).map_err(|e| format!("cell {c:?}: {e}"))?;
                if r != root {
                    return Err(format!("cells {:?} and {c:?} are connected but in different sets", comp[0]));
                }
            }
            if !roots.insert(root) {
                return Err(format!("component at {:?} shares a set with another component", comp[0]));
            }
            if self.sets.parity(&first).expect("registered") != parity {
                return Err(format!("component at {:?} has the wrong parity", comp[0]));
            }
        }
        if self.sets.set_count() != comps.len() {
            return Err(format!(
                "{} sets for {} components",
                self.sets.set_count(),
                comps.len()
            ));
        }
        if self.sets.odd_count() != odd {
            return Err(format!("odd count {} but {odd} odd components", self.sets.odd_count()));
        }
        Ok(())
    }
}

struct Search {
    visited: std::collections::HashSet<Cell>,
    reached_all: bool,
}

/// Groups of ring cells that touch each other without going through the
/// centre cell.
fn ring_groups(ring: &[Cell]) -> Vec<Vec<Cell>> {
    let adjacent = |a: Cell, b: Cell| (a.0 - b.0).abs() <= 1 && (a.1 - b.1).abs() <= 1;
    let mut group = vec![usize::MAX; ring.len()];
    let mut out: Vec<Vec<Cell>> = Vec::new();
    for s in 0..ring.len() {
        if group[s] != usize::MAX {
            continue;
        }
        let g = out.len();
        group[s] = g;
        let mut stack = vec![s];
        let mut cells = Vec::new();
        while let Some(i) = stack.pop() {
            cells.push(ring[i]);
            for j in 0..ring.len() {
                if group[j] == usize::MAX && adjacent(ring[i], ring[j]) {
                    group[j] = g;
                    stack.push(j);
                }
            }
        }
        out.push(cells);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_groups_use_diagonal_contact() {
        // (0,-1) and (1,0) touch at a corner
        assert_eq!(ring_groups(&[(5, 4), (6, 5)]).len(), 1);
        assert_eq!(ring_groups(&[(4, 5), (6, 5)]).len(), 2);
        assert_eq!(ring_groups(&[(4, 4), (4, 5), (4, 6), (5, 6), (6, 6)]).len(), 1);
    }

    #[test]
    fn split_and_rejoin() {
        let mut lv = LevelState::default();
        lv.add_point((0, 0), 1);
        lv.add_point((1, 1), 2);
        lv.add_point((2, 2), 3);
        assert_eq!(lv.sets.set_count(), 1);
        assert_eq!(lv.remove_point((1, 1), 2), Some(Retirement::Split));
        lv.audit().unwrap();
        assert_eq!(lv.sets.set_count(), 2);
        lv.add_point((1, 1), 4);
        lv.audit().unwrap();
        assert_eq!(lv.sets.set_count(), 1);
        assert!(!lv.sets.all_even());
    }

    #[test]
    fn retirement_kinds() {
        let mut lv = LevelState::default();
        // a ring around (5,5) with a gap on the right: still one group
        for (i, c) in [(4, 4), (4, 5), (4, 6), (5, 6), (5, 5)].into_iter().enumerate() {
            lv.add_point(c, i as u64);
        }
        assert_eq!(lv.remove_point((5, 5), 4), Some(Retirement::RingConnected));
        lv.audit().unwrap();

        // (5,4) and (5,6) only meet through the left column around (5,5)
        let mut lv = LevelState::default();
        let cells = [(5, 4), (5, 6), (4, 3), (3, 4), (3, 5), (3, 6), (4, 7), (5, 5)];
        for (i, c) in cells.into_iter().enumerate() {
            lv.add_point(c, i as u64);
        }
        assert_eq!(lv.remove_point((5, 5), 7), Some(Retirement::ProbedConnected));
        lv.audit().unwrap();

        let mut lv = LevelState::default();
        lv.add_point((0, 0), 1);
        lv.add_point((0, 0), 2);
        assert_eq!(lv.remove_point((0, 0), 1), None);
        assert_eq!(lv.remove_point((0, 0), 2), Some(Retirement::Isolated));
        assert!(lv.sets.is_empty());
        lv.audit().unwrap();
    }
}
