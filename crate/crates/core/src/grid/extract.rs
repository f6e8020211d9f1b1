use std::collections::{HashMap, VecDeque};

use super::level::{neighbors, Cell, LevelState};

/// Matches the points of one level whose components are all even.
///
/// Each component gets a BFS spanning tree rooted at its smallest cell. The
/// tree is consumed bottom-up: a vertex pools whatever its children still
/// hold, tops the pool up with its own smallest id when the pool is odd, and
/// pairs the pool in id order. Every pair therefore lies in the 3x3 block
/// around the vertex. The root finally pairs its own leftovers.
pub(crate) fn sweep(level: &LevelState) -> Vec<(u64, u64)> {
    let mut remaining: HashMap<Cell, Vec<u64>> = level
        .cells
        .iter()
        .map(|(c, ids)| (*c, ids.iter().copied().collect()))
        .collect();
    let mut pairs = Vec::new();
    for comp in level.components() {
        let (order, children) = spanning_tree(level, comp[0]);
        for &v in order.iter().rev() {
            let Some(kids) = children.get(&v) else {
                continue;
            };
            let mut pool: Vec<u64> = Vec::new();
            for k in kids {
                pool.append(remaining.get_mut(k).expect("occupied"));
            }
            if pool.len() % 2 == 1 {
                let own = remaining.get_mut(&v).expect("occupied");
                debug_assert!(!own.is_empty());
                pool.push(own.remove(0));
            }
            pair_in_order(pool, &mut pairs);
        }
        let root = std::mem::take(remaining.get_mut(&comp[0]).expect("occupied"));
        debug_assert!(root.len() % 2 == 0, "component parity must be even");
        pair_in_order(root, &mut pairs);
    }
    pairs
}

fn pair_in_order(mut pool: Vec<u64>, out: &mut Vec<(u64, u64)>) {
    pool.sort_unstable();
    out.extend(pool.chunks_exact(2).map(|c| (c[0], c[1])));
}

/// BFS order from `root` and the child lists of the BFS tree.
fn spanning_tree(level: &LevelState, root: Cell) -> (Vec<Cell>, HashMap<Cell, Vec<Cell>>) {
    let mut order = vec![root];
    let mut children: HashMap<Cell, Vec<Cell>> = HashMap::new();
    let mut seen = std::collections::HashSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for n in neighbors(v) {
            if level.is_occupied(n) && seen.insert(n) {
                children.entry(v).or_default().push(n);
                order.push(n);
                queue.push_back(n);
            }
        }
    }
    (order, children)
}
