use dynmatch::grid::{GridConfig, GridMatcher, PlanePoint};
use dynmatch::oracles::{exact_dp, OracleInstance};
use dynmatch::CostAlgebra;
use proptest::prelude::*;

/// Keeps the candidates at distance at least 1 from all earlier survivors.
fn separated(raw: &[(f64, f64)]) -> Vec<PlanePoint> {
    let mut out: Vec<PlanePoint> = Vec::new();
    for &(x, y) in raw {
        let p = PlanePoint::new(out.len() as u64, x, y);
        if out.iter().all(|q| q.distance(&p) >= 1.0) {
            out.push(p);
        }
    }
    out
}

fn coords(side: f64, max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..side, 0.0..side), 0..max)
}

fn matcher(side: f64) -> GridMatcher {
    GridMatcher::new(GridConfig::new((0.0, 0.0), side, 1.0).unwrap()).with_separation_check(true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn components_match_rebuild_under_updates(
        raw in coords(24.0, 80),
        order in prop::collection::vec(any::<prop::sample::Index>(), 0..80),
    ) {
        let pts = separated(&raw);
        let mut g = matcher(24.0);
        let mut live: Vec<PlanePoint> = Vec::new();
        let mut pending = pts.clone();
        for (k, idx) in order.iter().enumerate() {
            // alternate phases: mostly grow, then mostly shrink
            let grow = !pending.is_empty() && (live.is_empty() || (k / 10) % 2 == 0);
            if grow {
                let p = pending.remove(idx.index(pending.len()));
                g.insert(p).unwrap();
                live.push(p);
            } else if !live.is_empty() {
                let p = live.swap_remove(idx.index(live.len()));
                g.delete(p.id).unwrap();
                pending.push(p);
            }
            prop_assert!(g.validate().is_ok(), "{:?}", g.validate());
        }
    }

    #[test]
    fn sandwich_and_extraction(raw in coords(32.0, 40)) {
        let mut pts = separated(&raw);
        pts.truncate(16);
        if pts.len() % 2 == 1 {
            pts.pop();
        }
        prop_assume!(!pts.is_empty());
        let mut g = matcher(32.0);
        for p in &pts {
            g.insert(*p).unwrap();
        }
        let bn = exact_dp(OracleInstance::Plane(&pts), CostAlgebra::Bottleneck).unwrap().finite().unwrap();
        let th = g.threshold().unwrap();
        prop_assert!(th.t < bn, "t {} bn {}", th.t, bn);
        prop_assert!(bn <= 6.0 * 2f64.sqrt() * th.t * (1.0 + 1e-9));
        // every level coarse enough for the optimum is all even
        for level in 0..g.config().level_count() {
            if g.config().cell_side(level) >= bn {
                prop_assert!(g.all_even_at(level).unwrap(), "level {} odd with bn {}", level, bn);
            }
        }
        let m = g.extract_matching().unwrap();
        prop_assert_eq!(m.len() * 2, pts.len());
        let mut ids: Vec<u64> = m.iter().flat_map(|(a, b)| [a.id, b.id]).collect();
        ids.sort_unstable();
        prop_assert_eq!(ids, (0..pts.len() as u64).collect::<Vec<_>>());
        let bound = 3.0 * 2f64.sqrt() * g.config().cell_side(th.level) + 1e-9;
        for (a, b) in &m {
            prop_assert!(a.distance(b) <= bound);
        }
    }
}

#[test]
fn one_deletion_can_split_two_levels() {
    // Removing `p` disconnects (1,3) from (1,1) at level 0 and the pair
    // {(0,0), (0,1)} from (2,1) at level 1.
    let mut g = matcher(8.0);
    let p = PlanePoint::new(0, 2.5, 2.5);
    let above = PlanePoint::new(1, 1.5, 3.5);
    let below = PlanePoint::new(2, 1.5, 1.5);
    let right = PlanePoint::new(3, 5.5, 2.5);
    for q in [p, above, below, right] {
        g.insert(q).unwrap();
    }
    assert_eq!(g.components_at(0).unwrap().len(), 2);
    assert_eq!(g.components_at(1).unwrap().len(), 1);
    g.delete(0).unwrap();
    let stats = g.last_stats();
    assert_eq!(stats.emptied_levels, 2);
    assert_eq!(stats.splits, 2);
    g.validate().unwrap();
    assert_eq!(g.components_at(0).unwrap().len(), 3);
    assert_eq!(g.components_at(1).unwrap().len(), 2);
}

#[test]
fn separation_is_enforced_on_request() {
    let mut g = matcher(8.0);
    g.insert(PlanePoint::new(0, 1.0, 1.0)).unwrap();
    assert!(g.insert(PlanePoint::new(1, 1.5, 1.5)).is_err());
    let mut lax = GridMatcher::new(GridConfig::new((0.0, 0.0), 8.0, 1.0).unwrap());
    lax.insert(PlanePoint::new(0, 1.0, 1.0)).unwrap();
    assert!(lax.insert(PlanePoint::new(1, 1.5, 1.5)).is_ok());
}
