use dynmatch::trace::{
    generate, parse_trace, replay, trace_to_string, Fault, GenSpec, Mode, ReplayOptions, StepValue, TraceOp,
};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = Mode> {
    prop_oneof![Just(Mode::LineBottleneck), Just(Mode::LineMinWeight), Just(Mode::Plane)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn print_then_parse_is_identity(mode in mode(), n in 0usize..40, seed in any::<u64>(), odd in any::<bool>()) {
        let spec = GenSpec { odd_queries: odd, ..GenSpec::new(mode, n, seed) };
        let t = generate(&spec).unwrap();
        let text = trace_to_string(&t);
        let back = parse_trace(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert_eq!(trace_to_string(&back), text);
    }

    #[test]
    fn generated_traces_verify(mode in mode(), n in 0usize..24, seed in any::<u64>()) {
        let t = generate(&GenSpec::new(mode, n, seed)).unwrap();
        let r = replay(&t, &ReplayOptions::verified());
        prop_assert!(r.is_ok(), "{:?}", r.err());
    }

    #[test]
    fn replay_is_deterministic(mode in mode(), n in 2usize..30, seed in any::<u64>()) {
        let t = generate(&GenSpec::new(mode, n, seed)).unwrap();
        let values = |t| -> Vec<Option<StepValue>> {
            replay(t, &ReplayOptions::default()).unwrap().into_iter().map(|r| r.value).collect()
        };
        prop_assert_eq!(values(&t), values(&t));
    }

    #[test]
    fn corrupted_root_is_caught_at_first_query(
        minweight in any::<bool>(),
        n in 4usize..60,
        seed in any::<u64>(),
        at in any::<prop::sample::Index>(),
    ) {
        let mode = if minweight { Mode::LineMinWeight } else { Mode::LineBottleneck };
        let t = generate(&GenSpec::new(mode, n, seed)).unwrap();
        let from_step = at.index(t.ops.len());
        // the first query over at least two points reads the root
        let mut size = 0usize;
        let mut first = None;
        for (i, op) in t.ops.iter().enumerate() {
            match op {
                TraceOp::Insert { .. } => size += 1,
                TraceOp::Delete { .. } => size -= 1,
                _ if i >= from_step && size >= 2 => {
                    first = Some(i);
                    break;
                }
                _ => {}
            }
        }
        let opts = ReplayOptions {
            fault: Some(Fault { from_step, delta: 1.0 }),
            ..ReplayOptions::verified()
        };
        match (replay(&t, &opts), first) {
            (Err(e), Some(i)) => prop_assert_eq!(e.step(), Some(i)),
            (Ok(_), None) => {}
            (r, f) => prop_assert!(false, "replay {:?}, first affected query {:?}", r.map(|v| v.len()), f),
        }
    }
}

#[test]
fn odd_queries_cover_odd_sizes() {
    let t = generate(&GenSpec {
        odd_queries: true,
        ..GenSpec::new(Mode::LineBottleneck, 31, 4)
    })
    .unwrap();
    let reports = replay(&t, &ReplayOptions::verified()).unwrap();
    let odd = reports
        .iter()
        .filter(|r| matches!(r.op, TraceOp::Query { .. }) && r.n % 2 == 1)
        .count();
    assert!(odd > 10);
}
