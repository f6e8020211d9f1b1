use std::collections::HashMap;

use dynmatch::dsu::DsuError;
use dynmatch::{Parity, ParitySet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quadratic reference: an explicit label per element.
#[derive(Default)]
struct Naive {
    label: HashMap<u32, u32>,
    parity: HashMap<u32, Parity>,
}

impl Naive {
    fn make_set(&mut self, x: u32) {
        self.label.insert(x, x);
        self.parity.insert(x, Parity::Odd);
    }

    fn union(&mut self, x: u32, y: u32) {
        let (a, b) = (self.label[&x], self.label[&y]);
        if a == b {
            return;
        }
        for l in self.label.values_mut() {
            if *l == b {
                *l = a;
            }
        }
        let pb = self.parity.remove(&b).unwrap();
        let pa = self.parity[&a];
        self.parity.insert(a, pa.xor(pb));
    }

    fn flip(&mut self, x: u32) {
        let p = self.parity.get_mut(&self.label[&x]).unwrap();
        *p = p.flip();
    }

    fn odd(&self) -> usize {
        self.parity.values().filter(|p| **p == Parity::Odd).count()
    }
}

#[derive(Debug, Clone)]
enum Op {
    Make,
    Union(usize, usize),
    Flip(usize),
}

proptest! {
    #[test]
    fn agrees_with_naive_reference(ops in prop::collection::vec(
        prop_oneof![
            1 => Just(Op::Make),
            2 => (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Op::Union(a, b)),
            1 => any::<usize>().prop_map(Op::Flip),
        ],
        1..200,
    )) {
        let mut dsu = ParitySet::new();
        let mut naive = Naive::default();
        let mut n = 0u32;
        for op in ops {
            match op {
                Op::Make => {
                    dsu.make_set(n).unwrap();
                    naive.make_set(n);
                    n += 1;
                }
                Op::Union(a, b) if n > 0 => {
                    let (a, b) = ((a % n as usize) as u32, (b % n as usize) as u32);
                    dsu.union(&a, &b).unwrap();
                    naive.union(a, b);
                }
                Op::Flip(a) if n > 0 => {
                    let a = (a % n as usize) as u32;
                    dsu.change_parity(&a).unwrap();
                    naive.flip(a);
                }
                _ => {}
            }
            prop_assert_eq!(dsu.odd_count(), naive.odd());
            prop_assert_eq!(dsu.set_count(), naive.parity.len());
            prop_assert_eq!(dsu.all_even(), naive.odd() == 0);
        }
        for x in 0..n {
            for y in 0..n {
                prop_assert_eq!(dsu.same_set(&x, &y).unwrap(), naive.label[&x] == naive.label[&y]);
            }
            prop_assert_eq!(dsu.parity(&x).unwrap(), naive.parity[&naive.label[&x]]);
        }
    }

    #[test]
    fn remove_all_takes_whole_sets(sizes in prop::collection::vec(1usize..6, 1..8), pick in any::<usize>()) {
        let mut dsu = ParitySet::new();
        let mut next = 0u32;
        let mut sets = Vec::new();
        for s in &sizes {
            let members: Vec<u32> = (next..next + *s as u32).collect();
            next += *s as u32;
            for m in &members {
                dsu.make_set(*m).unwrap();
                dsu.union(&members[0], m).unwrap();
            }
            sets.push(members);
        }
        let victim = &sets[pick % sets.len()];
        if victim.len() > 1 {
            let err = dsu.remove_all(&victim[1..]).unwrap_err();
            prop_assert!(matches!(err, DsuError::PartialSet(_)));
        }
        let odd_before = dsu.odd_count();
        dsu.remove_all(victim).unwrap();
        let was_odd = victim.len() % 2 == 1;
        prop_assert_eq!(dsu.odd_count(), odd_before - was_odd as usize);
        prop_assert_eq!(dsu.set_count(), sets.len() - 1);
        for m in victim {
            prop_assert!(!dsu.contains(m));
        }
    }
}

#[test]
fn amortized_find_path_length() {
    const N: u32 = 100_000;
    const M: u64 = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut dsu = ParitySet::new();
    for x in 0..N {
        dsu.make_set(x).unwrap();
    }
    for _ in 0..M - N as u64 {
        let a = rng.gen_range(0..N);
        let b = rng.gen_range(0..N);
        match rng.gen_range(0..3) {
            0 => dsu.union(&a, &b).unwrap(),
            1 => drop(dsu.find(&a).unwrap()),
            _ => dsu.change_parity(&a).unwrap(),
        }
    }
    assert_eq!(dsu.op_count(), M);
    assert!(dsu.find_steps() <= 5 * M, "{} find steps for {M} ops", dsu.find_steps());
}
