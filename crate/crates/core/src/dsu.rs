//! Union-find with a parity flag per set.
//!
//! Every set carries a parity bit that is flipped on demand and combined by
//! XOR on union. A running count of odd sets makes "are all sets even" an
//! O(1) query. Sets can also be dropped whole, which the grid structure needs
//! when it rebuilds a component after a deletion.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn xor(self, other: Parity) -> Parity {
        if self == other {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn of_count(n: usize) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DsuError {
    #[error("element {0} is already registered")]
    AlreadyRegistered(String),
    #[error("element {0} is not registered")]
    NotRegistered(String),
    #[error("removal covers only part of the set containing {0}")]
    PartialSet(String),
}

#[derive(Debug, Clone)]
struct Slot<T> {
    key: T,
    parent: usize,
    /// Next member in the set's circular member list.
    next: usize,
    size: usize,
    parity: Parity,
}

#[derive(Debug, Clone)]
pub struct ParitySet<T> {
    index: HashMap<T, usize>,
    slots: Vec<Option<Slot<T>>>,
    free: Vec<usize>,
    odd_count: usize,
    set_count: usize,
    find_steps: u64,
    ops: u64,
}

impl<T> Default for ParitySet<T> {
    fn default() -> Self {
        ParitySet {
            index: HashMap::new(),
            slots: Vec::new(),
            free: Vec::new(),
            odd_count: 0,
            set_count: 0,
            find_steps: 0,
            ops: 0,
        }
    }
}

impl<T: Clone + Eq + Hash + Debug> ParitySet<T> {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&self, i: usize) -> &Slot<T> {
        self.slots[i].as_ref().expect("live slot")
    }

    fn slot_mut(&mut self, i: usize) -> &mut Slot<T> {
        self.slots[i].as_mut().expect("live slot")
    }

    fn lookup(&self, x: &T) -> Result<usize, DsuError> {
        self.index
            .get(x)
            .copied()
            .ok_or_else(|| DsuError::NotRegistered(format!("{x:?}")))
    }

    /// Registers `x` as a new singleton set of odd parity.
    pub fn make_set(&mut self, x: T) -> Result<(), DsuError> {
        if self.index.contains_key(&x) {
            return Err(DsuError::AlreadyRegistered(format!("{x:?}")));
        }
        self.ops += 1;
        let i = self.free.pop().unwrap_or(self.slots.len());
        let slot = Slot {
            key: x.clone(),
            parent: i,
            next: i,
            size: 1,
            parity: Parity::Odd,
        };
        if i == self.slots.len() {
            self.slots.push(Some(slot));
        } else {
            self.slots[i] = Some(slot);
        }
        self.index.insert(x, i);
        self.odd_count += 1;
        self.set_count += 1;
        Ok(())
    }

    fn root_of(&mut self, mut i: usize) -> usize {
        let start = i;
        while self.slot(i).parent != i {
            i = self.slot(i).parent;
            self.find_steps += 1;
        }
        let root = i;
        let mut j = start;
        while j != root {
            let next = self.slot(j).parent;
            self.slot_mut(j).parent = root;
            j = next;
        }
        root
    }

    /// Representative of the set containing `x`.
    pub fn find(&mut self, x: &T) -> Result<T, DsuError> {
        self.ops += 1;
        let i = self.lookup(x)?;
        let r = self.root_of(i);
        Ok(self.slot(r).key.clone())
    }

    pub fn same_set(&mut self, x: &T, y: &T) -> Result<bool, DsuError> {
        let (i, j) = (self.lookup(x)?, self.lookup(y)?);
        Ok(self.root_of(i) == self.root_of(j))
    }

    /// Merges the sets of `x` and `y`. The larger set's representative
    /// survives; on equal sizes, `x`'s does.
    pub fn union(&mut self, x: &T, y: &T) -> Result<(), DsuError> {
        self.ops += 1;
        let (i, j) = (self.lookup(x)?, self.lookup(y)?);
        let (mut a, mut b) = (self.root_of(i), self.root_of(j));
        if a == b {
            return Ok(());
        }
        if self.slot(a).size < self.slot(b).size {
            std::mem::swap(&mut a, &mut b);
        }
        let (pa, pb) = (self.slot(a).parity, self.slot(b).parity);
        let merged = pa.xor(pb);
        self.odd_count -= [pa, pb].iter().filter(|p| **p == Parity::Odd).count();
        if merged == Parity::Odd {
            self.odd_count += 1;
        }
        self.set_count -= 1;
        let size_b = self.slot(b).size;
        // splice the two circular member lists
        let next_a = self.slot(a).next;
        let next_b = self.slot(b).next;
        self.slot_mut(a).next = next_b;
        self.slot_mut(b).next = next_a;
        self.slot_mut(b).parent = a;
        let ra = self.slot_mut(a);
        ra.size += size_b;
        ra.parity = merged;
        Ok(())
    }

    pub fn change_parity(&mut self, x: &T) -> Result<(), DsuError> {
        self.ops += 1;
        let i = self.lookup(x)?;
        let r = self.root_of(i);
        let slot = self.slot_mut(r);
        slot.parity = slot.parity.flip();
        match slot.parity {
            Parity::Odd => self.odd_count += 1,
            Parity::Even => self.odd_count -= 1,
        }
        Ok(())
    }

    pub fn parity(&mut self, x: &T) -> Result<Parity, DsuError> {
        let i = self.lookup(x)?;
        let r = self.root_of(i);
        Ok(self.slot(r).parity)
    }

    /// Every member of the set containing `x`.
    pub fn members(&self, x: &T) -> Result<Vec<T>, DsuError> {
        let start = self.lookup(x)?;
        let mut out = vec![self.slot(start).key.clone()];
        let mut i = self.slot(start).next;
        while i != start {
            out.push(self.slot(i).key.clone());
            i = self.slot(i).next;
        }
        Ok(out)
    }

    pub fn all_even(&self) -> bool {
        self.odd_count == 0
    }

    pub fn odd_count(&self) -> usize {
        self.odd_count
    }

    pub fn set_count(&self) -> usize {
        self.set_count
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.index.contains_key(x)
    }

    /// Parent-pointer hops taken by all finds so far.
    pub fn find_steps(&self) -> u64 {
        self.find_steps
    }

    /// Number of make_set, find, union and change_parity calls so far.
    pub fn op_count(&self) -> u64 {
        self.ops
    }

    /// Deregisters whole sets. Fails without changing anything if `elements`
    /// contains an unregistered element or only part of some set.
    pub fn remove_all(&mut self, elements: &[T]) -> Result<(), DsuError> {
        let mut per_root: HashMap<usize, usize> = HashMap::new();
        let mut seen = std::collections::HashSet::with_capacity(elements.len());
        for x in elements {
            let i = self.lookup(x)?;
            if seen.insert(i) {
                let r = self.root_of(i);
                *per_root.entry(r).or_default() += 1;
            }
        }
        for (&r, &n) in &per_root {
            if self.slot(r).size != n {
                return Err(DsuError::PartialSet(format!("{:?}", self.slot(r).key)));
            }
        }
        for &r in per_root.keys() {
            if self.slot(r).parity == Parity::Odd {
                self.odd_count -= 1;
            }
            self.set_count -= 1;
        }
        for i in seen {
            let slot = self.slots[i].take().expect("live slot");
            self.index.remove(&slot.key);
            self.free.push(i);
        }
        Ok(())
    }

    /// All sets as (representative, parity, members), for audits.
    pub fn sets(&mut self) -> Vec<(T, Parity, Vec<T>)> {
        let mut roots: Vec<usize> = Vec::new();
        for i in 0..self.slots.len() {
            if self.slots[i].as_ref().is_some_and(|s| s.parent == i) {
                roots.push(i);
            }
        }
        roots
            .into_iter()
            .map(|r| {
                let s = self.slot(r);
                let key = s.key.clone();
                let parity = s.parity;
                let members = self.members(&key).expect("registered root");
                (key, parity, members)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_set_is_odd() {
        let mut d = ParitySet::new();
        d.make_set('a').unwrap();
        assert_eq!(d.parity(&'a').unwrap(), Parity::Odd);
        assert_eq!(d.odd_count(), 1);
        d.make_set('b').unwrap();
        assert_eq!(d.odd_count(), 2);
        assert!(matches!(d.make_set('a'), Err(DsuError::AlreadyRegistered(_))));
    }

    #[test]
    fn union_xors_parity() {
        let mut d = ParitySet::new();
        for c in ['a', 'b', 'c'] {
            d.make_set(c).unwrap();
        }
        d.union(&'a', &'b').unwrap();
        assert_eq!(d.parity(&'a').unwrap(), Parity::Even);
        assert_eq!(d.odd_count(), 1);
        assert_eq!(d.find(&'a').unwrap(), d.find(&'b').unwrap());
        assert_ne!(d.find(&'a').unwrap(), d.find(&'c').unwrap());
        assert_eq!(d.find(&'c').unwrap(), 'c');
        d.union(&'a', &'c').unwrap();
        assert_eq!(d.parity(&'c').unwrap(), Parity::Odd);
        assert_eq!(d.odd_count(), 1);
        assert_eq!(d.set_count(), 1);
        d.union(&'a', &'a').unwrap();
        assert_eq!(d.odd_count(), 1);
        assert_eq!(d.set_count(), 1);
    }

    #[test]
    fn union_tie_keeps_first_representative() {
        let mut d = ParitySet::new();
        d.make_set(1).unwrap();
        d.make_set(2).unwrap();
        d.union(&2, &1).unwrap();
        assert_eq!(d.find(&1).unwrap(), 2);
        d.make_set(3).unwrap();
        d.union(&3, &1).unwrap();
        assert_eq!(d.find(&3).unwrap(), 2);
    }

    #[test]
    fn unregistered_elements_are_rejected() {
        let mut d: ParitySet<u32> = ParitySet::new();
        d.make_set(1).unwrap();
        assert!(matches!(d.find(&9), Err(DsuError::NotRegistered(_))));
        assert!(matches!(d.union(&1, &9), Err(DsuError::NotRegistered(_))));
        assert!(matches!(d.change_parity(&9), Err(DsuError::NotRegistered(_))));
    }

    #[test]
    fn change_parity_flips() {
        let mut d = ParitySet::new();
        d.make_set('a').unwrap();
        d.change_parity(&'a').unwrap();
        assert_eq!(d.parity(&'a').unwrap(), Parity::Even);
        assert_eq!(d.odd_count(), 0);
        d.change_parity(&'a').unwrap();
        assert_eq!(d.parity(&'a').unwrap(), Parity::Odd);
        d.make_set('b').unwrap();
        d.union(&'a', &'b').unwrap();
        d.change_parity(&'b').unwrap();
        assert_eq!(d.parity(&'a').unwrap(), Parity::Odd);
    }

    #[test]
    fn all_even_and_remove_all() {
        let mut d = ParitySet::new();
        for c in ['a', 'b', 'c', 'd', 'e'] {
            d.make_set(c).unwrap();
        }
        d.union(&'a', &'b').unwrap();
        d.union(&'c', &'d').unwrap();
        assert!(!d.all_even());
        assert!(matches!(d.remove_all(&['a']), Err(DsuError::PartialSet(_))));
        assert_eq!(d.len(), 5);
        d.remove_all(&['e']).unwrap();
        assert!(d.all_even());
        assert_eq!(d.set_count(), 2);
        assert!(!d.contains(&'e'));
        d.remove_all(&['b', 'a', 'c', 'd']).unwrap();
        assert!(d.is_empty());
        assert_eq!(d.set_count(), 0);
        d.make_set('a').unwrap();
        assert_eq!(d.members(&'a').unwrap(), vec!['a']);
    }

    #[test]
    fn members_follow_unions() {
        let mut d = ParitySet::new();
        for i in 0..6 {
            d.make_set(i).unwrap();
        }
        d.union(&0, &1).unwrap();
        d.union(&2, &3).unwrap();
        d.union(&1, &3).unwrap();
        let mut m = d.members(&2).unwrap();
        m.sort();
        assert_eq!(m, vec![0, 1, 2, 3]);
        assert_eq!(d.members(&5).unwrap(), vec![5]);
    }
}
