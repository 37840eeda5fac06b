//! Minimal automata of group elements.
//!
//! The automaton of a word is built by composing automata of its factors,
//! keeping only pairs reachable from the start and merging equivalent states
//! after every product. Sizes then track distinct elements among residuals
//! rather than distinct words.

use std::collections::VecDeque;
use std::hash::{BuildHasher, Hash, Hasher};

use hashbrown::HashTable;
use indexmap::IndexSet;
use rustc_hash::FxBuildHasher;

use crate::mealy::{LetterId, LetterWord, MealyMachine, StateId};

/// A Mealy automaton over `k` letters with a start state; tables are indexed
/// by `state * k + letter`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ElementAutomaton {
    k: usize,
    out: Vec<LetterId>,
    next: Vec<u32>,
    start: u32,
}

/// A minimal automaton, or the product size that exceeded the cap.
pub(crate) type Composed = Result<ElementAutomaton, usize>;

impl ElementAutomaton {
    pub(crate) fn identity(k: usize) -> Self {
        Self {
            k,
            out: (0..k as LetterId).collect(),
            next: vec![0; k],
            start: 0,
        }
    }

    pub(crate) fn num_states(&self) -> usize {
        self.out.len() / self.k
    }

    /// `self` followed by the state `p` of `m`.
    pub(crate) fn then_state(&self, m: &MealyMachine, p: StateId, cap: usize) -> Composed {
        self.product(p, |q, y| m.step(q, y), cap)
    }

    fn product<F>(&self, start: u32, step: F, cap: usize) -> Composed
    where
        F: Fn(u32, LetterId) -> (LetterId, u32),
    {
        let k = self.k;
        let mut pairs: IndexSet<(u32, u32), FxBuildHasher> = IndexSet::default();
        pairs.insert((self.start, start));
        let mut out = Vec::new();
        let mut next = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let (u, v) = pairs[i];
            for x in 0..k {
                let at = u as usize * k + x;
                let (z, v2) = step(v, self.out[at]);
                let (j, _) = pairs.insert_full((self.next[at], v2));
                out.push(z);
                next.push(j as u32);
            }
            if pairs.len() > cap {
                return Err(pairs.len());
            }
            i += 1;
        }
        Ok(minimize(k, out, next))
    }

    /// Shortest, lexicographically first input moved by the element, with
    /// the number of letters read before the move shows.
    pub(crate) fn witness(&self) -> Option<(LetterWord, usize)> {
        let k = self.k;
        let n = self.num_states();
        let mut parent: Vec<Option<(u32, LetterId)>> = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut queue = VecDeque::from([self.start]);
        depth[self.start as usize] = 0;
        while let Some(s) = queue.pop_front() {
            let row = s as usize * k;
            if let Some(x) = (0..k).find(|&x| self.out[row + x] as usize != x) {
                let mut path = vec![x as LetterId];
                let mut at = s;
                while let Some((from, letter)) = parent[at as usize] {
                    path.push(letter);
                    at = from;
                }
                path.reverse();
                return Some((path, depth[s as usize]));
            }
            for x in 0..k {
                let t = self.next[row + x] as usize;
                if depth[t] == usize::MAX {
                    depth[t] = depth[s as usize] + 1;
                    parent[t] = Some((s, x as LetterId));
                    queue.push_back(t as u32);
                }
            }
        }
        None
    }
}

/// Moore partition refinement of an automaton whose start is state 0. Class
/// ids follow first occurrence, so the result does not depend on hashing.
fn minimize(k: usize, out: Vec<LetterId>, next: Vec<u32>) -> ElementAutomaton {
    let n = out.len() / k;
    let row = |s: usize| s * k..(s + 1) * k;
    let mut class = vec![0u32; n];
    let mut count = refine(
        &mut class,
        |s| FxBuildHasher.hash_one(&out[row(s)]),
        |a, b| out[row(a)] == out[row(b)],
    );
    let mut prev = vec![0u32; n];
    loop {
        prev.copy_from_slice(&class);
        let succ = |s: usize| next[row(s)].iter().map(|&t| prev[t as usize]);
        let refined = refine(
            &mut class,
            |s| {
                let mut h = FxBuildHasher.build_hasher();
                prev[s].hash(&mut h);
                succ(s).for_each(|c| c.hash(&mut h));
                h.finish()
            },
            |a, b| prev[a] == prev[b] && succ(a).eq(succ(b)),
        );
        if refined == count {
            break;
        }
        count = refined;
    }
    let mut min_out = vec![0; count * k];
    let mut min_next = vec![0; count * k];
    for s in 0..n {
        let c = class[s] as usize;
        for x in 0..k {
            min_out[c * k + x] = out[s * k + x];
            min_next[c * k + x] = class[next[s * k + x] as usize];
        }
    }
    ElementAutomaton {
        k,
        out: min_out,
        next: min_next,
        start: class[0],
    }
}

/// Numbers states by an equivalence given as a hash and an equality on
/// state ids, in order of first occurrence; returns the number of classes.
fn refine(class: &mut [u32], hash: impl Fn(usize) -> u64, eq: impl Fn(usize, usize) -> bool) -> usize {
    let n = class.len();
    // Holds the first state of each class.
    let mut table: HashTable<u32> = HashTable::with_capacity(n / 2);
    for s in 0..n {
        let h = hash(s);
        match table.find(h, |&r| eq(r as usize, s)) {
            Some(&r) => class[s] = class[r as usize],
            None => {
                class[s] = table.len() as u32;
                table.insert_unique(h, s as u32, |&r| hash(r as usize));
            }
        }
    }
    table.len()
}
