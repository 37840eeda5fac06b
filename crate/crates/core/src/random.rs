//! Seedable random machines for property tests and oracle runs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::labels::LabelSet;
use crate::mealy::{MealyMachine, StateId};

/// An invertible machine with states `a0, a1, ...` and letters `0, 1, ...`;
/// every state permutes the alphabet uniformly and moves to uniform targets.
pub fn random_invertible<R: Rng + ?Sized>(rng: &mut R, states: usize, letters: usize) -> MealyMachine {
    let state_labels = LabelSet::new((0..states).map(|i| format!("a{i}"))).expect("distinct labels");
    let letter_labels = LabelSet::new((0..letters).map(|i| i.to_string())).expect("distinct labels");
    let mut perms = Vec::with_capacity(states);
    let mut targets = Vec::with_capacity(states * letters);
    for _ in 0..states {
        let mut p: Vec<u32> = (0..letters as u32).collect();
        p.shuffle(rng);
        perms.push(p);
        for _ in 0..letters {
            targets.push(rng.gen_range(0..states) as StateId);
        }
    }
    MealyMachine::from_fn(state_labels, letter_labels, |p, x| {
        (targets[p * letters + x] as usize, perms[p][x] as usize)
    })
    .expect("total machine")
}

/// A uniform word of length `len` over `n` states.
pub fn random_word<R: Rng + ?Sized>(rng: &mut R, n: usize, len: usize) -> Vec<StateId> {
    (0..len).map(|_| rng.gen_range(0..n) as StateId).collect()
}
