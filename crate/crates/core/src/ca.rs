//! One-dimensional cellular automata with neighbourhood {-1, 0, 1} acting on
//! finite configurations.
//!
//! A finite configuration `a1 ... an` stands for the line that is `e`
//! everywhere else. One update pads with `e` on both sides and returns the
//! `n + 1` cells `b_k = t(a_{k-1}, a_k, a_{k+1})` for `k = 1..=n+1`.

use thiserror::Error;

use crate::labels::{LabelError, LabelSet};

pub type CellState = u32;

/// A finite word over the automaton's states.
pub type FiniteConfiguration = Vec<CellState>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CaError {
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("unknown cell state `{0}`")]
    UnknownState(String),
    #[error("rule is not complete: no entry for ({x}, {y}, {z})")]
    Incomplete { x: String, y: String, z: String },
    #[error("conflicting rules for ({x}, {y}, {z})")]
    Conflict { x: String, y: String, z: String },
    #[error("cell state index {0} out of range")]
    OutOfRange(CellState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Least `k` such that a final state occurs in the `k`-th configuration.
    HaltsAfter(usize),
    NoHaltWithin(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularAutomaton {
    states: LabelSet,
    rule: Vec<CellState>,
    default: CellState,
    finals: Vec<bool>,
}

impl CellularAutomaton {
    /// Builds a complete automaton from a total rule.
    pub fn from_fn<F>(states: LabelSet, default: CellState, finals: &[CellState], mut rule: F) -> Result<Self, CaError>
    where
        F: FnMut(CellState, CellState, CellState) -> CellState,
    {
        let n = states.len() as CellState;
        let mut table = Vec::with_capacity((n * n * n) as usize);
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let w = rule(x, y, z);
                    if w >= n {
                        return Err(CaError::OutOfRange(w));
                    }
                    table.push(w);
                }
            }
        }
        Self::from_parts(states, default, finals, table)
    }

    fn from_parts(
        states: LabelSet,
        default: CellState,
        finals: &[CellState],
        rule: Vec<CellState>,
    ) -> Result<Self, CaError> {
        let n = states.len();
        if default as usize >= n {
            return Err(CaError::OutOfRange(default));
        }
        let mut flags = vec![false; n];
        for &f in finals {
            *flags.get_mut(f as usize).ok_or(CaError::OutOfRange(f))? = true;
        }
        Ok(Self {
            states,
            rule,
            default,
            finals: flags,
        })
    }

    pub fn states(&self) -> &LabelSet {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// The quiescent state `e`.
    pub fn default_state(&self) -> CellState {
        self.default
    }

    pub fn is_final(&self, s: CellState) -> bool {
        self.finals[s as usize]
    }

    pub fn finals(&self) -> impl Iterator<Item = CellState> + '_ {
        self.finals
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(i, _)| i as CellState)
    }

    pub fn name(&self, s: CellState) -> &str {
        self.states.name(s as usize)
    }

    pub fn state_id(&self, label: &str) -> Result<CellState, CaError> {
        self.states
            .get(label)
            .map(|i| i as CellState)
            .ok_or_else(|| CaError::UnknownState(label.to_string()))
    }

    pub fn config_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<FiniteConfiguration, CaError> {
        labels.iter().map(|l| self.state_id(l.as_ref())).collect()
    }

    pub fn config_labels(&self, a: &[CellState]) -> Vec<&str> {
        a.iter().map(|&s| self.name(s)).collect()
    }

    pub fn check_config(&self, a: &[CellState]) -> Result<(), CaError> {
        match a.iter().find(|&&s| s as usize >= self.states.len()) {
            Some(&s) => Err(CaError::OutOfRange(s)),
            None => Ok(()),
        }
    }

    /// The local rule `t(x, y, z)`.
    #[inline]
    pub fn t(&self, x: CellState, y: CellState, z: CellState) -> CellState {
        let n = self.states.len();
        self.rule[(x as usize * n + y as usize) * n + z as usize]
    }

    pub fn has_final(&self, a: &[CellState]) -> bool {
        a.iter().any(|&s| self.is_final(s))
    }

    /// One step `τ`; the result has one more cell than `a`.
    pub fn update(&self, a: &[CellState]) -> FiniteConfiguration {
        let e = self.default;
        let at = |i: usize| if i >= 1 && i <= a.len() { a[i - 1] } else { e };
        (1..=a.len() + 1).map(|k| self.t(at(k - 1), at(k), at(k + 1))).collect()
    }

    /// Looks for a final state in `τ^k(a)` for `k = 0..=max_steps`.
    pub fn run(&self, a: &[CellState], max_steps: usize) -> RunOutcome {
        let mut current = a.to_vec();
        for k in 0..=max_steps {
            if self.has_final(&current) {
                return RunOutcome::HaltsAfter(k);
            }
            if k < max_steps {
                current = self.update(&current);
            }
        }
        RunOutcome::NoHaltWithin(max_steps)
    }

    /// `[a, τ(a), ..., τ^k(a)]`.
    pub fn trajectory(&self, a: &[CellState], k: usize) -> Vec<FiniteConfiguration> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(a.to_vec());
        for _ in 0..k {
            let next = self.update(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }
}

/// Fills a rule table from labelled entries; used by the text parser.
#[derive(Debug, Clone)]
pub struct CaBuilder {
    states: LabelSet,
    rule: Vec<Option<CellState>>,
    conflicts: Vec<(CellState, CellState, CellState)>,
}

impl CaBuilder {
    pub fn new(states: LabelSet) -> Self {
        let n = states.len();
        Self {
            states,
            rule: vec![None; n * n * n],
            conflicts: Vec::new(),
        }
    }

    pub fn states(&self) -> &LabelSet {
        &self.states
    }

    pub fn set(&mut self, x: CellState, y: CellState, z: CellState, w: CellState) {
        let n = self.states.len();
        let slot = &mut self.rule[(x as usize * n + y as usize) * n + z as usize];
        if slot.is_some_and(|prev| prev != w) {
            self.conflicts.push((x, y, z));
        }
        *slot = Some(w);
    }

    pub fn build(self, default: CellState, finals: &[CellState]) -> Result<CellularAutomaton, CaError> {
        let n = self.states.len();
        let name = |i: CellState| self.states.name(i as usize).to_string();
        if let Some(&(x, y, z)) = self.conflicts.first() {
            return Err(CaError::Conflict {
                x: name(x),
                y: name(y),
                z: name(z),
            });
        }
        let mut table = Vec::with_capacity(self.rule.len());
        for (i, entry) in self.rule.iter().enumerate() {
            match entry {
                Some(w) => table.push(*w),
                None => {
                    let (x, y, z) = (i / (n * n), i / n % n, i % n);
                    return Err(CaError::Incomplete {
                        x: name(x as CellState),
                        y: name(y as CellState),
                        z: name(z as CellState),
                    });
                }
            }
        }
        CellularAutomaton::from_parts(self.states, default, finals, table)
    }
}

/// Small automata used in examples and tests.
pub mod samples {
    use super::*;

    /// States `e, c0, ..., c_m, f`; every cell counts down independently:
    /// `c_i -> c_{i-1}`, `c0 -> f`, while `e` and `f` are fixed. `F = {f}`.
    pub fn timer(m: usize) -> CellularAutomaton {
        let mut names = vec!["e".to_string()];
        names.extend((0..=m).map(|i| format!("c{i}")));
        names.push("f".to_string());
        let f = (m + 2) as CellState;
        let states = LabelSet::new(names).expect("distinct labels");
        CellularAutomaton::from_fn(states, 0, &[f], |_, y, _| match y {
            0 => 0,
            1 => f,
            y if y == f => f,
            y => y - 1,
        })
        .expect("total rule")
    }

    /// States `e, s`; every cell copies its left neighbour. `F = {s}`.
    pub fn shift() -> CellularAutomaton {
        let states = LabelSet::new(["e", "s"]).expect("distinct labels");
        CellularAutomaton::from_fn(states, 0, &[1], |x, _, _| x).expect("total rule")
    }
}

#[cfg(test)]
mod tests {
    use super::samples::{shift, timer};
    use super::*;

    fn cfg(ca: &CellularAutomaton, s: &str) -> FiniteConfiguration {
        ca.config_from_labels(&s.split_whitespace().collect::<Vec<_>>())
            .unwrap()
    }

    #[test]
    fn timer_update_counts_down() {
        let ca = timer(3);
        assert_eq!(ca.update(&cfg(&ca, "c2")), cfg(&ca, "c1 e"));
        assert_eq!(ca.update(&cfg(&ca, "c0")), cfg(&ca, "f e"));
        assert_eq!(ca.update(&[]), vec![ca.t(0, 0, 0)]);
    }

    #[test]
    fn timer_halts_after_k_plus_one() {
        let ca = timer(4);
        for k in 0..=4 {
            let a = cfg(&ca, &format!("c{k}"));
            assert_eq!(ca.run(&a, 10), RunOutcome::HaltsAfter(k + 1));
        }
        assert_eq!(ca.run(&cfg(&ca, "e f"), 0), RunOutcome::HaltsAfter(0));
        assert_eq!(ca.run(&cfg(&ca, "c4"), 3), RunOutcome::NoHaltWithin(3));
    }

    #[test]
    fn trajectory_lengths() {
        let ca = timer(1);
        let traj = ca.trajectory(&cfg(&ca, "c1"), 2);
        assert_eq!(traj, vec![cfg(&ca, "c1"), cfg(&ca, "c0 e"), cfg(&ca, "f e e")]);
        assert_eq!(ca.trajectory(&[], 0), vec![Vec::<CellState>::new()]);
    }

    #[test]
    fn shift_from_blank_never_halts() {
        let ca = shift();
        assert_eq!(ca.run(&[0], 50), RunOutcome::NoHaltWithin(50));
        assert_eq!(ca.update(&[1, 0]), vec![0, 1, 0]);
    }

    #[test]
    fn builder_reports_missing_entries() {
        let mut b = CaBuilder::new(LabelSet::new(["e", "f"]).unwrap());
        b.set(0, 0, 0, 0);
        let err = b.build(0, &[1]).unwrap_err();
        assert_eq!(
            err,
            CaError::Incomplete {
                x: "e".into(),
                y: "e".into(),
                z: "f".into()
            }
        );
    }
}
