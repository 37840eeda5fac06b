//! Turing machines on a one-way infinite tape.
//!
//! A configuration is a tape, a head position and a control state; the head
//! reads `tape[head]`, and cells beyond the stored tape are blank. As a word
//! over `S ⊔ Q` it is written `q_1 ... q_h s q_{h+1} ...`: the state stands
//! immediately left of the cell it reads.

pub mod mealy;
pub mod smith;

use thiserror::Error;

use crate::labels::{LabelError, LabelSet};

pub type ControlState = u32;
pub type TapeSymbol = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmError {
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("label `{0}` is both a state and a tape symbol")]
    Clash(String),
    #[error("unknown control state `{0}`")]
    UnknownState(String),
    #[error("unknown tape symbol `{0}`")]
    UnknownSymbol(String),
    #[error("conflicting rules for ({state}, {symbol})")]
    Conflict { state: String, symbol: String },
    #[error("malformed configuration: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Left,
    Right,
}

/// Right-hand side of a rule `φ(s, q) = (write, next, dir)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub write: TapeSymbol,
    pub next: ControlState,
    pub dir: Move,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuringMachine {
    states: LabelSet,
    symbols: LabelSet,
    initial: ControlState,
    blank: TapeSymbol,
    rules: Vec<Option<Action>>,
}

impl TuringMachine {
    /// A machine with no rules yet; state and symbol labels must be disjoint.
    pub fn new(states: LabelSet, symbols: LabelSet, initial: ControlState, blank: TapeSymbol) -> Result<Self, TmError> {
        if let Some((_, clash)) = states.iter().find(|(_, s)| symbols.contains(s)) {
            return Err(TmError::Clash(clash.to_string()));
        }
        if initial as usize >= states.len() || blank as usize >= symbols.len() {
            return Err(TmError::Malformed("initial state or blank out of range".into()));
        }
        let n = states.len() * symbols.len();
        Ok(Self {
            states,
            symbols,
            initial,
            blank,
            rules: vec![None; n],
        })
    }

    /// Adds `φ(s, q) = action`; a different existing rule is a conflict.
    pub fn set_rule(&mut self, s: ControlState, q: TapeSymbol, action: Action) -> Result<(), TmError> {
        let i = self.index(s, q);
        if self.rules[i].is_some_and(|a| a != action) {
            return Err(TmError::Conflict {
                state: self.state_name(s).to_string(),
                symbol: self.symbol_name(q).to_string(),
            });
        }
        self.rules[i] = Some(action);
        Ok(())
    }

    fn index(&self, s: ControlState, q: TapeSymbol) -> usize {
        s as usize * self.symbols.len() + q as usize
    }

    pub fn phi(&self, s: ControlState, q: TapeSymbol) -> Option<Action> {
        self.rules[self.index(s, q)]
    }

    pub fn states(&self) -> &LabelSet {
        &self.states
    }

    pub fn symbols(&self) -> &LabelSet {
        &self.symbols
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_symbols(&self) -> usize {
        self.symbols.len()
    }

    pub fn initial(&self) -> ControlState {
        self.initial
    }

    pub fn blank(&self) -> TapeSymbol {
        self.blank
    }

    pub fn state_name(&self, s: ControlState) -> &str {
        self.states.name(s as usize)
    }

    pub fn symbol_name(&self, q: TapeSymbol) -> &str {
        self.symbols.name(q as usize)
    }

    /// All defined rules as `(s, q, action)`.
    pub fn rules(&self) -> impl Iterator<Item = (ControlState, TapeSymbol, Action)> + '_ {
        let k = self.symbols.len();
        self.rules
            .iter()
            .enumerate()
            .filter_map(move |(i, a)| a.map(|a| ((i / k) as ControlState, (i % k) as TapeSymbol, a)))
    }

    /// Parses a word over `S ⊔ Q` with exactly one control state.
    pub fn config_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<TmConfiguration, TmError> {
        let mut tape = Vec::new();
        let mut found = None;
        for label in labels {
            let label = label.as_ref();
            if let Some(q) = self.symbols.get(label) {
                tape.push(q as TapeSymbol);
            } else if let Some(s) = self.states.get(label) {
                if found.replace((tape.len(), s as ControlState)).is_some() {
                    return Err(TmError::Malformed("more than one control state".into()));
                }
            } else {
                return Err(TmError::UnknownSymbol(label.to_string()));
            }
        }
        let (head, state) = found.ok_or_else(|| TmError::Malformed("no control state".into()))?;
        Ok(TmConfiguration { tape, head, state })
    }

    pub fn config_labels(&self, cfg: &TmConfiguration) -> Vec<String> {
        let mut out: Vec<String> = cfg.tape.iter().map(|&q| self.symbol_name(q).to_string()).collect();
        out.insert(cfg.head.min(out.len()), self.state_name(cfg.state).to_string());
        out
    }

    pub fn check_config(&self, cfg: &TmConfiguration) -> Result<(), TmError> {
        if cfg.state as usize >= self.states.len() {
            return Err(TmError::Malformed(format!("state index {} out of range", cfg.state)));
        }
        if let Some(q) = cfg.tape.iter().find(|&&q| q as usize >= self.symbols.len()) {
            return Err(TmError::Malformed(format!("symbol index {q} out of range")));
        }
        if cfg.head > cfg.tape.len() {
            return Err(TmError::Malformed("head beyond the end of the tape".into()));
        }
        Ok(())
    }
}

/// Tape contents, head position and control state. `head` may equal
/// `tape.len()`, in which case the head reads a blank.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TmConfiguration {
    pub tape: Vec<TapeSymbol>,
    pub head: usize,
    pub state: ControlState,
}

impl TmConfiguration {
    pub fn read(&self, blank: TapeSymbol) -> TapeSymbol {
        self.tape.get(self.head).copied().unwrap_or(blank)
    }

    /// Equality up to trailing blanks.
    pub fn same_as(&self, other: &TmConfiguration, blank: TapeSymbol) -> bool {
        let trim = |t: &[TapeSymbol]| {
            let n = t.len() - t.iter().rev().take_while(|&&q| q == blank).count();
            t[..n].to_vec()
        };
        self.head == other.head && self.state == other.state && trim(&self.tape) == trim(&other.tape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    /// No rule for the current state and symbol.
    NoRule,
    /// A rule would move the head off the left end of the tape.
    LeftEdge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(TmConfiguration),
    Halted(HaltReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TmRunOutcome {
    HaltsAfter { steps: usize, reason: HaltReason },
    RunningAt(usize),
}

pub fn tm_step(tm: &TuringMachine, cfg: &TmConfiguration) -> Result<StepResult, TmError> {
    tm.check_config(cfg)?;
    let Some(action) = tm.phi(cfg.state, cfg.read(tm.blank())) else {
        return Ok(StepResult::Halted(HaltReason::NoRule));
    };
    if action.dir == Move::Left && cfg.head == 0 {
        return Ok(StepResult::Halted(HaltReason::LeftEdge));
    }
    let mut next = cfg.clone();
    if next.head == next.tape.len() {
        next.tape.push(tm.blank());
    }
    next.tape[next.head] = action.write;
    next.state = action.next;
    match action.dir {
        Move::Left => next.head -= 1,
        Move::Right => next.head += 1,
    }
    Ok(StepResult::Next(next))
}

/// Runs up to `max_steps` steps; returns the outcome and the last configuration.
pub fn tm_run(
    tm: &TuringMachine,
    cfg: &TmConfiguration,
    max_steps: usize,
) -> Result<(TmRunOutcome, TmConfiguration), TmError> {
    let mut current = cfg.clone();
    for steps in 0..=max_steps {
        match tm_step(tm, &current)? {
            StepResult::Halted(reason) => return Ok((TmRunOutcome::HaltsAfter { steps, reason }, current)),
            StepResult::Next(next) if steps < max_steps => current = next,
            StepResult::Next(_) => break,
        }
    }
    Ok((TmRunOutcome::RunningAt(max_steps), current))
}

/// Small machines used in examples and tests.
pub mod samples {
    use super::*;

    fn machine(states: &[&str], symbols: &[&str], rules: &[(&str, &str, &str, &str, Move)]) -> TuringMachine {
        let states = LabelSet::new(states.iter().copied()).expect("distinct states");
        let symbols = LabelSet::new(symbols.iter().copied()).expect("distinct symbols");
        let mut tm = TuringMachine::new(states, symbols, 0, 0).expect("valid machine");
        for &(s, q, next, write, dir) in rules {
            let s = tm.states().get(s).expect("state") as ControlState;
            let q = tm.symbols().get(q).expect("symbol") as TapeSymbol;
            let next = tm.states().get(next).expect("state") as ControlState;
            let write = tm.symbols().get(write).expect("symbol") as TapeSymbol;
            tm.set_rule(s, q, Action { write, next, dir }).expect("no conflict");
        }
        tm
    }

    /// Erases a block of `1`s moving right; halts on the first blank.
    pub fn unary_eraser() -> TuringMachine {
        machine(&["s"], &["q0", "1"], &[("s", "1", "s", "q0", Move::Right)])
    }

    /// Moves right forever.
    pub fn looping() -> TuringMachine {
        machine(&["s"], &["q0"], &[("s", "q0", "s", "q0", Move::Right)])
    }

    /// Walks right over `1`s, appends a `1` at the first blank, walks back
    /// left and halts on the marker `m`.
    pub fn appender() -> TuringMachine {
        machine(
            &["r", "l"],
            &["q0", "1", "m"],
            &[
                ("r", "m", "r", "m", Move::Right),
                ("r", "1", "r", "1", Move::Right),
                ("r", "q0", "l", "1", Move::Left),
                ("l", "1", "l", "1", Move::Left),
            ],
        )
    }
}
