//! Turing machine to cellular automaton encoding, one update per machine step.
//!
//! Cell states are `Q ⊔ {s> : s ∈ S} ⊔ {<s : s ∈ S} ⊔ {f}`. A configuration is
//! the tape with one extra cell holding the control state: `s>` reads its right
//! neighbour, `<s` its left neighbour. With `φ(s, b) = (d, s', dir)`:
//!
//! ```text
//! a  s> b     right:  a  d   s'>        left:  a  <s' d
//! a  <s c     right:  d  s'> c          left:  <s' d  c
//! ```
//!
//! An undefined rule turns the state cell into `f`; every other cell keeps its
//! value. The blank is the quiescent state and `F = {f}`.

use crate::ca::{CellState, CellularAutomaton, FiniteConfiguration};
use crate::labels::LabelSet;

use super::{Move, TmConfiguration, TmError, TuringMachine};

/// The automaton plus the encoding of configurations.
#[derive(Debug, Clone)]
pub struct TmCa {
    ca: CellularAutomaton,
    num_symbols: u32,
    num_states: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Symbol(u32),
    ReadsRight(u32),
    ReadsLeft(u32),
    Final,
}

impl TmCa {
    pub fn ca(&self) -> &CellularAutomaton {
        &self.ca
    }

    fn decode_cell(&self, c: CellState) -> Cell {
        let (q, s) = (self.num_symbols, self.num_states);
        if c < q {
            Cell::Symbol(c)
        } else if c < q + s {
            Cell::ReadsRight(c - q)
        } else if c < q + 2 * s {
            Cell::ReadsLeft(c - q - s)
        } else {
            Cell::Final
        }
    }

    fn reads_right(&self, s: u32) -> CellState {
        self.num_symbols + s
    }

    fn reads_left(&self, s: u32) -> CellState {
        self.num_symbols + self.num_states + s
    }

    fn final_state(&self) -> CellState {
        self.num_symbols + 2 * self.num_states
    }

    pub fn encode(&self, cfg: &TmConfiguration) -> FiniteConfiguration {
        let mut cells: FiniteConfiguration = cfg.tape.clone();
        cells.insert(cfg.head, self.reads_right(cfg.state));
        cells
    }

    /// The machine configuration, or `None` once `f` appears or the cells do
    /// not hold exactly one control state.
    pub fn decode(&self, cells: &[CellState]) -> Option<TmConfiguration> {
        let mut tape = Vec::with_capacity(cells.len());
        let mut found = None;
        for &c in cells {
            match self.decode_cell(c) {
                Cell::Symbol(q) => tape.push(q),
                Cell::ReadsRight(s) => {
                    if found.replace((tape.len(), s)).is_some() {
                        return None;
                    }
                }
                Cell::ReadsLeft(s) => {
                    if found.is_some() || tape.is_empty() {
                        return None;
                    }
                    found = Some((tape.len() - 1, s));
                }
                Cell::Final => return None,
            }
        }
        let (head, state) = found?;
        Some(TmConfiguration { tape, head, state })
    }
}

/// Builds the automaton; `|T| = |Q| + 2|S| + 1`.
pub fn tm_to_ca(tm: &TuringMachine) -> Result<TmCa, TmError> {
    let mut names: Vec<String> = tm.symbols().names().to_vec();
    names.extend(tm.states().names().iter().map(|s| format!("{s}>")));
    names.extend(tm.states().names().iter().map(|s| format!("<{s}")));
    let mut f = "f".to_string();
    while names.contains(&f) {
        f.push('\'');
    }
    names.push(f);
    let states = LabelSet::new(names)?;
    let mut enc = TmCa {
        ca: CellularAutomaton::from_fn(states.clone(), 0, &[], |_, _, _| 0).expect("trivial rule"),
        num_symbols: tm.num_symbols() as u32,
        num_states: tm.num_states() as u32,
    };
    let fin = enc.final_state();
    let rule = |x: CellState, y: CellState, z: CellState| -> CellState {
        match (enc.decode_cell(x), enc.decode_cell(y), enc.decode_cell(z)) {
            (_, Cell::Final, _) => fin,
            (_, Cell::ReadsRight(s), Cell::Symbol(b)) => match tm.phi(s, b) {
                Some(a) if a.dir == Move::Right => a.write,
                Some(a) => enc.reads_left(a.next),
                None => fin,
            },
            (Cell::Symbol(a), Cell::ReadsLeft(s), _) => match tm.phi(s, a) {
                Some(act) if act.dir == Move::Right => enc.reads_right(act.next),
                Some(act) => act.write,
                None => fin,
            },
            (_, Cell::ReadsRight(_) | Cell::ReadsLeft(_), _) => fin,
            (Cell::ReadsRight(s), Cell::Symbol(b), _) => match tm.phi(s, b) {
                Some(a) if a.dir == Move::Right => enc.reads_right(a.next),
                Some(a) => a.write,
                None => y,
            },
            (_, Cell::Symbol(a), Cell::ReadsLeft(s)) => match tm.phi(s, a) {
                Some(act) if act.dir == Move::Right => act.write,
                Some(act) => enc.reads_left(act.next),
                None => y,
            },
            (_, Cell::Symbol(_), _) => y,
        }
    };
    let blank = tm.blank();
    enc.ca = CellularAutomaton::from_fn(states, blank, &[fin], rule).expect("rule stays in range");
    Ok(enc)
}

#[cfg(test)]
mod tests {
    use super::super::samples::*;
    use super::super::{tm_step, StepResult};
    use super::*;

    fn bisimulate(tm: &TuringMachine, input: &[&str], steps: usize) {
        let enc = tm_to_ca(tm).unwrap();
        let mut cfg = tm.config_from_labels(input).unwrap();
        let mut cells = enc.encode(&cfg);
        for _ in 0..steps {
            cells = enc.ca().update(&cells);
            match tm_step(tm, &cfg).unwrap() {
                StepResult::Next(next) => {
                    let decoded = enc.decode(&cells).expect("decodable");
                    assert!(decoded.same_as(&next, tm.blank()), "{decoded:?} vs {next:?}");
                    cfg = next;
                }
                StepResult::Halted(_) => {
                    assert!(enc.ca().has_final(&cells));
                    return;
                }
            }
        }
    }

    #[test]
    fn state_count() {
        let tm = appender();
        let enc = tm_to_ca(&tm).unwrap();
        assert_eq!(enc.ca().num_states(), 3 + 2 * 2 + 1);
        assert_eq!(enc.ca().state_id("r>").unwrap(), 3);
        assert_eq!(enc.ca().state_id("<l").unwrap(), 6);
    }

    #[test]
    fn fixtures_bisimulate() {
        bisimulate(&unary_eraser(), &["s", "1", "1"], 20);
        bisimulate(&looping(), &["s"], 20);
        bisimulate(&appender(), &["r", "m", "1", "1", "1"], 20);
    }

    #[test]
    fn encode_decode_round_trip() {
        let tm = appender();
        let enc = tm_to_ca(&tm).unwrap();
        let cfg = tm.config_from_labels(&["m", "1", "l", "1"]).unwrap();
        assert_eq!(enc.decode(&enc.encode(&cfg)), Some(cfg));
    }
}
