//! Direct compilation of a Turing machine into a Mealy machine.
//!
//! Symbols are `T = Q ⊔ S` plus `$`; letters are `(u, ε)`. Inside this module a
//! machine configuration is the word `q_1 ... q_k s q_{k+1} ... q_n` in which
//! the state reads the cell on its *left* (`q_k`); [`element_for_tm_config`]
//! converts from [`TmConfiguration`], whose state reads the cell on its right.
//!
//! States are `neg`, `C^$`, `W`, `C_u^v` for `(u, v) ∈ Q×S ∪ Q×Q ∪ S×Q`, `P_u`
//! for `u ∈ Q ⊔ S`, and `W_a` for `a ∈ Q`. The modifying states (those that
//! flip the bit) are `neg`, `C^$` and every `C_u^v`.

use std::collections::HashMap;

use thiserror::Error;

use crate::construction::{q_expand, ConstructionError};
use crate::labels::{LabelError, LabelSet};
use crate::mealy::{LetterId, LetterWord, MealyError, MealyMachine, Origin, StateId, StateWord};

use super::{tm_step, Action, Move, StepResult, TmConfiguration, TmError, TuringMachine};

/// Characters that would make generated labels ambiguous.
const RESERVED_CHARS: &[char] = &['(', ')', ',', '~', '#', '^', '_', '$'];
const RESERVED_LABELS: &[&str] = &["neg", "W", "C"];

/// Number of decision-list clauses, including the completion clauses.
pub const NUM_CLAUSES: usize = 29;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TmMealyError {
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
    #[error("label `{0}` clashes with generated labels")]
    LabelClash(String),
    #[error("pruned state `{pruned}` is still the target of `{from}` on `{letter}`")]
    PrunedTarget {
        pruned: String,
        from: String,
        letter: String,
    },
    #[error("machine was compiled from a different Turing machine")]
    Mismatch,
}

/// A symbol of `Q ⊔ S ⊔ {$}`: tape symbols first, then control states, then `$`.
pub type TmSym = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TmMealyState {
    Neg,
    CDollar,
    /// The bare waiting state `W`.
    Wait,
    /// `C_u^v`.
    Count(TmSym, TmSym),
    /// `P_u`.
    Print(TmSym),
    /// `W_a`, `a ∈ Q`.
    WaitOn(TmSym),
}

/// How often each clause of the decision list fired while compiling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseAudit {
    pub fired: [usize; NUM_CLAUSES],
}

impl ClauseAudit {
    /// Pairs handled by the clauses that complete the published list
    /// (`C^$` on a tape letter, `C_s^b` on a state letter with bit 1).
    pub fn completion_hits(&self) -> usize {
        self.fired[26..].iter().sum()
    }

    pub fn total(&self) -> usize {
        self.fired.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct TmMealy {
    machine: MealyMachine,
    kinds: Vec<TmMealyState>,
    index: HashMap<TmMealyState, StateId>,
    num_symbols: u32,
    num_states: u32,
    audit: ClauseAudit,
    /// Rules of the source machine, to reject mismatched use.
    rules: Vec<(u32, u32, Action)>,
}

/// Context of the decision list.
struct Clauses<'a> {
    tm: &'a TuringMachine,
    q: u32,
    s: u32,
}

impl Clauses<'_> {
    fn dollar(&self) -> TmSym {
        self.q + self.s
    }

    fn is_tape(&self, u: TmSym) -> bool {
        u < self.q
    }

    fn is_state(&self, u: TmSym) -> bool {
        u >= self.q && u < self.q + self.s
    }

    fn phi(&self, s: TmSym, a: TmSym) -> Option<Action> {
        self.tm.phi(s - self.q, a)
    }

    fn sym_of_state(&self, r: u32) -> TmSym {
        self.q + r
    }

    /// `δ(p, (y, ε))` and the index of the clause that fired.
    fn delta(&self, p: TmMealyState, y: TmSym, bit: u8) -> (TmMealyState, usize) {
        use TmMealyState::*;
        let e = self.tm.blank();
        let dollar = self.dollar();
        let is_dollar = y == dollar;
        match p {
            Neg => (Neg, 0),
            CDollar if is_dollar && bit == 1 => (CDollar, 1),
            CDollar if is_dollar => (Count(e, e), 2),
            Print(u) if is_dollar => (Count(e, u), 3),
            WaitOn(_) if is_dollar => (Count(e, e), 4),
            Wait if is_dollar => (Neg, 5),
            Count(..) if is_dollar => (Neg, 6),
            Print(u) => (Print(u), 7),
            Count(_, v) if bit == 0 && y != v => (Neg, 8),
            Count(_, b) if self.is_tape(b) && self.is_tape(y) && bit == 1 => (Count(y, b), 9),
            Count(a, b) if self.is_tape(a) && self.is_tape(b) && bit == 1 => match self.phi(y, a) {
                Some(act) if act.dir == Move::Right => (Count(self.sym_of_state(act.next), b), 10),
                Some(_) => (Count(a, b), 11),
                None => (Neg, 12),
            },
            // y == b from here on for bit 0
            Count(s, _) if self.is_state(s) && bit == 0 => (Print(s), 13),
            Count(_, b) if self.is_tape(b) && bit == 0 => (WaitOn(b), 14),
            Count(_, s) if self.is_state(s) && self.is_state(y) && bit == 1 => (Neg, 15),
            Count(_, s) if self.is_state(s) && bit == 1 => (Count(y, s), 16),
            Count(a, s) if self.is_state(s) => match self.phi(s, a) {
                None => (Neg, 17),
                Some(act) if act.dir == Move::Left => (Print(act.write), 18),
                Some(_) => (Wait, 19),
            },
            WaitOn(a) if self.is_tape(y) => (Print(a), 20),
            WaitOn(a) => match self.phi(y, a) {
                Some(act) if act.dir == Move::Left => (Print(self.sym_of_state(act.next)), 21),
                Some(act) => (Print(act.write), 22),
                None => (Neg, 23),
            },
            Wait if self.is_tape(y) => (Print(y), 24),
            Wait => (Neg, 25),
            CDollar if bit == 1 => (CDollar, 26),
            CDollar => (Neg, 27),
            // C_s^b reading a control state with bit 1
            Count(..) => (Neg, 28),
        }
    }
}

/// Compiles `tm`; `|Σ| = 2(|S| + |Q| + 1)` and
/// `|A| = 3 + 2|Q||S| + |Q|² + 2|Q| + |S|`.
pub fn tm_to_mealy(tm: &TuringMachine) -> Result<TmMealy, TmMealyError> {
    for name in tm.states().names().iter().chain(tm.symbols().names()) {
        if name.contains(RESERVED_CHARS) || RESERVED_LABELS.contains(&name.as_str()) {
            return Err(TmMealyError::LabelClash(name.clone()));
        }
    }
    let q = tm.num_symbols() as u32;
    let s = tm.num_states() as u32;
    let ctx = Clauses { tm, q, s };
    let tape = 0..q;
    let ctrl = q..q + s;

    let mut kinds = vec![TmMealyState::Neg, TmMealyState::CDollar, TmMealyState::Wait];
    for a in tape.clone() {
        kinds.extend(ctrl.clone().map(|st| TmMealyState::Count(a, st)));
    }
    for a in tape.clone() {
        kinds.extend(tape.clone().map(|b| TmMealyState::Count(a, b)));
    }
    for st in ctrl.clone() {
        kinds.extend(tape.clone().map(|b| TmMealyState::Count(st, b)));
    }
    kinds.extend(tape.clone().chain(ctrl.clone()).map(TmMealyState::Print));
    kinds.extend(tape.clone().map(TmMealyState::WaitOn));

    let mut audit = ClauseAudit {
        fired: [0; NUM_CLAUSES],
    };
    let index: HashMap<TmMealyState, StateId> = kinds.iter().enumerate().map(|(i, k)| (*k, i as StateId)).collect();
    let machine = assemble(tm, &ctx, &kinds, &index, Some(&mut audit))?;
    Ok(TmMealy {
        machine,
        kinds,
        index,
        num_symbols: q,
        num_states: s,
        audit,
        rules: tm.rules().collect(),
    })
}

fn sym_name(tm: &TuringMachine, u: TmSym) -> &str {
    let q = tm.num_symbols() as u32;
    if u < q {
        tm.symbol_name(u)
    } else if u < q + tm.num_states() as u32 {
        tm.state_name(u - q)
    } else {
        "$"
    }
}

fn state_label(tm: &TuringMachine, k: TmMealyState) -> String {
    match k {
        TmMealyState::Neg => "neg".into(),
        TmMealyState::CDollar => "C^$".into(),
        TmMealyState::Wait => "W".into(),
        TmMealyState::Count(u, v) => format!("C_{}^{}", sym_name(tm, u), sym_name(tm, v)),
        TmMealyState::Print(u) => format!("P_{}", sym_name(tm, u)),
        TmMealyState::WaitOn(a) => format!("W_{}", sym_name(tm, a)),
    }
}

fn is_modifying(k: TmMealyState) -> bool {
    matches!(k, TmMealyState::Neg | TmMealyState::CDollar | TmMealyState::Count(..))
}

/// Builds the dense table over `kinds`, recording clause hits in `audit`.
fn assemble(
    tm: &TuringMachine,
    ctx: &Clauses,
    kinds: &[TmMealyState],
    index: &HashMap<TmMealyState, StateId>,
    mut audit: Option<&mut ClauseAudit>,
) -> Result<MealyMachine, TmMealyError> {
    let dollar = ctx.dollar();
    let states = LabelSet::new(kinds.iter().map(|k| state_label(tm, *k)).collect::<Vec<_>>())?;
    let letters = LabelSet::new(
        (0..=dollar)
            .flat_map(|u| [0, 1].map(|bit| format!("({},{bit})", sym_name(tm, u))))
            .collect::<Vec<_>>(),
    )?;
    let mut missing = None;
    let machine = MealyMachine::from_fn(states, letters, |p, x| {
        let kind = kinds[p];
        let (y, bit) = ((x / 2) as TmSym, (x % 2) as u8);
        let (next, clause) = ctx.delta(kind, y, bit);
        if let Some(a) = audit.as_deref_mut() {
            a.fired[clause] += 1;
        }
        let out = if is_modifying(kind) { x ^ 1 } else { x };
        match index.get(&next) {
            Some(&q) => (q as usize, out),
            None => {
                missing.get_or_insert((p, x, next));
                (p, out)
            }
        }
    })?
    .with_modifying(kinds.iter().map(|k| is_modifying(*k)).collect())
    .with_origin(Origin::TuringMachine);
    if let Some((p, x, next)) = missing {
        return Err(TmMealyError::PrunedTarget {
            pruned: state_label(tm, next),
            from: state_label(tm, kinds[p]),
            letter: machine.letter_name(x as LetterId).to_string(),
        });
    }
    Ok(machine)
}

/// Removes `C_r^b` for every control state `r` that no rule enters while
/// moving right; such states are unreachable from every other state.
pub fn prune_unused_right_targets(m: &TmMealy, tm: &TuringMachine) -> Result<TmMealy, TmMealyError> {
    m.check_source(tm)?;
    let q = m.num_symbols;
    let targets: Vec<bool> = {
        let mut t = vec![false; tm.num_states()];
        for (_, _, act) in tm.rules() {
            if act.dir == Move::Right {
                t[act.next as usize] = true;
            }
        }
        t
    };
    let kinds: Vec<TmMealyState> = m
        .kinds
        .iter()
        .copied()
        .filter(|k| match *k {
            TmMealyState::Count(r, b) if r >= q && b < q => targets[(r - q) as usize],
            _ => true,
        })
        .collect();
    let index: HashMap<TmMealyState, StateId> = kinds.iter().enumerate().map(|(i, k)| (*k, i as StateId)).collect();
    let ctx = Clauses { tm, q, s: m.num_states };
    let machine = assemble(tm, &ctx, &kinds, &index, None)?;
    Ok(TmMealy {
        machine,
        kinds,
        index,
        audit: m.audit.clone(),
        rules: m.rules.clone(),
        ..*m
    })
}

impl TmMealy {
    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn audit(&self) -> &ClauseAudit {
        &self.audit
    }

    pub fn kind(&self, p: StateId) -> TmMealyState {
        self.kinds[p as usize]
    }

    pub fn state(&self, k: TmMealyState) -> Option<StateId> {
        self.index.get(&k).copied()
    }

    pub fn is_modifying(&self, p: StateId) -> bool {
        is_modifying(self.kind(p))
    }

    pub fn dollar(&self) -> TmSym {
        self.num_symbols + self.num_states
    }

    /// Symbol index of a control state.
    pub fn state_sym(&self, s: u32) -> TmSym {
        self.num_symbols + s
    }

    pub fn letter(&self, u: TmSym, bit: u8) -> LetterId {
        u * 2 + bit as LetterId
    }

    pub fn z_word(&self, syms: &[TmSym], bit: u8) -> LetterWord {
        syms.iter().map(|&u| self.letter(u, bit)).collect()
    }

    fn check_source(&self, tm: &TuringMachine) -> Result<(), TmMealyError> {
        let same = tm.num_symbols() as u32 == self.num_symbols
            && tm.num_states() as u32 == self.num_states
            && tm.rules().eq(self.rules.iter().copied());
        if same {
            Ok(())
        } else {
            Err(TmMealyError::Mismatch)
        }
    }

    /// `e·w·e` for a configuration, in the state-reads-left convention: the
    /// control state is moved just right of the cell it reads.
    pub fn padded_word(&self, tm: &TuringMachine, cfg: &TmConfiguration) -> Result<Vec<TmSym>, TmMealyError> {
        self.check_source(tm)?;
        tm.check_config(cfg)?;
        let e = tm.blank();
        let mut tape = cfg.tape.clone();
        if cfg.head == tape.len() {
            tape.push(e);
        }
        let mut word = vec![e];
        word.extend_from_slice(&tape[..=cfg.head]);
        word.push(self.state_sym(cfg.state));
        word.extend_from_slice(&tape[cfg.head + 1..]);
        word.push(e);
        Ok(word)
    }

    /// `Z(u_0 $ u_1 $ ... u_{k-1} $, 0)` for the first `k` configurations of a
    /// run, and the configuration reached after them, its tape padded with
    /// blanks. The square of the element of `u_i` fixes its block and
    /// continues as the element of `u_{i+1}`, which is one cell longer; so an
    /// input moved by the last element extends this prefix to one whose orbit
    /// is `2^k` times longer. Fewer blocks are produced if the machine halts.
    pub fn trajectory_input(
        &self,
        tm: &TuringMachine,
        cfg: &TmConfiguration,
        steps: usize,
    ) -> Result<(LetterWord, TmConfiguration), TmMealyError> {
        let mut input = Vec::new();
        let mut current = cfg.clone();
        let mut syms = self.padded_word(tm, &current)?;
        for _ in 0..steps {
            let StepResult::Next(next) = tm_step(tm, &current)? else {
                break;
            };
            let len = syms.len() + 1;
            syms.push(self.dollar());
            input.extend(self.z_word(&syms, 0));
            current = self.pad_to(tm, next, len);
            syms = self.padded_word(tm, &current)?;
        }
        Ok((input, current))
    }

    /// `cfg` with blanks appended until its padded word has length `len`.
    pub fn pad_to(&self, tm: &TuringMachine, mut cfg: TmConfiguration, len: usize) -> TmConfiguration {
        // The padded word is the tape, the head cell if past the end, the
        // state and two blanks.
        let cells = cfg.tape.len().max(cfg.head + 1);
        if len > cells + 3 {
            cfg.tape.resize(cells, tm.blank());
            cfg.tape.resize(len - 3, tm.blank());
        }
        cfg
    }

    /// `C(u_1 ... u_m) = C_e^{u_1} ... C_e^{u_m}`.
    pub fn c_word(&self, syms: &[TmSym], blank: TmSym) -> StateWord {
        syms.iter()
            .map(|&u| {
                self.state(TmMealyState::Count(blank, u))
                    .expect("C_e^u exists for every symbol")
            })
            .collect()
    }
}

/// The group element of a configuration: `Q(C(e·w·e))·C^$`, with `w` the
/// configuration written state-reads-left.
pub fn element_for_tm_config(
    m: &TmMealy,
    tm: &TuringMachine,
    cfg: &TmConfiguration,
) -> Result<StateWord, TmMealyError> {
    let word = m.padded_word(tm, cfg)?;
    let mut w = q_expand(&m.c_word(&word, tm.blank()))?;
    w.push(m.state(TmMealyState::CDollar).expect("C^$ is never pruned"));
    Ok(w)
}
