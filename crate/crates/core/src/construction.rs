//! Compiles a cellular automaton `(T, t, e, F)` into a Mealy machine whose
//! group elements encode configurations, plus the word builders used to
//! state and test facts about it.
//!
//! Letters are pairs `(d, ε)` with `d ∈ T ∪ {$}` and a bit `ε`. States:
//!
//! * `neg`: the sink; flips every bit.
//! * `C_a^b` (counting, `a ∈ T`, `b ∈ T ∪ {$}`): flips the bit.
//! * `W_a^b` (`a, b ∈ T`) and `P_a` (`a ∈ T`): identity on letters.
//!
//! Modifying states are `neg` and the counting states.

use thiserror::Error;

use crate::ca::{CaError, CellState, CellularAutomaton, RunOutcome};
use crate::labels::{LabelError, LabelSet};
use crate::mealy::{LetterId, LetterWord, MealyError, MealyMachine, Origin, StateId, StateWord};

/// Label of the separator symbol.
pub const DOLLAR: &str = "$";
/// Label of the sink state.
pub const NEG: &str = "neg";
/// Longest word [`q_expand`] materializes by default.
pub const DEFAULT_Q_CAP: usize = (1 << 20) - 1;

/// Characters that would make generated labels ambiguous.
const RESERVED_CHARS: &[char] = &['(', ')', ',', '~', '#', '^', '_', '$'];

/// A symbol of `T ∪ {$}`: values below `|T|` are cell states, `|T|` is `$`.
pub type Sym = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Ca(#[from] CaError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("symbol `{0}` clashes with generated labels")]
    LabelClash(String),
    #[error("expanded word would have length {len}, above the cap {cap}")]
    TooLong { len: u128, cap: usize },
    #[error("word is not regular")]
    NotRegular,
    #[error("configuration contains a final state at step {step}")]
    FinalInTrajectory { step: usize },
    #[error("`{0}` is not a valid witness symbol: it must be non-final and t(b, e, e) must be non-final")]
    InvalidWitnessSymbol(String),
    #[error("no witness symbol: every b has b or t(b, e, e) final")]
    NoWitnessSymbol,
    #[error("empty configuration: the order prediction needs at least one cell")]
    EmptyConfiguration,
    #[error("symbol index {0} out of range")]
    SymbolOutOfRange(Sym),
}

/// Role of a state of the compiled machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimState {
    Neg,
    /// `C_a^b`; `b` may be `$`.
    Count(CellState, Sym),
    /// `W_a^b`.
    Wait(CellState, CellState),
    /// `P_a`.
    Print(CellState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Potential {
    Finite(usize),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegularityVerdict {
    NotRegular,
    /// `w = q·r`, `q` non-counting and not ending in `neg`, `r` modifying;
    /// `split = |q|`.
    Regular {
        split: usize,
        potential: Potential,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictedOrder {
    /// `2^{k+2}`: a final state first appears at step `k + 1`, `k ≥ 1`.
    Exactly(u64),
    /// The configuration already contains a final state.
    ExactlyTwo,
    /// A final state first appears at step 1; only the bound `2^2` applies.
    AtLeast(u64),
    /// No final state within the step budget: the order is at least
    /// `2^{lower_bound_exponent}` and infinite if the automaton never halts.
    InfiniteIfNeverHalts { lower_bound_exponent: u32 },
}

/// The compiled machine with back-references to the automaton.
#[derive(Debug, Clone)]
pub struct SimulatorMachine {
    machine: MealyMachine,
    ca: CellularAutomaton,
    kinds: Vec<SimState>,
}

/// Compiles `ca` into its simulating Mealy machine.
pub fn build_simulator(ca: &CellularAutomaton) -> Result<SimulatorMachine, ConstructionError> {
    for (_, name) in ca.states().iter() {
        if name == NEG || name.contains(RESERVED_CHARS) {
            return Err(ConstructionError::LabelClash(name.to_string()));
        }
    }
    let t = ca.num_states() as u32;
    let sym_name = |s: Sym| if s == t { DOLLAR } else { ca.name(s) };

    let mut kinds = vec![SimState::Neg];
    for a in 0..t {
        for b in 0..=t {
            kinds.push(SimState::Count(a, b));
        }
    }
    for a in 0..t {
        for b in 0..t {
            kinds.push(SimState::Wait(a, b));
        }
    }
    kinds.extend((0..t).map(SimState::Print));

    let state_names = kinds.iter().map(|k| match *k {
        SimState::Neg => NEG.to_string(),
        SimState::Count(a, b) => format!("C_{}^{}", ca.name(a), sym_name(b)),
        SimState::Wait(a, b) => format!("W_{}^{}", ca.name(a), ca.name(b)),
        SimState::Print(a) => format!("P_{}", ca.name(a)),
    });
    let states = LabelSet::new(state_names.collect::<Vec<_>>())?;
    let letters = LabelSet::new(
        (0..=t)
            .flat_map(|s| [0, 1].map(|bit| format!("({},{bit})", sym_name(s))))
            .collect::<Vec<_>>(),
    )?;

    let sm = SimulatorMachine {
        machine: MealyMachine::from_fn(states.clone(), letters.clone(), |_, _| (0, 0))?,
        ca: ca.clone(),
        kinds,
    };
    let machine = MealyMachine::from_fn(states, letters, |p, x| {
        let (q, y) = sm.rule(p as StateId, x as LetterId);
        (q as usize, y as usize)
    })?
    .with_modifying(sm.kinds.iter().map(|k| is_modifying_kind(*k)).collect())
    .with_origin(Origin::CellularAutomaton);
    Ok(SimulatorMachine { machine, ..sm })
}

fn is_modifying_kind(k: SimState) -> bool {
    matches!(k, SimState::Neg | SimState::Count(..))
}

impl SimulatorMachine {
    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn ca(&self) -> &CellularAutomaton {
        &self.ca
    }

    fn t_size(&self) -> u32 {
        self.ca.num_states() as u32
    }

    /// The separator symbol `$`.
    pub fn dollar(&self) -> Sym {
        self.t_size()
    }

    pub fn neg(&self) -> StateId {
        0
    }

    pub fn counting(&self, a: CellState, b: Sym) -> StateId {
        1 + a * (self.t_size() + 1) + b
    }

    pub fn waiting(&self, a: CellState, b: CellState) -> StateId {
        let t = self.t_size();
        1 + t * (t + 1) + a * t + b
    }

    pub fn printing(&self, a: CellState) -> StateId {
        let t = self.t_size();
        1 + t * (t + 1) + t * t + a
    }

    pub fn kind(&self, p: StateId) -> SimState {
        self.kinds[p as usize]
    }

    pub fn is_modifying(&self, p: StateId) -> bool {
        is_modifying_kind(self.kind(p))
    }

    pub fn is_counting(&self, p: StateId) -> bool {
        matches!(self.kind(p), SimState::Count(..))
    }

    pub fn letter(&self, sym: Sym, bit: u8) -> LetterId {
        sym * 2 + bit as LetterId
    }

    pub fn letter_parts(&self, x: LetterId) -> (Sym, u8) {
        (x / 2, (x % 2) as u8)
    }

    /// `x⊥`: the same symbol with the bit flipped.
    pub fn flip(&self, x: LetterId) -> LetterId {
        x ^ 1
    }

    /// `(output letter, next state)` from the defining clauses.
    fn rule(&self, p: StateId, x: LetterId) -> (StateId, LetterId) {
        let kind = self.kind(p);
        let out = if is_modifying_kind(kind) { self.flip(x) } else { x };
        (self.delta(kind, x), out)
    }

    fn delta(&self, kind: SimState, x: LetterId) -> StateId {
        let (d, bit) = self.letter_parts(x);
        let dollar = self.dollar();
        let e = self.ca.default_state();
        let t = |a, b, c| self.ca.t(a, b, c);
        if kind == SimState::Neg || d != dollar && self.ca.is_final(d) {
            return self.neg();
        }
        match kind {
            SimState::Neg => unreachable!(),
            SimState::Count(a, b) => match (d == dollar, bit) {
                (true, 1) if b == dollar => self.counting(e, dollar),
                (true, 1) => self.neg(),
                (true, _) if b == dollar => self.counting(e, t(a, e, e)),
                (false, 1) => self.counting(d, b),
                (_, _) if b != d => self.neg(),
                _ => self.waiting(a, b),
            },
            SimState::Wait(a, b) if d == dollar => self.counting(e, t(a, b, e)),
            SimState::Wait(a, b) => self.printing(t(a, b, d)),
            SimState::Print(a) if d == dollar => self.counting(e, a),
            SimState::Print(a) => self.printing(a),
        }
    }

    fn check_cells(&self, a: &[CellState]) -> Result<(), ConstructionError> {
        match a.iter().find(|&&s| s >= self.t_size()) {
            Some(&s) => Err(ConstructionError::SymbolOutOfRange(s)),
            None => Ok(()),
        }
    }

    /// `C(a1...an) = C_e^{a1} ... C_e^{an}`.
    pub fn c_word(&self, a: &[CellState]) -> Result<StateWord, ConstructionError> {
        self.check_cells(a)?;
        let e = self.ca.default_state();
        Ok(a.iter().map(|&s| self.counting(e, s)).collect())
    }

    /// `P(a1...an) = P_{a1} ... P_{an}`.
    pub fn p_word(&self, a: &[CellState]) -> Result<StateWord, ConstructionError> {
        self.check_cells(a)?;
        Ok(a.iter().map(|&s| self.printing(s)).collect())
    }

    /// `Z(a1...an, ε) = (a1, ε) ... (an, ε)`; symbols may include `$`.
    pub fn z_word(&self, a: &[Sym], bit: u8) -> Result<LetterWord, ConstructionError> {
        match a.iter().find(|&&s| s > self.dollar()) {
            Some(&s) => Err(ConstructionError::SymbolOutOfRange(s)),
            None => Ok(a.iter().map(|&s| self.letter(s, bit)).collect()),
        }
    }

    /// `Q(C(a)) · C_e^$`, of length `2^|a|`.
    pub fn element_for_config(&self, a: &[CellState]) -> Result<StateWord, ConstructionError> {
        let mut w = q_expand(&self.c_word(a)?)?;
        w.push(self.counting(self.ca.default_state(), self.dollar()));
        Ok(w)
    }

    /// `neg · C_e^$`, whose commutators with an element are powers of it.
    pub fn engel_partner(&self) -> StateWord {
        vec![self.neg(), self.counting(self.ca.default_state(), self.dollar())]
    }

    pub fn classify_regular(&self, w: &[StateId]) -> RegularityVerdict {
        let split = w.len() - w.iter().rev().take_while(|&&p| self.is_modifying(p)).count();
        if w[..split].iter().any(|&p| self.is_counting(p)) {
            return RegularityVerdict::NotRegular;
        }
        let suffix = &w[split..];
        let potential = if suffix.contains(&self.neg()) {
            Potential::Infinite
        } else {
            Potential::Finite(suffix.len())
        };
        RegularityVerdict::Regular { split, potential }
    }

    /// `ρ_x`: `δ_x` on the non-counting prefix and the first modifying entry,
    /// `δ_{x⊥}` on the remaining modifying entries.
    pub fn rho(&self, x: LetterId, w: &[StateId]) -> Result<StateWord, ConstructionError> {
        let RegularityVerdict::Regular { split, .. } = self.classify_regular(w) else {
            return Err(ConstructionError::NotRegular);
        };
        self.machine.check_letter(x)?;
        Ok(w.iter()
            .enumerate()
            .map(|(i, &p)| {
                let letter = if i <= split { x } else { self.flip(x) };
                self.machine.transition(p, letter)
            })
            .collect())
    }

    /// `ρ_{x1...xk} = ρ_{xk} ∘ ... ∘ ρ_{x1}`.
    pub fn rho_word(&self, xs: &[LetterId], w: &[StateId]) -> Result<StateWord, ConstructionError> {
        xs.iter().try_fold(w.to_vec(), |acc, &x| self.rho(x, &acc))
    }

    /// Default tail symbol of [`SimulatorMachine::witness_word`]: the first
    /// `b` in declaration order with `b ∉ F` and `t(b, e, e) ∉ F`.
    pub fn default_witness_symbol(&self) -> Option<CellState> {
        let e = self.ca.default_state();
        (0..self.t_size()).find(|&b| self.valid_witness_symbol(b, e))
    }

    fn valid_witness_symbol(&self, b: CellState, e: CellState) -> bool {
        !self.ca.is_final(b) && !self.ca.is_final(self.ca.t(b, e, e))
    }

    /// `Z(a $ τ(a) $ ... $ τ^k(a), 0) · ($,0)(b,0)($,1)(t(b,e,e),1)(b,0)`:
    /// an input whose orbit under the element of `a` realizes its order.
    pub fn witness_word(
        &self,
        a: &[CellState],
        k: usize,
        b: Option<CellState>,
    ) -> Result<LetterWord, ConstructionError> {
        self.check_cells(a)?;
        let e = self.ca.default_state();
        let b = match b {
            Some(b) => {
                self.check_cells(&[b])?;
                if !self.valid_witness_symbol(b, e) {
                    return Err(ConstructionError::InvalidWitnessSymbol(self.ca.name(b).to_string()));
                }
                b
            }
            None => self
                .default_witness_symbol()
                .ok_or(ConstructionError::NoWitnessSymbol)?,
        };
        let dollar = self.dollar();
        let mut syms: Vec<Sym> = Vec::new();
        for (step, config) in self.ca.trajectory(a, k).into_iter().enumerate() {
            if self.ca.has_final(&config) {
                return Err(ConstructionError::FinalInTrajectory { step });
            }
            if step > 0 {
                syms.push(dollar);
            }
            syms.extend(config);
        }
        let mut word = self.z_word(&syms, 0)?;
        word.extend([
            self.letter(dollar, 0),
            self.letter(b, 0),
            self.letter(dollar, 1),
            self.letter(self.ca.t(b, e, e), 1),
            self.letter(b, 0),
        ]);
        Ok(word)
    }

    /// Order of [`SimulatorMachine::element_for_config`] predicted from the
    /// automaton's run.
    pub fn predicted_order(&self, a: &[CellState], max_steps: usize) -> Result<PredictedOrder, ConstructionError> {
        self.check_cells(a)?;
        if a.is_empty() {
            return Err(ConstructionError::EmptyConfiguration);
        }
        if self.default_witness_symbol().is_none() {
            return Err(ConstructionError::NoWitnessSymbol);
        }
        Ok(match self.ca.run(a, max_steps) {
            RunOutcome::HaltsAfter(0) => PredictedOrder::ExactlyTwo,
            RunOutcome::HaltsAfter(1) => PredictedOrder::AtLeast(4),
            RunOutcome::HaltsAfter(j) if j + 1 < 64 => PredictedOrder::Exactly(1 << (j + 1)),
            RunOutcome::HaltsAfter(j) => PredictedOrder::InfiniteIfNeverHalts {
                lower_bound_exponent: (j + 1) as u32,
            },
            RunOutcome::NoHaltWithin(m) => PredictedOrder::InfiniteIfNeverHalts {
                lower_bound_exponent: (m + 2) as u32,
            },
        })
    }
}

/// `Q(p) = p`, `Q(w p) = Q(w) p Q(w)`, up to [`DEFAULT_Q_CAP`] entries.
pub fn q_expand(w: &[StateId]) -> Result<StateWord, ConstructionError> {
    q_expand_with_cap(w, DEFAULT_Q_CAP)
}

pub fn q_expand_with_cap(w: &[StateId], cap: usize) -> Result<StateWord, ConstructionError> {
    let len = (1u128 << w.len().min(127)) - 1;
    if len > cap as u128 {
        return Err(ConstructionError::TooLong { len, cap });
    }
    let mut out = Vec::with_capacity(len as usize);
    for &p in w {
        let prev = out.len();
        out.push(p);
        out.extend_from_within(..prev);
    }
    Ok(out)
}

/// Applies `Q(w)` to `buf` without materializing it.
pub fn q_act_in_place(m: &MealyMachine, w: &[StateId], buf: &mut [LetterId]) {
    if let Some((&p, rest)) = w.split_last() {
        q_act_in_place(m, rest, buf);
        m.run_state(p, buf);
        q_act_in_place(m, rest, buf);
    }
}
