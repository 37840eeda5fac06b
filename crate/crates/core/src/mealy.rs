//! Mealy automata and their action on finite words.
//!
//! A machine is a pair of dense tables indexed by `state * |alphabet| + letter`:
//! `next` holds the transition map and `out` the output map. A state word
//! `p1 p2 ... pk` acts on the right: `p1` reads the input first and every
//! later entry reads the output of the previous row, so
//! `act(p q, x) = act(q, act(p, x))`.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::labels::{LabelError, LabelSet};

pub type StateId = u32;
pub type LetterId = u32;

/// A finite sequence of machine states. Inverse entries are ordinary states
/// of an inverse closure (see [`inverse_closure`]).
pub type StateWord = Vec<StateId>;

/// A finite sequence of letters.
pub type LetterWord = Vec<LetterId>;

/// Suffix marking the formal inverse of a state label.
pub const INVERSE_SUFFIX: char = '~';

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MealyError {
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown letter `{0}`")]
    UnknownLetter(String),
    #[error("undeclared label `{0}`")]
    Dangling(String),
    #[error("state index {0} out of range")]
    StateOutOfRange(StateId),
    #[error("letter index {0} out of range")]
    LetterOutOfRange(LetterId),
    #[error("transition not total: no row for state `{state}` and letter `{letter}`")]
    NotTotal { state: String, letter: String },
    #[error("conflicting rows for state `{state}` and letter `{letter}`")]
    Conflict { state: String, letter: String },
    #[error("machine is not invertible: output of state `{0}` is not a bijection on letters")]
    NotInvertible(String),
    #[error("inverse entries require an invertible machine")]
    SignedWordNeedsInverse,
    #[error("state label `{0}` ends with the reserved inverse marker `~`")]
    ReservedLabel(String),
}

/// Where a machine came from. Generated machines admit a cheaper order search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Origin {
    #[default]
    General,
    CellularAutomaton,
    TuringMachine,
}

impl Origin {
    pub fn is_generated(self) -> bool {
        !matches!(self, Origin::General)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Origin::General => "general",
            Origin::CellularAutomaton => "ca",
            Origin::TuringMachine => "tm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "general" => Some(Origin::General),
            "ca" => Some(Origin::CellularAutomaton),
            "tm" => Some(Origin::TuringMachine),
            _ => None,
        }
    }
}

/// Sign of an entry in a group word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

#[derive(Clone, PartialEq, Eq)]
pub struct MealyMachine {
    states: LabelSet,
    alphabet: LabelSet,
    next: Vec<StateId>,
    out: Vec<LetterId>,
    modifying: Option<Vec<bool>>,
    origin: Origin,
    /// Number of base states when this machine is an inverse closure.
    base_states: Option<usize>,
}

impl fmt::Debug for MealyMachine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MealyMachine")
            .field("states", &self.states.len())
            .field("letters", &self.alphabet.len())
            .field("origin", &self.origin)
            .field("inverse_closure", &self.base_states.is_some())
            .finish()
    }
}

impl MealyMachine {
    /// Builds a machine from a total rule `(state, letter) -> (next state, output letter)`.
    pub fn from_fn<F>(states: LabelSet, alphabet: LabelSet, mut rule: F) -> Result<Self, MealyError>
    where
        F: FnMut(usize, usize) -> (usize, usize),
    {
        let mut builder = MealyBuilder::new(states, alphabet);
        for p in 0..builder.states.len() {
            for x in 0..builder.alphabet.len() {
                let (q, y) = rule(p, x);
                builder.set(p as StateId, x as LetterId, q as StateId, y as LetterId)?;
            }
        }
        builder.build()
    }

    pub fn states(&self) -> &LabelSet {
        &self.states
    }

    pub fn alphabet(&self) -> &LabelSet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_letters(&self) -> usize {
        self.alphabet.len()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    /// Optional modifying-state taxonomy carried along for documentation and I/O.
    pub fn modifying(&self) -> Option<&[bool]> {
        self.modifying.as_deref()
    }

    pub fn with_modifying(mut self, modifying: Vec<bool>) -> Self {
        assert_eq!(modifying.len(), self.states.len());
        self.modifying = Some(modifying);
        self
    }

    pub fn is_inverse_closure(&self) -> bool {
        self.base_states.is_some()
    }

    /// Formal inverse of a state in an inverse closure.
    pub fn inverse_state(&self, s: StateId) -> Option<StateId> {
        let base = self.base_states? as StateId;
        Some(if s < base { s + base } else { s - base })
    }

    /// Inverse of a word in an inverse closure: reversed, each entry inverted.
    pub fn inverse_word(&self, w: &[StateId]) -> Result<StateWord, MealyError> {
        w.iter()
            .rev()
            .map(|&s| self.inverse_state(s).ok_or(MealyError::SignedWordNeedsInverse))
            .collect()
    }

    pub fn state_id(&self, label: &str) -> Result<StateId, MealyError> {
        self.states
            .get(label)
            .map(|i| i as StateId)
            .ok_or_else(|| MealyError::UnknownState(label.to_string()))
    }

    pub fn letter_id(&self, label: &str) -> Result<LetterId, MealyError> {
        self.alphabet
            .get(label)
            .map(|i| i as LetterId)
            .ok_or_else(|| MealyError::UnknownLetter(label.to_string()))
    }

    pub fn state_name(&self, s: StateId) -> &str {
        self.states.name(s as usize)
    }

    pub fn letter_name(&self, x: LetterId) -> &str {
        self.alphabet.name(x as usize)
    }

    /// Resolves a word of signed entries against this machine. Negative entries
    /// need an inverse closure.
    pub fn resolve_signed(&self, entries: &[(StateId, Sign)]) -> Result<StateWord, MealyError> {
        entries
            .iter()
            .map(|&(s, sign)| {
                self.check_state(s)?;
                match sign {
                    Sign::Pos => Ok(s),
                    Sign::Neg => self.inverse_state(s).ok_or(MealyError::SignedWordNeedsInverse),
                }
            })
            .collect()
    }

    pub fn word_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<StateWord, MealyError> {
        labels.iter().map(|l| self.state_id(l.as_ref())).collect()
    }

    pub fn letters_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<LetterWord, MealyError> {
        labels.iter().map(|l| self.letter_id(l.as_ref())).collect()
    }

    pub fn word_labels(&self, w: &[StateId]) -> Vec<&str> {
        w.iter().map(|&s| self.state_name(s)).collect()
    }

    pub fn letter_labels(&self, xs: &[LetterId]) -> Vec<&str> {
        xs.iter().map(|&x| self.letter_name(x)).collect()
    }

    pub fn check_state(&self, s: StateId) -> Result<(), MealyError> {
        if (s as usize) < self.states.len() {
            Ok(())
        } else {
            Err(MealyError::StateOutOfRange(s))
        }
    }

    pub fn check_letter(&self, x: LetterId) -> Result<(), MealyError> {
        if (x as usize) < self.alphabet.len() {
            Ok(())
        } else {
            Err(MealyError::LetterOutOfRange(x))
        }
    }

    pub fn check_word(&self, w: &[StateId]) -> Result<(), MealyError> {
        w.iter().try_for_each(|&s| self.check_state(s))
    }

    pub fn check_letters(&self, xs: &[LetterId]) -> Result<(), MealyError> {
        xs.iter().try_for_each(|&x| self.check_letter(x))
    }

    /// One cross-diagram atom: returns `(output letter, next state)`.
    #[inline]
    pub fn step(&self, p: StateId, x: LetterId) -> (LetterId, StateId) {
        let i = p as usize * self.alphabet.len() + x as usize;
        (self.out[i], self.next[i])
    }

    /// Checked variant of [`MealyMachine::step`].
    pub fn try_step(&self, p: StateId, x: LetterId) -> Result<(LetterId, StateId), MealyError> {
        self.check_state(p)?;
        self.check_letter(x)?;
        Ok(self.step(p, x))
    }

    #[inline]
    pub fn output(&self, p: StateId, x: LetterId) -> LetterId {
        self.out[p as usize * self.alphabet.len() + x as usize]
    }

    #[inline]
    pub fn transition(&self, p: StateId, x: LetterId) -> StateId {
        self.next[p as usize * self.alphabet.len() + x as usize]
    }

    /// Runs `p` over `buf` in place and returns the state reached.
    #[inline]
    pub fn run_state(&self, mut p: StateId, buf: &mut [LetterId]) -> StateId {
        let k = self.alphabet.len();
        for x in buf.iter_mut() {
            let i = p as usize * k + *x as usize;
            *x = self.out[i];
            p = self.next[i];
        }
        p
    }

    /// Applies `w` to `buf` in place.
    pub fn act_in_place(&self, w: &[StateId], buf: &mut [LetterId]) {
        for &p in w {
            self.run_state(p, buf);
        }
    }

    /// The image of `input` under the word `w`.
    pub fn act(&self, w: &[StateId], input: &[LetterId]) -> LetterWord {
        let mut buf = input.to_vec();
        self.act_in_place(w, &mut buf);
        buf
    }

    /// The residual (section) of `w` after reading `input`.
    pub fn residual(&self, w: &[StateId], input: &[LetterId]) -> StateWord {
        self.run(w, input).1
    }

    /// Output and residual in one pass.
    pub fn run(&self, w: &[StateId], input: &[LetterId]) -> (LetterWord, StateWord) {
        let mut buf = input.to_vec();
        let residual = w.iter().map(|&p| self.run_state(p, &mut buf)).collect();
        (buf, residual)
    }

    /// Reads a single letter: writes the residual into `out_word` and returns
    /// the output letter.
    #[inline]
    pub fn read_letter(&self, w: &[StateId], mut x: LetterId, out_word: &mut Vec<StateId>) -> LetterId {
        out_word.clear();
        let k = self.alphabet.len();
        for &p in w {
            let i = p as usize * k + x as usize;
            out_word.push(self.next[i]);
            x = self.out[i];
        }
        x
    }

    /// Checked action: validates every index first.
    pub fn try_act(&self, w: &[StateId], input: &[LetterId]) -> Result<LetterWord, MealyError> {
        self.check_word(w)?;
        self.check_letters(input)?;
        Ok(self.act(w, input))
    }

    pub fn try_residual(&self, w: &[StateId], input: &[LetterId]) -> Result<StateWord, MealyError> {
        self.check_word(w)?;
        self.check_letters(input)?;
        Ok(self.residual(w, input))
    }

    /// Full grid of the computation of `w` on `input`.
    pub fn cross_diagram(&self, w: &[StateId], input: &[LetterId]) -> Result<CrossDiagramTrace, MealyError> {
        self.check_word(w)?;
        self.check_letters(input)?;
        let mut cells = Vec::with_capacity(w.len() * input.len());
        let mut letters = input.to_vec();
        for &p in w {
            let mut state = p;
            for x in letters.iter_mut() {
                let (y, q) = self.step(state, *x);
                cells.push(Cell {
                    in_state: state,
                    in_letter: *x,
                    out_letter: y,
                    out_state: q,
                });
                *x = y;
                state = q;
            }
        }
        Ok(CrossDiagramTrace {
            word: w.to_vec(),
            input: input.to_vec(),
            cells,
        })
    }

    /// Whether the output of `p` is a permutation of the alphabet.
    pub fn is_bijective_state(&self, p: StateId) -> bool {
        let k = self.alphabet.len();
        let mut seen = vec![false; k];
        for x in 0..k {
            let y = self.output(p, x as LetterId) as usize;
            if std::mem::replace(&mut seen[y], true) {
                return false;
            }
        }
        true
    }

    pub fn is_invertible(&self) -> bool {
        (0..self.states.len()).all(|p| self.is_bijective_state(p as StateId))
    }

    /// Validation report of an already-built (hence total) machine.
    pub fn report(&self) -> ValidationReport {
        ValidationReport {
            non_bijective: (0..self.states.len() as StateId)
                .filter(|&p| !self.is_bijective_state(p))
                .map(|p| self.state_name(p).to_string())
                .collect(),
            ..ValidationReport::default()
        }
    }
}

/// Incrementally filled transition table; the parser and the compilers use it
/// and [`validate_machine`] audits it.
#[derive(Debug, Clone)]
pub struct MealyBuilder {
    states: LabelSet,
    alphabet: LabelSet,
    rows: Vec<Option<(StateId, LetterId)>>,
    dangling: Vec<String>,
    conflicts: Vec<(String, String)>,
    modifying: Option<Vec<bool>>,
    origin: Origin,
}

impl MealyBuilder {
    pub fn new(states: LabelSet, alphabet: LabelSet) -> Self {
        let n = states.len() * alphabet.len();
        Self {
            states,
            alphabet,
            rows: vec![None; n],
            dangling: Vec::new(),
            conflicts: Vec::new(),
            modifying: None,
            origin: Origin::General,
        }
    }

    pub fn states(&self) -> &LabelSet {
        &self.states
    }

    pub fn alphabet(&self) -> &LabelSet {
        &self.alphabet
    }

    pub fn set_origin(&mut self, origin: Origin) {
        self.origin = origin;
    }

    pub fn set_modifying(&mut self, modifying: Vec<bool>) {
        self.modifying = Some(modifying);
    }

    pub fn set(&mut self, p: StateId, x: LetterId, q: StateId, y: LetterId) -> Result<(), MealyError> {
        for s in [p, q] {
            if s as usize >= self.states.len() {
                return Err(MealyError::StateOutOfRange(s));
            }
        }
        for l in [x, y] {
            if l as usize >= self.alphabet.len() {
                return Err(MealyError::LetterOutOfRange(l));
            }
        }
        let slot = &mut self.rows[p as usize * self.alphabet.len() + x as usize];
        if let Some(prev) = slot {
            if *prev != (q, y) {
                self.conflicts.push((
                    self.states.name(p as usize).to_string(),
                    self.alphabet.name(x as usize).to_string(),
                ));
            }
        }
        *slot = Some((q, y));
        Ok(())
    }

    /// Sets a row by labels. Unknown labels are recorded as dangling references
    /// and reported by [`validate_machine`] instead of failing here.
    pub fn set_labels(&mut self, p: &str, x: &str, q: &str, y: &str) {
        let ids = (
            self.states.get(p),
            self.alphabet.get(x),
            self.states.get(q),
            self.alphabet.get(y),
        );
        for (label, id) in [(p, ids.0), (x, ids.1), (q, ids.2), (y, ids.3)] {
            if id.is_none() && !self.dangling.iter().any(|d| d == label) {
                self.dangling.push(label.to_string());
            }
        }
        if let (Some(p), Some(x), Some(q), Some(y)) = ids {
            // indices come from the label sets, so this cannot fail
            let _ = self.set(p as StateId, x as LetterId, q as StateId, y as LetterId);
        }
    }

    pub fn build(self) -> Result<MealyMachine, MealyError> {
        if let Some(d) = self.dangling.first() {
            return Err(MealyError::Dangling(d.clone()));
        }
        if let Some((state, letter)) = self.conflicts.first() {
            return Err(MealyError::Conflict {
                state: state.clone(),
                letter: letter.clone(),
            });
        }
        let k = self.alphabet.len();
        let mut next = Vec::with_capacity(self.rows.len());
        let mut out = Vec::with_capacity(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            match row {
                Some((q, y)) => {
                    next.push(*q);
                    out.push(*y);
                }
                None => {
                    return Err(MealyError::NotTotal {
                        state: self.states.name(i / k).to_string(),
                        letter: self.alphabet.name(i % k).to_string(),
                    })
                }
            }
        }
        if let Some(m) = &self.modifying {
            assert_eq!(m.len(), self.states.len(), "taxonomy length mismatch");
        }
        Ok(MealyMachine {
            states: self.states,
            alphabet: self.alphabet,
            next,
            out,
            modifying: self.modifying,
            origin: self.origin,
            base_states: None,
        })
    }
}

/// Findings of [`validate_machine`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    /// `(state, letter)` pairs without a row.
    pub missing: Vec<(String, String)>,
    /// Labels referenced by rows but not declared.
    pub dangling: Vec<String>,
    /// `(state, letter)` pairs given two different rows.
    pub conflicting: Vec<(String, String)>,
    /// States whose output map is not a permutation of the alphabet.
    pub non_bijective: Vec<String>,
}

impl ValidationReport {
    pub fn is_total(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.missing.is_empty() && self.dangling.is_empty() && self.conflicting.is_empty()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_valid() && self.non_bijective.is_empty()
    }

    pub fn messages(&self) -> Vec<String> {
        let mut msgs = Vec::new();
        if !self.missing.is_empty() {
            let (p, x) = &self.missing[0];
            msgs.push(format!(
                "transition not total: {} missing row(s), first ({p}, {x})",
                self.missing.len()
            ));
        }
        for d in &self.dangling {
            msgs.push(format!("dangling label `{d}`"));
        }
        for (p, x) in &self.conflicting {
            msgs.push(format!("conflicting rows for ({p}, {x})"));
        }
        for p in &self.non_bijective {
            msgs.push(format!("output of `{p}` is not a bijection"));
        }
        msgs
    }
}

/// Audits a (possibly incomplete) table: totality, dangling labels, and
/// bijectivity of each output map over the rows present.
pub fn validate_machine(b: &MealyBuilder) -> ValidationReport {
    let k = b.alphabet.len();
    let mut report = ValidationReport {
        dangling: b.dangling.clone(),
        conflicting: b.conflicts.clone(),
        ..ValidationReport::default()
    };
    for p in 0..b.states.len() {
        let mut seen = vec![false; k];
        let mut injective = true;
        for x in 0..k {
            match b.rows[p * k + x] {
                Some((_, y)) => {
                    if std::mem::replace(&mut seen[y as usize], true) {
                        injective = false;
                    }
                }
                None => {
                    report
                        .missing
                        .push((b.states.name(p).to_string(), b.alphabet.name(x).to_string()));
                }
            }
        }
        if !injective {
            report.non_bijective.push(b.states.name(p).to_string());
        }
    }
    report
}

/// The machine over `A ⊎ A⁻¹`: `σ(p⁻¹, y) = σ_p⁻¹(y)` and
/// `δ(p⁻¹, y) = δ(p, σ_p⁻¹(y))⁻¹`. The first `|A|` states are the original
/// ones, so words over `m` are words over the closure unchanged.
pub fn inverse_closure(m: &MealyMachine) -> Result<MealyMachine, MealyError> {
    if m.is_inverse_closure() {
        return Ok(m.clone());
    }
    let n = m.num_states();
    let k = m.num_letters();
    let mut inverse_out = vec![0 as LetterId; n * k];
    for p in 0..n {
        let mut seen = vec![false; k];
        for x in 0..k {
            let y = m.output(p as StateId, x as LetterId) as usize;
            if std::mem::replace(&mut seen[y], true) {
                return Err(MealyError::NotInvertible(m.state_name(p as StateId).to_string()));
            }
            inverse_out[p * k + y] = x as LetterId;
        }
    }
    let mut names: Vec<String> = m.states().names().to_vec();
    for name in m.states().names() {
        if name.ends_with(INVERSE_SUFFIX) {
            return Err(MealyError::ReservedLabel(name.clone()));
        }
        names.push(format!("{name}{INVERSE_SUFFIX}"));
    }
    let states = LabelSet::new(names)?;
    let mut next = m.next.clone();
    let mut out = m.out.clone();
    next.reserve(n * k);
    out.reserve(n * k);
    for p in 0..n {
        for y in 0..k {
            let x = inverse_out[p * k + y];
            let q = m.transition(p as StateId, x);
            next.push(q + n as StateId);
            out.push(x);
        }
    }
    let modifying = m.modifying.as_ref().map(|flags| {
        let mut doubled = flags.clone();
        doubled.extend_from_slice(flags);
        doubled
    });
    Ok(MealyMachine {
        states,
        alphabet: m.alphabet.clone(),
        next,
        out,
        modifying,
        origin: m.origin,
        base_states: Some(n),
    })
}

/// One cell of a cross diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub in_state: StateId,
    pub in_letter: LetterId,
    pub out_letter: LetterId,
    pub out_state: StateId,
}

/// Materialized cross diagram: rows follow the state word, columns the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossDiagramTrace {
    word: StateWord,
    input: LetterWord,
    cells: Vec<Cell>,
}

impl CrossDiagramTrace {
    pub fn rows(&self) -> usize {
        self.word.len()
    }

    pub fn cols(&self) -> usize {
        self.input.len()
    }

    pub fn cell(&self, row: usize, col: usize) -> Cell {
        self.cells[row * self.input.len() + col]
    }

    /// Bottom boundary: the image of the input.
    pub fn output(&self) -> LetterWord {
        if self.word.is_empty() {
            return self.input.clone();
        }
        let last = self.word.len() - 1;
        (0..self.cols()).map(|j| self.cell(last, j).out_letter).collect()
    }

    /// Right boundary: the residual word.
    pub fn residual(&self) -> StateWord {
        if self.input.is_empty() {
            return self.word.clone();
        }
        let last = self.input.len() - 1;
        (0..self.rows()).map(|i| self.cell(i, last).out_state).collect()
    }

    /// Adjacent cells agree on the shared state or letter.
    pub fn is_coherent(&self) -> bool {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let c = self.cell(i, j);
                let expected_letter = if i == 0 {
                    self.input[j]
                } else {
                    self.cell(i - 1, j).out_letter
                };
                let expected_state = if j == 0 {
                    self.word[i]
                } else {
                    self.cell(i, j - 1).out_state
                };
                if c.in_letter != expected_letter || c.in_state != expected_state {
                    return false;
                }
            }
        }
        true
    }

    /// Aligned text rendering: each row shows the entering state, the letters
    /// produced by that row, and the leaving state.
    pub fn render(&self, m: &MealyMachine) -> String {
        let state_w = self
            .word
            .iter()
            .chain(self.residual().iter())
            .map(|&s| m.state_name(s).len())
            .max()
            .unwrap_or(0);
        let mut col_w = vec![0usize; self.cols()];
        for (j, w) in col_w.iter_mut().enumerate() {
            *w = m.letter_name(self.input[j]).len();
            for i in 0..self.rows() {
                *w = (*w).max(m.letter_name(self.cell(i, j).out_letter).len());
            }
        }
        let mut s = String::new();
        let letters_line = |s: &mut String, letters: &[LetterId]| {
            let _ = write!(s, "{:state_w$}   ", "");
            for (j, &x) in letters.iter().enumerate() {
                let _ = write!(s, " {:^w$}", m.letter_name(x), w = col_w[j]);
            }
            s.push('\n');
        };
        letters_line(&mut s, &self.input);
        for i in 0..self.rows() {
            let row: LetterWord = (0..self.cols()).map(|j| self.cell(i, j).out_letter).collect();
            let end = if self.cols() == 0 {
                self.word[i]
            } else {
                self.cell(i, self.cols() - 1).out_state
            };
            let _ = write!(s, "{:>state_w$} ->", m.state_name(self.word[i]));
            for (j, &x) in row.iter().enumerate() {
                let _ = write!(s, " {:^w$}", m.letter_name(x), w = col_w[j]);
            }
            let _ = writeln!(s, " -> {}", m.state_name(end));
        }
        s
    }
}
