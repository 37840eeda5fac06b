//! Typed readers and writers on top of [`Document`].
//!
//! ```text
//! ca v1                     tm v1                      mealy v1
//! states: e c0 f            states: s                  alphabet: 0 1
//! default: e                symbols: q0 1              states: a e
//! final: f                  blank: q0                  origin: general      (optional)
//! t e c0 e -> f             initial: s                 modifying: a         (optional)
//! ...                       phi s 1 -> s q0 R          d a 0 -> e / 1
//! ```

use std::collections::HashMap;

use thiserror::Error;

use super::{DocKind, Document, ParseError, SourceMap, Span};
use crate::ca::{CaBuilder, CaError, CellState, CellularAutomaton, FiniteConfiguration};
use crate::labels::{LabelError, LabelSet};
use crate::mealy::{LetterWord, MealyBuilder, MealyError, MealyMachine, Origin, Sign, StateWord, INVERSE_SUFFIX};
use crate::tm::{Action, Move, TmError, TuringMachine};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("missing header `{0}`")]
    MissingHeader(&'static str),
    #[error(transparent)]
    Labels(#[from] LabelError),
    #[error(transparent)]
    Ca(#[from] CaError),
    #[error(transparent)]
    Tm(#[from] TmError),
    #[error(transparent)]
    Mealy(#[from] MealyError),
}

type Result<T> = std::result::Result<T, FormatError>;

/// Header access with positions for error messages.
struct Headers<'a> {
    doc: &'a Document,
    map: &'a SourceMap,
}

impl<'a> Headers<'a> {
    fn span(&self, key: &str) -> Span {
        let i = self.doc.header.iter().position(|h| h.key == key).unwrap_or(0);
        self.map.header.get(i).copied().unwrap_or_default()
    }

    fn list(&self, key: &'static str) -> Result<&'a [String]> {
        self.doc.field(key).ok_or(FormatError::MissingHeader(key))
    }

    fn labels(&self, key: &'static str) -> Result<LabelSet> {
        let values = self.list(key)?;
        LabelSet::new(values.iter().cloned())
            .map_err(|e| ParseError::new(self.span(key), format!("`{key}`: {e}")).into())
    }

    fn single(&self, key: &'static str) -> Result<&'a str> {
        match self.list(key)? {
            [v] => Ok(v),
            _ => Err(ParseError::new(self.span(key), format!("`{key}` takes exactly one value")).into()),
        }
    }

    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        for (h, span) in self.doc.header.iter().zip(&self.map.header) {
            if !allowed.contains(&h.key.as_str()) {
                return Err(ParseError::new(*span, format!("unknown header `{}`", h.key)).into());
            }
        }
        Ok(())
    }
}

fn lookup(set: &LabelSet, token: &str, span: Span, what: &str) -> std::result::Result<u32, ParseError> {
    set.get(token)
        .map(|i| i as u32)
        .ok_or_else(|| ParseError::new(span, format!("unknown {what} `{token}`")))
}

/// Checks a record against a shape such as `["t", "", "", "", "->", ""]`,
/// where empty entries are free tokens.
fn expect_shape(record: &[String], spans: &[Span], shape: &[&str], usage: &str) -> std::result::Result<(), ParseError> {
    let first = spans.first().copied().unwrap_or_default();
    if record.len() != shape.len() {
        return Err(ParseError::new(first, format!("expected `{usage}`")));
    }
    for ((tok, span), want) in record.iter().zip(spans).zip(shape) {
        if !want.is_empty() && tok != want {
            return Err(ParseError::new(*span, format!("expected `{want}` in `{usage}`")));
        }
    }
    Ok(())
}

pub fn parse_ca(text: &str) -> Result<CellularAutomaton> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Ca)?;
    ca_from_document(&doc, &map)
}

pub fn ca_from_document(doc: &Document, map: &SourceMap) -> Result<CellularAutomaton> {
    let h = Headers { doc, map };
    h.reject_unknown(&["states", "default", "final"])?;
    let states = h.labels("states")?;
    let default = lookup(&states, h.single("default")?, h.span("default"), "state")?;
    let finals = h
        .list("final")?
        .iter()
        .map(|f| lookup(&states, f, h.span("final"), "state"))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut builder = CaBuilder::new(states.clone());
    let mut seen: HashMap<(u32, u32, u32), (u32, usize)> = HashMap::new();
    const USAGE: &str = "t <x> <y> <z> -> <w>";
    for (record, spans) in doc.body.iter().zip(&map.body) {
        expect_shape(record, spans, &["t", "", "", "", "->", ""], USAGE)?;
        let id = |i: usize| lookup(&states, &record[i], spans[i], "state");
        let (x, y, z, w) = (id(1)?, id(2)?, id(3)?, id(5)?);
        if let Some(&(prev, line)) = seen.get(&(x, y, z)) {
            if prev != w {
                let msg = format!("conflicts with the rule on line {line}");
                return Err(ParseError::new(spans[0], msg).into());
            }
        }
        seen.insert((x, y, z), (w, spans[0].line));
        builder.set(x, y, z, w);
    }
    Ok(builder.build(default, &finals)?)
}

pub fn ca_to_document(ca: &CellularAutomaton) -> Document {
    let mut doc = Document::new(DocKind::Ca);
    doc.push_field("states", ca.states().names().iter().cloned());
    doc.push_field("default", [ca.name(ca.default_state())]);
    doc.push_field("final", ca.finals().map(|f| ca.name(f).to_string()));
    let n = ca.num_states() as CellState;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                doc.push_record(["t", ca.name(x), ca.name(y), ca.name(z), "->", ca.name(ca.t(x, y, z))]);
            }
        }
    }
    doc
}

pub fn render_ca(ca: &CellularAutomaton) -> String {
    ca_to_document(ca).render()
}

pub fn parse_tm(text: &str) -> Result<TuringMachine> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Tm)?;
    tm_from_document(&doc, &map)
}

pub fn tm_from_document(doc: &Document, map: &SourceMap) -> Result<TuringMachine> {
    let h = Headers { doc, map };
    h.reject_unknown(&["states", "symbols", "blank", "initial"])?;
    let states = h.labels("states")?;
    let symbols = h.labels("symbols")?;
    let blank = lookup(&symbols, h.single("blank")?, h.span("blank"), "tape symbol")?;
    let initial = lookup(&states, h.single("initial")?, h.span("initial"), "state")?;
    let mut tm = TuringMachine::new(states.clone(), symbols.clone(), initial, blank)?;
    const USAGE: &str = "phi <s> <q> -> <s'> <q'> <L|R>";
    for (record, spans) in doc.body.iter().zip(&map.body) {
        expect_shape(record, spans, &["phi", "", "", "->", "", "", ""], USAGE)?;
        let s = lookup(&states, &record[1], spans[1], "state")?;
        let q = lookup(&symbols, &record[2], spans[2], "tape symbol")?;
        let next = lookup(&states, &record[4], spans[4], "state")?;
        let write = lookup(&symbols, &record[5], spans[5], "tape symbol")?;
        let dir = match record[6].as_str() {
            "L" => Move::Left,
            "R" => Move::Right,
            other => return Err(ParseError::new(spans[6], format!("direction must be L or R, not `{other}`")).into()),
        };
        tm.set_rule(s, q, Action { write, next, dir })
            .map_err(|e| ParseError::new(spans[0], e.to_string()))?;
    }
    Ok(tm)
}

pub fn tm_to_document(tm: &TuringMachine) -> Document {
    let mut doc = Document::new(DocKind::Tm);
    doc.push_field("states", tm.states().names().iter().cloned());
    doc.push_field("symbols", tm.symbols().names().iter().cloned());
    doc.push_field("blank", [tm.symbol_name(tm.blank())]);
    doc.push_field("initial", [tm.state_name(tm.initial())]);
    for (s, q, a) in tm.rules() {
        let dir = match a.dir {
            Move::Left => "L",
            Move::Right => "R",
        };
        doc.push_record([
            "phi",
            tm.state_name(s),
            tm.symbol_name(q),
            "->",
            tm.state_name(a.next),
            tm.symbol_name(a.write),
            dir,
        ]);
    }
    doc
}

pub fn render_tm(tm: &TuringMachine) -> String {
    tm_to_document(tm).render()
}

pub fn parse_mealy(text: &str) -> Result<MealyMachine> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Mealy)?;
    mealy_from_document(&doc, &map)
}

pub fn mealy_from_document(doc: &Document, map: &SourceMap) -> Result<MealyMachine> {
    let h = Headers { doc, map };
    h.reject_unknown(&["alphabet", "states", "origin", "modifying"])?;
    let alphabet = h.labels("alphabet")?;
    let states = h.labels("states")?;
    if let Some(bad) = states.names().iter().find(|s| s.ends_with(INVERSE_SUFFIX)) {
        let msg = format!("state label `{bad}` ends with the reserved inverse marker `{INVERSE_SUFFIX}`");
        return Err(ParseError::new(h.span("states"), msg).into());
    }
    let mut builder = MealyBuilder::new(states.clone(), alphabet.clone());
    if doc.field("origin").is_some() {
        let value = h.single("origin")?;
        let origin = Origin::parse(value)
            .ok_or_else(|| ParseError::new(h.span("origin"), format!("unknown origin `{value}`")))?;
        builder.set_origin(origin);
    }
    if let Some(list) = doc.field("modifying") {
        let mut flags = vec![false; states.len()];
        for label in list {
            flags[lookup(&states, label, h.span("modifying"), "state")? as usize] = true;
        }
        builder.set_modifying(flags);
    }
    let mut seen: HashMap<(u32, u32), ((u32, u32), usize)> = HashMap::new();
    const USAGE: &str = "d <p> <x> -> <q> / <y>";
    for (record, spans) in doc.body.iter().zip(&map.body) {
        expect_shape(record, spans, &["d", "", "", "->", "", "/", ""], USAGE)?;
        let p = lookup(&states, &record[1], spans[1], "state")?;
        let x = lookup(&alphabet, &record[2], spans[2], "letter")?;
        let q = lookup(&states, &record[4], spans[4], "state")?;
        let y = lookup(&alphabet, &record[6], spans[6], "letter")?;
        if let Some(&(prev, line)) = seen.get(&(p, x)) {
            if prev != (q, y) {
                let msg = format!("conflicts with the rule on line {line}");
                return Err(ParseError::new(spans[0], msg).into());
            }
        }
        seen.insert((p, x), ((q, y), spans[0].line));
        builder.set(p, x, q, y)?;
    }
    Ok(builder.build()?)
}

pub fn mealy_to_document(m: &MealyMachine) -> Document {
    let mut doc = Document::new(DocKind::Mealy);
    doc.push_field("alphabet", m.alphabet().names().iter().cloned());
    doc.push_field("states", m.states().names().iter().cloned());
    if m.origin() != Origin::General {
        doc.push_field("origin", [m.origin().as_str()]);
    }
    if let Some(flags) = m.modifying() {
        let names = flags
            .iter()
            .enumerate()
            .filter(|(_, &f)| f)
            .map(|(p, _)| m.state_name(p as u32).to_string());
        doc.push_field("modifying", names);
    }
    for p in 0..m.num_states() as u32 {
        for x in 0..m.num_letters() as u32 {
            let (y, q) = m.step(p, x);
            doc.push_record([
                "d",
                m.state_name(p),
                m.letter_name(x),
                "->",
                m.state_name(q),
                "/",
                m.letter_name(y),
            ]);
        }
    }
    doc
}

pub fn render_mealy(m: &MealyMachine) -> String {
    mealy_to_document(m).render()
}

/// Reads a state word; `p~` stands for the inverse of `p` and needs `m` to be
/// an inverse closure.
pub fn parse_word(text: &str, m: &MealyMachine) -> Result<StateWord> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Word)?;
    let spans = map.body.concat();
    let mut entries = Vec::new();
    for (tok, span) in doc.tokens().zip(spans) {
        let (label, sign) = match tok.strip_suffix(INVERSE_SUFFIX) {
            Some(base) if m.states().get(tok).is_none() => (base, Sign::Neg),
            _ => (tok, Sign::Pos),
        };
        entries.push((lookup(m.states(), label, span, "state")?, sign));
    }
    Ok(m.resolve_signed(&entries)?)
}

pub fn render_word(m: &MealyMachine, w: &[u32]) -> String {
    let mut doc = Document::new(DocKind::Word);
    doc.push_record(m.word_labels(w));
    doc.render()
}

/// Reads letters by label; constructed machines label them `(<symbol>,<bit>)`.
pub fn parse_letters(text: &str, m: &MealyMachine) -> Result<LetterWord> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Letters)?;
    let spans = map.body.concat();
    doc.tokens()
        .zip(spans)
        .map(|(tok, span)| lookup(m.alphabet(), tok, span, "letter").map_err(Into::into))
        .collect()
}

pub fn render_letters(m: &MealyMachine, xs: &[u32]) -> String {
    let mut doc = Document::new(DocKind::Letters);
    doc.push_record(m.letter_labels(xs));
    doc.render()
}

/// A configuration as whitespace-separated labels of `labels`.
pub fn parse_labels(text: &str, labels: &LabelSet, what: &str) -> Result<FiniteConfiguration> {
    let (doc, map) = Document::parse_with_map(text, DocKind::Word)?;
    let spans = map.body.concat();
    doc.tokens()
        .zip(spans)
        .map(|(tok, span)| lookup(labels, tok, span, what).map_err(Into::into))
        .collect()
}
