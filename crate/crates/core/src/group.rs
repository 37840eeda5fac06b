//! The group generated by an invertible Mealy machine: word problem, element
//! orders, and iterated commutators.
//!
//! The word problem is decided by exploring the residual closure
//! `{ residual(w, x⃗) : x⃗ ∈ Σ* }`. Residuals keep the length of `w`, so the
//! closure is finite; `w` is the identity iff no member moves a letter.

use std::sync::Arc;

use indexmap::IndexSet;
use rayon::prelude::*;
use rustc_hash::FxBuildHasher;
use thiserror::Error;

use crate::mealy::{inverse_closure, LetterId, LetterWord, MealyError, MealyMachine, Origin, StateId, StateWord};
use crate::minimal::ElementAutomaton;

/// Closure members, packed little-endian with the group's state width.
type NodeSet = IndexSet<Box<[u8]>, FxBuildHasher>;

/// Nodes per parallel work unit.
const PAR_CHUNK: usize = 2048;

pub const DEFAULT_MAX_VISITED: usize = 10_000_000;
pub const DEFAULT_EXPONENT_CAP: u64 = 1 << 12;
pub const DEFAULT_PROBE_DEPTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Mealy(#[from] MealyError),
    #[error("undecided: closure cap of {cap} visited words reached at depth {depth}")]
    Undecided { cap: usize, depth: usize },
    #[error("commutator depth must be positive")]
    ZeroDepth,
    #[error("exponent cap must be positive")]
    ZeroExponentCap,
}

/// Resource limits of a closure exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosureLimits {
    pub max_visited: usize,
    pub threads: usize,
    /// Decide the word problem on minimal automata of prefixes instead of
    /// the closure of residual words. Verdicts and witnesses are the same;
    /// `visited` then counts states of the largest prefix automaton, and the
    /// cap bounds each unminimized product.
    pub minimize: bool,
}

impl Default for ClosureLimits {
    fn default() -> Self {
        Self {
            max_visited: DEFAULT_MAX_VISITED,
            threads: 1,
            minimize: false,
        }
    }
}

/// Size of an exploration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClosureStats {
    /// Distinct residual words seen, including the starting word.
    pub visited: usize,
    /// Largest breadth-first layer.
    pub frontier_peak: usize,
    /// Number of letters read along the deepest explored layer.
    pub depth: usize,
}

/// Result of a word-problem decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityCheck {
    pub is_identity: bool,
    /// Shortest, lexicographically first input moved by the word.
    pub witness: Option<LetterWord>,
    pub stats: ClosureStats,
}

enum Exploration {
    Exhausted(ClosureStats),
    Moved(LetterWord, ClosureStats),
    DepthReached,
}

/// How [`Group::order`] chooses candidate exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentSearch {
    /// Only powers of two; for machines compiled from automata, whose
    /// elements have order a power of two or infinite.
    PowersOfTwo,
    /// Least common multiples of observed orbit lengths.
    Divisors,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderOptions {
    pub exponent_cap: u64,
    pub probe_depth: usize,
    /// Inputs worth trying before a closure search, such as constructed witnesses.
    pub hints: Vec<LetterWord>,
    /// Defaults to the machine's origin.
    pub search: Option<ExponentSearch>,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            exponent_cap: DEFAULT_EXPONENT_CAP,
            probe_depth: DEFAULT_PROBE_DEPTH,
            hints: Vec::new(),
            search: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessSource {
    /// Breadth-first search over inputs of length at most the probe depth.
    Probe,
    /// A caller-supplied input.
    Hint,
    /// A counterexample of a full closure search.
    Closure,
}

/// An input not fixed by `w^exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonFixedWitness {
    pub exponent: u64,
    pub input: LetterWord,
    pub source: WitnessSource,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteCertificate {
    /// Closure that proved `w^order` trivial.
    pub identity: ClosureStats,
    /// One witness per maximal proper divisor of the order.
    pub witnesses: Vec<NonFixedWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnknownReason {
    /// Every admissible candidate up to the cap was refuted.
    ExponentCap,
    /// Some input has an orbit longer than the cap, so the order exceeds it.
    OrbitExceedsCap,
    /// The closure for `w^exponent` hit the visited cap.
    ClosureCap { exponent: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeSummary {
    pub reason: UnknownReason,
    /// Candidate exponents shown not to be the order.
    pub refuted: Vec<u64>,
    /// The order, if finite, is a multiple of this.
    pub multiple_of: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OrderVerdict {
    Finite { order: u64, certificate: FiniteCertificate },
    UnknownAbove { bound: u64, probe: ProbeSummary },
}

impl OrderVerdict {
    pub fn finite(&self) -> Option<u64> {
        match self {
            OrderVerdict::Finite { order, .. } => Some(*order),
            OrderVerdict::UnknownAbove { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngelVerdict {
    YesAt(u32),
    NoUpTo(u32),
}

/// Children of one node not seen before, or the first letter the node moves.
type Expansion = Result<Vec<Option<Box<[u8]>>>, LetterId>;

/// The group generated by an invertible machine, with its inverse closure.
#[derive(Clone)]
pub struct Group {
    machine: MealyMachine,
    limits: ClosureLimits,
    pool: Option<Arc<rayon::ThreadPool>>,
    /// Bytes per state in stored closure nodes.
    width: usize,
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Group")
            .field("machine", &self.machine)
            .field("limits", &self.limits)
            .finish()
    }
}

impl Group {
    /// Words over `m` are valid words over the group unchanged; inverse
    /// states follow the original ones.
    pub fn new(m: &MealyMachine) -> Result<Self, GroupError> {
        Self::with_limits(m, ClosureLimits::default())
    }

    pub fn with_limits(m: &MealyMachine, limits: ClosureLimits) -> Result<Self, GroupError> {
        let machine = inverse_closure(m)?;
        let pool = if limits.threads > 1 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(limits.threads)
                .build()
                .ok()
                .map(Arc::new)
        } else {
            None
        };
        let width = match machine.num_states() {
            n if n <= 1 << 8 => 1,
            n if n <= 1 << 16 => 2,
            _ => 4,
        };
        Ok(Self {
            machine,
            limits,
            pool,
            width,
        })
    }

    pub fn machine(&self) -> &MealyMachine {
        &self.machine
    }

    pub fn limits(&self) -> ClosureLimits {
        self.limits
    }

    pub fn inverse(&self, w: &[StateId]) -> StateWord {
        self.machine
            .inverse_word(w)
            .expect("group machines are inverse closures")
    }

    /// `w^e` as a word; negative exponents use the inverse.
    pub fn power(&self, w: &[StateId], e: i64) -> StateWord {
        let base = if e < 0 { self.inverse(w) } else { w.to_vec() };
        base.repeat(e.unsigned_abs() as usize)
    }

    /// Decides whether `w` acts trivially on every finite word.
    pub fn is_identity(&self, w: &[StateId]) -> Result<IdentityCheck, GroupError> {
        if self.limits.minimize {
            return self.is_identity_minimized(w);
        }
        match self.explore(w, None)? {
            Exploration::Exhausted(stats) => Ok(IdentityCheck {
                is_identity: true,
                witness: None,
                stats,
            }),
            Exploration::Moved(witness, stats) => Ok(IdentityCheck {
                is_identity: false,
                witness: Some(witness),
                stats,
            }),
            Exploration::DepthReached => unreachable!("unbounded exploration"),
        }
    }

    /// Minimal automaton of `w`, folded one letter at a time.
    fn element_automaton(&self, w: &[StateId]) -> Result<(ElementAutomaton, usize), GroupError> {
        let cap = self.limits.max_visited;
        let mut element = ElementAutomaton::identity(self.machine.num_letters());
        let mut peak = 1;
        for (i, &p) in w.iter().enumerate() {
            element = element
                .then_state(&self.machine, p, cap)
                .map_err(|_| GroupError::Undecided { cap, depth: i })?;
            peak = peak.max(element.num_states());
        }
        Ok((element, peak))
    }

    fn is_identity_minimized(&self, w: &[StateId]) -> Result<IdentityCheck, GroupError> {
        self.machine.check_word(w)?;
        let (element, peak) = self.element_automaton(w)?;
        Ok(check_automaton(&element, peak))
    }

    /// `is_identity(w^e)`. With minimization the automaton of the largest
    /// power built so far is kept and extended one letter at a time; squaring
    /// would multiply automaton sizes.
    fn power_is_identity(
        &self,
        w: &[StateId],
        e: u64,
        cache: &mut Option<PowerCache>,
    ) -> Result<IdentityCheck, GroupError> {
        if !self.limits.minimize {
            return self.is_identity(&self.power(w, e as i64));
        }
        let cap = self.limits.max_visited;
        let k = self.machine.num_letters();
        let mut c = match cache.take() {
            Some(c) if c.exponent <= e => c,
            _ => PowerCache {
                exponent: 0,
                element: ElementAutomaton::identity(k),
                peak: 1,
            },
        };
        while c.exponent < e {
            for (i, &p) in w.iter().enumerate() {
                c.element = c
                    .element
                    .then_state(&self.machine, p, cap)
                    .map_err(|_| GroupError::Undecided {
                        cap,
                        depth: c.exponent as usize * w.len() + i,
                    })?;
                c.peak = c.peak.max(c.element.num_states());
            }
            c.exponent += 1;
        }
        let check = check_automaton(&c.element, c.peak);
        *cache = Some(c);
        Ok(check)
    }

    /// Shortest, lexicographically first input of length at most `depth`
    /// moved by `w`, if any.
    pub fn probe(&self, w: &[StateId], depth: usize) -> Result<Option<LetterWord>, GroupError> {
        Ok(match self.explore(w, Some(depth))? {
            Exploration::Moved(x, _) => Some(x),
            _ => None,
        })
    }

    pub fn are_equivalent(&self, w1: &[StateId], w2: &[StateId]) -> Result<bool, GroupError> {
        let mut w = w1.to_vec();
        w.extend(self.inverse(w2));
        Ok(self.is_identity(&w)?.is_identity)
    }

    /// Smallest `i ≥ 1` with `w^i(x) = x`, if at most `cap`.
    pub fn orbit_of_word(&self, w: &[StateId], x: &[LetterId], cap: u64) -> Result<Option<u64>, GroupError> {
        self.machine.check_word(w)?;
        self.machine.check_letters(x)?;
        Ok(orbit(&self.machine, w, x, cap))
    }

    /// Bounded order search with certificates.
    pub fn order(&self, w: &[StateId], opts: &OrderOptions) -> Result<OrderVerdict, GroupError> {
        self.machine.check_word(w)?;
        if opts.exponent_cap == 0 {
            return Err(GroupError::ZeroExponentCap);
        }
        let cap = opts.exponent_cap;
        let mut search = opts.search.unwrap_or(match self.machine.origin() {
            Origin::General => ExponentSearch::Divisors,
            _ => ExponentSearch::PowersOfTwo,
        });
        // Known inputs with their orbit lengths under w.
        let mut known: Vec<(LetterWord, u64, WitnessSource)> = Vec::new();
        let mut multiple_of = 1u64;
        let mut refuted = Vec::new();
        let mut automaton = None;
        let unknown = |reason, refuted: Vec<u64>, multiple_of| OrderVerdict::UnknownAbove {
            bound: cap,
            probe: ProbeSummary {
                reason,
                refuted,
                multiple_of,
            },
        };

        for hint in &opts.hints {
            self.machine.check_letters(hint)?;
            match orbit(&self.machine, w, hint, cap) {
                Some(o) => {
                    multiple_of = lcm(multiple_of, o);
                    known.push((hint.clone(), o, WitnessSource::Hint));
                }
                None => return Ok(unknown(UnknownReason::OrbitExceedsCap, refuted, multiple_of)),
            }
        }

        loop {
            if search == ExponentSearch::PowersOfTwo && !multiple_of.is_power_of_two() {
                search = ExponentSearch::Divisors;
            }
            let candidate = multiple_of;
            if candidate > cap {
                return Ok(unknown(UnknownReason::ExponentCap, refuted, multiple_of));
            }
            let check = match self.power_is_identity(w, candidate, &mut automaton) {
                Ok(c) => c,
                Err(GroupError::Undecided { .. }) => {
                    return Ok(unknown(
                        UnknownReason::ClosureCap { exponent: candidate },
                        refuted,
                        multiple_of,
                    ))
                }
                Err(e) => return Err(e),
            };
            if check.is_identity {
                let witnesses = self.divisor_witnesses(w, candidate, opts.probe_depth, &known)?;
                return Ok(OrderVerdict::Finite {
                    order: candidate,
                    certificate: FiniteCertificate {
                        identity: check.stats,
                        witnesses,
                    },
                });
            }
            refuted.push(candidate);
            let x = check.witness.expect("non-identity has a witness");
            match orbit(&self.machine, w, &x, cap) {
                Some(o) => {
                    multiple_of = lcm(multiple_of, o);
                    known.push((x, o, WitnessSource::Closure));
                }
                None => return Ok(unknown(UnknownReason::OrbitExceedsCap, refuted, multiple_of)),
            }
        }
    }

    /// For each maximal proper divisor `d` of `order`, an input not fixed by
    /// `w^d`: a probe first, then a known input whose orbit does not divide `d`.
    fn divisor_witnesses(
        &self,
        w: &[StateId],
        order: u64,
        probe_depth: usize,
        known: &[(LetterWord, u64, WitnessSource)],
    ) -> Result<Vec<NonFixedWitness>, GroupError> {
        let mut out = Vec::new();
        for p in prime_factors(order) {
            let d = order / p;
            let wd = self.power(w, d as i64);
            let probed = match self.probe(&wd, probe_depth) {
                Ok(found) => found,
                Err(GroupError::Undecided { .. }) => None,
                Err(e) => return Err(e),
            };
            let witness = match probed {
                Some(x) => NonFixedWitness {
                    exponent: d,
                    input: x,
                    source: WitnessSource::Probe,
                },
                None => {
                    let (x, _, source) = known
                        .iter()
                        .filter(|(_, o, _)| !d.is_multiple_of(*o))
                        .min_by_key(|(_, _, s)| *s != WitnessSource::Hint)
                        .expect("order is the lcm of known orbits");
                    NonFixedWitness {
                        exponent: d,
                        input: x.clone(),
                        source: *source,
                    }
                }
            };
            out.push(witness);
        }
        Ok(out)
    }

    /// `[...[[v, h], h], ..., h]` with `n` commutators, `[g, h] = g⁻¹h⁻¹gh`.
    pub fn iterated_commutator(&self, v: &[StateId], h: &[StateId], n: u32) -> Result<StateWord, GroupError> {
        if n == 0 {
            return Err(GroupError::ZeroDepth);
        }
        self.machine.check_word(v)?;
        self.machine.check_word(h)?;
        let h_inv = self.inverse(h);
        let mut g = v.to_vec();
        for _ in 0..n {
            let mut next = self.inverse(&g);
            next.extend_from_slice(&h_inv);
            next.extend_from_slice(&g);
            next.extend_from_slice(h);
            g = next;
        }
        Ok(g)
    }

    /// Smallest `n ≤ n_cap` whose iterated commutator is trivial.
    pub fn is_engel_pair(&self, v: &[StateId], h: &[StateId], n_cap: u32) -> Result<EngelVerdict, GroupError> {
        self.machine.check_word(v)?;
        self.machine.check_word(h)?;
        let h_inv = self.inverse(h);
        let mut g = v.to_vec();
        for n in 1..=n_cap {
            let mut next = self.inverse(&g);
            next.extend_from_slice(&h_inv);
            next.extend_from_slice(&g);
            next.extend_from_slice(h);
            g = next;
            if self.is_identity(&g)?.is_identity {
                return Ok(EngelVerdict::YesAt(n));
            }
        }
        Ok(EngelVerdict::NoUpTo(n_cap))
    }

    fn explore(&self, w: &[StateId], max_depth: Option<usize>) -> Result<Exploration, GroupError> {
        self.machine.check_word(w)?;
        let k = self.machine.num_letters();
        let mut nodes = NodeSet::default();
        let mut packed: Vec<u8> = Vec::with_capacity(w.len() * self.width);
        nodes.insert(self.pack(w, &mut packed).into());
        let mut parent: Vec<(u32, LetterId)> = vec![(u32::MAX, 0)];
        let mut stats = ClosureStats {
            visited: 1,
            frontier_peak: 1,
            depth: 0,
        };
        let mut layer_start = 0;
        let mut scratch: Vec<StateId> = Vec::with_capacity(w.len());
        let mut current: Vec<StateId> = Vec::with_capacity(w.len());
        loop {
            let layer_end = nodes.len();
            if layer_start == layer_end {
                return Ok(Exploration::Exhausted(stats));
            }
            if max_depth == Some(stats.depth) {
                return Ok(Exploration::DepthReached);
            }
            stats.frontier_peak = stats.frontier_peak.max(layer_end - layer_start);
            let moved = match &self.pool {
                Some(pool) if layer_end - layer_start > PAR_CHUNK => {
                    self.expand_parallel(pool, &mut nodes, &mut parent, layer_start..layer_end, &mut stats)?
                }
                _ => {
                    let mut moved = None;
                    'layer: for i in layer_start..layer_end {
                        self.unpack(&nodes[i], &mut current);
                        for x in 0..k as LetterId {
                            let y = self.machine.read_letter(&current, x, &mut scratch);
                            if y != x {
                                moved = Some((i, x));
                                break 'layer;
                            }
                            let child = self.pack(&scratch, &mut packed);
                            if !nodes.contains(child) {
                                self.insert(&mut nodes, &mut parent, child.into(), i, x, &stats)?;
                            }
                        }
                    }
                    moved
                }
            };
            stats.visited = nodes.len();
            if let Some((i, x)) = moved {
                let mut path = vec![x];
                let mut at = i;
                while parent[at].0 != u32::MAX {
                    path.push(parent[at].1);
                    at = parent[at].0 as usize;
                }
                path.reverse();
                return Ok(Exploration::Moved(path, stats));
            }
            stats.depth += 1;
            layer_start = layer_end;
        }
    }

    fn pack<'a>(&self, w: &[StateId], buf: &'a mut Vec<u8>) -> &'a [u8] {
        buf.clear();
        for &s in w {
            buf.extend_from_slice(&s.to_le_bytes()[..self.width]);
        }
        buf
    }

    fn unpack(&self, bytes: &[u8], out: &mut Vec<StateId>) {
        out.clear();
        out.extend(bytes.chunks_exact(self.width).map(|c| {
            let mut b = [0u8; 4];
            b[..self.width].copy_from_slice(c);
            StateId::from_le_bytes(b)
        }));
    }

    fn insert(
        &self,
        nodes: &mut NodeSet,
        parent: &mut Vec<(u32, LetterId)>,
        word: Box<[u8]>,
        from: usize,
        x: LetterId,
        stats: &ClosureStats,
    ) -> Result<(), GroupError> {
        if nodes.insert(word) {
            parent.push((from as u32, x));
            if nodes.len() > self.limits.max_visited {
                return Err(GroupError::Undecided {
                    cap: self.limits.max_visited,
                    depth: stats.depth + 1,
                });
            }
        }
        Ok(())
    }

    /// Expands a layer in parallel chunks; insertion stays sequential and in
    /// order, so the closure and the witness match the sequential run.
    fn expand_parallel(
        &self,
        pool: &rayon::ThreadPool,
        nodes: &mut NodeSet,
        parent: &mut Vec<(u32, LetterId)>,
        layer: std::ops::Range<usize>,
        stats: &mut ClosureStats,
    ) -> Result<Option<(usize, LetterId)>, GroupError> {
        let k = self.machine.num_letters();
        let mut start = layer.start;
        while start < layer.end {
            let end = (start + PAR_CHUNK).min(layer.end);
            let frozen: &NodeSet = nodes;
            let results: Vec<Expansion> = pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| {
                        let mut node = Vec::new();
                        self.unpack(&frozen[i], &mut node);
                        let mut scratch = Vec::with_capacity(node.len());
                        let mut packed = Vec::with_capacity(frozen[i].len());
                        let mut children = Vec::with_capacity(k);
                        for x in 0..k as LetterId {
                            let y = self.machine.read_letter(&node, x, &mut scratch);
                            if y != x {
                                return Err(x);
                            }
                            let child = self.pack(&scratch, &mut packed);
                            children.push(if frozen.contains(child) {
                                None
                            } else {
                                Some(child.into())
                            });
                        }
                        Ok(children)
                    })
                    .collect()
            });
            for (offset, result) in results.into_iter().enumerate() {
                let i = start + offset;
                match result {
                    Err(x) => return Ok(Some((i, x))),
                    Ok(children) => {
                        for (x, child) in children.into_iter().enumerate() {
                            if let Some(c) = child {
                                self.insert(nodes, parent, c, i, x as LetterId, stats)?;
                            }
                        }
                    }
                }
            }
            stats.visited = nodes.len();
            start = end;
        }
        Ok(None)
    }
}

/// Minimal automaton of `w^exponent` kept across order candidates.
struct PowerCache {
    exponent: u64,
    element: ElementAutomaton,
    peak: usize,
}

fn check_automaton(element: &ElementAutomaton, peak: usize) -> IdentityCheck {
    let witness = element.witness();
    IdentityCheck {
        is_identity: witness.is_none(),
        stats: ClosureStats {
            visited: peak,
            frontier_peak: element.num_states(),
            depth: witness.as_ref().map_or(0, |(_, d)| *d),
        },
        witness: witness.map(|(x, _)| x),
    }
}

/// Orbit length of `x` under `w`, if at most `cap`.
fn orbit(m: &MealyMachine, w: &[StateId], x: &[LetterId], cap: u64) -> Option<u64> {
    let mut buf = x.to_vec();
    for i in 1..=cap {
        m.act_in_place(w, &mut buf);
        if buf == x {
            return Some(i);
        }
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    (a / gcd(a, b)).saturating_mul(b)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::LabelSet;

    /// The adding machine: `a` adds one to a binary number read least
    /// significant bit first; infinite order.
    fn adding_machine() -> MealyMachine {
        let states = LabelSet::new(["a", "e"]).unwrap();
        let letters = LabelSet::new(["0", "1"]).unwrap();
        MealyMachine::from_fn(states, letters, |p, x| match (p, x) {
            (0, 0) => (1, 1),
            (0, 1) => (0, 0),
            _ => (1, x),
        })
        .unwrap()
    }

    /// Cyclic rotation of three letters, then identity.
    fn rotation() -> MealyMachine {
        let states = LabelSet::new(["r", "e"]).unwrap();
        let letters = LabelSet::new(["0", "1", "2"]).unwrap();
        MealyMachine::from_fn(states, letters, |p, x| if p == 0 { (1, (x + 1) % 3) } else { (1, x) }).unwrap()
    }

    #[test]
    fn inverse_pairs_are_trivial() {
        let g = Group::new(&adding_machine()).unwrap();
        assert!(g.is_identity(&[0, 2]).unwrap().is_identity);
        assert!(g.is_identity(&[]).unwrap().is_identity);
        let check = g.is_identity(&[0]).unwrap();
        assert!(!check.is_identity);
        assert_eq!(check.witness, Some(vec![0]));
    }

    #[test]
    fn witness_is_shortest_and_lexicographically_first() {
        let g = Group::new(&adding_machine()).unwrap();
        // a^2 fixes the first bit and adds one from the second bit on.
        let check = g.is_identity(&[0, 0]).unwrap();
        assert_eq!(check.witness, Some(vec![0, 0]));
        let x = check.witness.unwrap();
        assert_ne!(g.machine().act(&[0, 0], &x), x);
    }

    #[test]
    fn adding_machine_order_is_unknown_above_cap() {
        let g = Group::new(&adding_machine()).unwrap();
        let opts = OrderOptions {
            exponent_cap: 64,
            ..OrderOptions::default()
        };
        match g.order(&[0], &opts).unwrap() {
            OrderVerdict::UnknownAbove { bound, probe } => {
                assert_eq!(bound, 64);
                assert!(probe.multiple_of >= 64);
            }
            v => panic!("unexpected {v:?}"),
        }
    }

    #[test]
    fn rotation_has_order_three_with_certificate() {
        let g = Group::new(&rotation()).unwrap();
        let verdict = g.order(&[0], &OrderOptions::default()).unwrap();
        match verdict {
            OrderVerdict::Finite { order, certificate } => {
                assert_eq!(order, 3);
                assert_eq!(certificate.witnesses.len(), 1);
                let w = &certificate.witnesses[0];
                assert_eq!(w.exponent, 1);
                assert_eq!(w.source, WitnessSource::Probe);
                assert_ne!(g.machine().act(&[0], &w.input), w.input);
            }
            v => panic!("unexpected {v:?}"),
        }
        assert_eq!(g.order(&[], &OrderOptions::default()).unwrap().finite(), Some(1));
    }

    #[test]
    fn mixed_orbits_give_lcm() {
        // r rotates three letters while s swaps two others.
        let states = LabelSet::new(["t", "e"]).unwrap();
        let letters = LabelSet::new(["0", "1", "2", "3", "4"]).unwrap();
        let m = MealyMachine::from_fn(states, letters, |p, x| {
            let y = if p == 1 {
                x
            } else {
                match x {
                    0 => 1,
                    1 => 2,
                    2 => 0,
                    3 => 4,
                    _ => 3,
                }
            };
            (1, y)
        })
        .unwrap();
        let g = Group::new(&m).unwrap();
        let verdict = g.order(&[0], &OrderOptions::default()).unwrap();
        let OrderVerdict::Finite { order, certificate } = verdict else {
            panic!("expected finite");
        };
        assert_eq!(order, 6);
        let exps: Vec<u64> = certificate.witnesses.iter().map(|w| w.exponent).collect();
        assert_eq!(exps, vec![3, 2]);
        for w in &certificate.witnesses {
            let p = g.power(&[0], w.exponent as i64);
            assert_ne!(g.machine().act(&p, &w.input), w.input);
        }
    }

    #[test]
    fn closure_cap_is_undecided_not_false() {
        let limits = ClosureLimits {
            max_visited: 1,
            ..ClosureLimits::default()
        };
        let g = Group::with_limits(&adding_machine(), limits).unwrap();
        // a a~ has residuals beyond the starting word
        assert!(matches!(
            g.is_identity(&[0, 2]),
            Err(GroupError::Undecided { cap: 1, .. })
        ));
    }

    #[test]
    fn commutator_lengths_and_trivial_base() {
        let g = Group::new(&adding_machine()).unwrap();
        assert_eq!(g.iterated_commutator(&[0], &[0], 0), Err(GroupError::ZeroDepth));
        for n in 1..=4u32 {
            let c = g.iterated_commutator(&[0, 0], &[0], n).unwrap();
            assert_eq!(c.len(), (1 << n) * 2 + ((1 << (n + 1)) - 2));
        }
        let c = g.iterated_commutator(&[1], &[0], 1).unwrap();
        assert!(g.is_identity(&c).unwrap().is_identity);
        assert_eq!(g.is_engel_pair(&[1], &[0], 3).unwrap(), EngelVerdict::YesAt(1));
        // abelian: [a, a] is trivial
        assert_eq!(g.is_engel_pair(&[0], &[0], 3).unwrap(), EngelVerdict::YesAt(1));
    }

    #[test]
    fn parallel_exploration_matches_sequential() {
        let m = adding_machine();
        let seq = Group::new(&m).unwrap();
        let par = Group::with_limits(
            &m,
            ClosureLimits {
                threads: 4,
                ..ClosureLimits::default()
            },
        )
        .unwrap();
        let w = [0, 0, 2, 0, 2, 2, 0, 2];
        assert_eq!(seq.is_identity(&w).unwrap(), par.is_identity(&w).unwrap());
    }

    #[test]
    fn helpers() {
        assert_eq!(lcm(4, 6), 12);
        assert_eq!(prime_factors(360), vec![2, 3, 5]);
        assert_eq!(prime_factors(1), Vec::<u64>::new());
    }
}
