//! Cross diagrams of the automaton-to-Mealy compiler, checked exhaustively on
//! small words.

use autgroup::ca::samples::timer;
use autgroup::ca::{CellState, CellularAutomaton};
use autgroup::construction::{build_simulator, q_expand, Potential, RegularityVerdict, SimulatorMachine};
use autgroup::group::{ClosureLimits, Group, OrderOptions};
use autgroup::mealy::{LetterId, StateId};
use autgroup::tm::mealy::{element_for_tm_config, tm_to_mealy};
use autgroup::tm::samples::{appender, unary_eraser};
use autgroup::tm::{tm_step, StepResult, TmConfiguration, TuringMachine};

fn words<T: Copy>(alphabet: &[T], max_len: usize) -> Vec<Vec<T>> {
    let mut layer = vec![Vec::new()];
    let mut out = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w| alphabet.iter().map(move |&s| [w.clone(), vec![s]].concat()))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn potential(sim: &SimulatorMachine, w: &[StateId]) -> Option<Potential> {
    match sim.classify_regular(w) {
        RegularityVerdict::Regular { potential, .. } => Some(potential),
        RegularityVerdict::NotRegular => None,
    }
}

fn setup() -> (CellularAutomaton, SimulatorMachine) {
    let ca = timer(1);
    let sim = build_simulator(&ca).unwrap();
    (ca, sim)
}

fn all_states(sim: &SimulatorMachine) -> Vec<StateId> {
    (0..sim.machine().num_states() as StateId).collect()
}

#[test]
fn regular_words_raise_bits_within_their_potential() {
    let (ca, sim) = setup();
    let m = sim.machine();
    let cells: Vec<CellState> = (0..ca.num_states() as CellState).collect();
    let mut checked = 0;
    for w in words(&all_states(&sim), 3) {
        let Some(Potential::Finite(n)) = potential(&sim, &w) else {
            continue;
        };
        let q = q_expand(&w).unwrap();
        for a in words(&cells, n.min(2)) {
            let z0 = sim.z_word(&a, 0).unwrap();
            let rho = sim.rho_word(&z0, &w).unwrap();
            assert_eq!(m.act(&q, &z0), sim.z_word(&a, 1).unwrap());
            assert_eq!(m.residual(&q, &z0), q_expand(&rho).unwrap());
            let after = potential(&sim, &rho);
            assert!(
                after == Some(Potential::Finite(n - a.len())) || after == Some(Potential::Infinite),
                "{after:?}"
            );
            checked += 1;
        }
    }
    assert!(checked > 10_000, "{checked}");
}

#[test]
fn long_chains_keep_raising_while_potential_remains() {
    let (ca, sim) = setup();
    let m = sim.machine();
    let live: Vec<CellState> = (0..ca.num_states() as CellState).filter(|&s| !ca.is_final(s)).collect();
    for w in words(&all_states(&sim), 2) {
        if potential(&sim, &w).is_none() {
            continue;
        }
        let q = q_expand(&w).unwrap();
        for a in words(&live, 3) {
            let z0 = sim.z_word(&a, 0).unwrap();
            let rho = sim.rho_word(&z0, &w).unwrap();
            if matches!(potential(&sim, &rho), Some(Potential::Finite(0)) | None) {
                continue;
            }
            assert_eq!(m.act(&q, &z0), sim.z_word(&a, 1).unwrap());
            assert_eq!(m.residual(&q, &z0), q_expand(&rho).unwrap());
        }
    }
}

#[test]
fn count_free_words_ignore_the_bit() {
    let (_, sim) = setup();
    let m = sim.machine();
    let count_free: Vec<StateId> = all_states(&sim).into_iter().filter(|&p| !sim.is_counting(p)).collect();
    for w in words(&count_free, 3) {
        let q = q_expand(&w).unwrap();
        for x in 0..m.num_letters() as LetterId {
            let expected = q_expand(&sim.rho(x, &w).unwrap()).unwrap();
            assert_eq!(m.residual(&q, &[x]), expected);
            assert_eq!(m.residual(&q, &[sim.flip(x)]), expected);
            if potential(&sim, &w) == Some(Potential::Finite(0)) {
                assert_eq!(m.act(&q, &[x]), vec![x]);
            }
        }
    }
}

#[test]
fn discrepancies_collapse_to_infinite_potential() {
    let (ca, sim) = setup();
    let cells: Vec<CellState> = (0..ca.num_states() as CellState).collect();
    for a in words(&cells, 3).into_iter().filter(|a| !a.is_empty()) {
        let c_a = sim.c_word(&a).unwrap();
        for c in words(&cells, 3) {
            let discrepancy = c.iter().zip(&a).any(|(&ci, &ai)| ci != ai || ca.is_final(ci));
            if !discrepancy {
                continue;
            }
            let rho = sim.rho_word(&sim.z_word(&c, 0).unwrap(), &c_a).unwrap();
            assert_eq!(potential(&sim, &rho), Some(Potential::Infinite), "a={a:?} c={c:?}");
        }
    }
}

#[test]
fn configuration_diagrams_before_and_at_the_separator() {
    let (ca, sim) = setup();
    let m = sim.machine();
    let e = ca.default_state();
    let live: Vec<CellState> = (0..ca.num_states() as CellState).filter(|&s| !ca.is_final(s)).collect();
    for a in words(&live, 3).into_iter().filter(|a| !a.is_empty()) {
        let n = a.len();
        let b = ca.update(&a);
        let q = q_expand(&sim.c_word(&a).unwrap()).unwrap();
        let z0 = sim.z_word(&a, 0).unwrap();
        assert_eq!(m.act(&q, &z0), sim.z_word(&a, 1).unwrap());

        let before_last = if n >= 2 { a[n - 2] } else { e };
        let mut middle = sim.p_word(&b[..n - 1]).unwrap();
        middle.push(sim.waiting(before_last, a[n - 1]));
        let middle = q_expand(&middle).unwrap();
        assert_eq!(m.residual(&q, &z0), middle);

        for bit in 0..2 {
            let dollar = sim.letter(sim.dollar(), bit);
            assert_eq!(m.act(&middle, &[dollar]), vec![dollar]);
            assert_eq!(
                m.residual(&middle, &[dollar]),
                q_expand(&sim.c_word(&b[..n]).unwrap()).unwrap()
            );
        }
    }
}

#[test]
fn orders_are_even_or_unknown() {
    let ca = timer(2);
    let sim = build_simulator(&ca).unwrap();
    let limits = ClosureLimits {
        max_visited: 200_000,
        ..ClosureLimits::default()
    };
    let g = Group::with_limits(sim.machine(), limits).unwrap();
    let live: Vec<CellState> = (0..ca.num_states() as CellState).filter(|&s| !ca.is_final(s)).collect();
    let opts = OrderOptions {
        exponent_cap: 1 << 6,
        ..OrderOptions::default()
    };
    let mut finite = 0;
    for a in words(&live, 2).into_iter().filter(|a| !a.is_empty()) {
        let w = sim.element_for_config(&a).unwrap();
        if let Some(order) = g.order(&w, &opts).unwrap().finite() {
            assert!(order % 2 == 0, "{:?} has order {order}", ca.config_labels(&a));
            finite += 1;
        }
    }
    assert!(finite > 0);
}

/// The square of a configuration's element fixes `Z(u $, 0)` and continues as
/// the element of the next configuration, written one cell longer.
fn tm_squares_step(tm: &TuringMachine, start: &TmConfiguration) -> usize {
    let built = tm_to_mealy(tm).unwrap();
    let g = Group::new(built.machine()).unwrap();
    let m = g.machine();
    let mut cfg = start.clone();
    let mut steps = 0;
    while let StepResult::Next(next) = tm_step(tm, &cfg).unwrap() {
        let w = element_for_tm_config(&built, tm, &cfg).unwrap();
        let mut syms = built.padded_word(tm, &cfg).unwrap();
        syms.push(built.dollar());
        let z = built.z_word(&syms, 0);
        let square = g.power(&w, 2);
        let next = built.pad_to(tm, next, syms.len());
        assert_eq!(built.padded_word(tm, &next).unwrap().len(), syms.len());
        assert_eq!(m.act(&square, &z), z);
        assert_eq!(
            m.residual(&square, &z),
            element_for_tm_config(&built, tm, &next).unwrap()
        );
        cfg = next;
        steps += 1;
    }
    steps
}

#[test]
fn tm_element_squares_to_next_configuration() {
    let eraser = unary_eraser();
    assert_eq!(
        tm_squares_step(&eraser, &eraser.config_from_labels(&["s", "1", "1"]).unwrap()),
        2
    );
    let tm = appender();
    assert_eq!(
        tm_squares_step(&tm, &tm.config_from_labels(&["r", "m", "1"]).unwrap()),
        4
    );
}
