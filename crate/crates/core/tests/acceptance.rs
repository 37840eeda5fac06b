//! Acceptance suite: one pass/fail line per criterion. Every value check is
//! exact; wall-clock limits are listed per criterion.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use autgroup::ca::samples::{shift, timer};
use autgroup::ca::{CellState, CellularAutomaton};
use autgroup::construction::{
    build_simulator, q_expand, Potential, PredictedOrder, RegularityVerdict, SimulatorMachine,
};
use autgroup::group::{ClosureLimits, EngelVerdict, Group, OrderOptions, OrderVerdict, UnknownReason};
use autgroup::io;
use autgroup::mealy::{LetterId, MealyMachine, StateId};
use autgroup::random::{random_invertible, random_word};
use autgroup::tm::mealy::{element_for_tm_config, prune_unused_right_targets, tm_to_mealy};
use autgroup::tm::samples::{appender, looping, unary_eraser};
use autgroup::tm::smith::tm_to_ca;
use autgroup::tm::{tm_step, StepResult, TuringMachine};

/// Order of the unary eraser's element on `s 1`, pinned from the first run.
const ERASER_ORDER_GOLDEN: u64 = 4;
const ORACLE_SEED: u64 = 0x0a11_ce55;
const PARITY_SEED: u64 = 0x9a41_7e55;

type Outcome = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn all_inputs(k: usize, len: usize) -> impl Iterator<Item = Vec<LetterId>> {
    (0..k.pow(len as u32)).map(move |mut i| {
        (0..len)
            .map(|_| {
                let x = (i % k) as LetterId;
                i /= k;
                x
            })
            .collect()
    })
}

fn cells(ca: &CellularAutomaton, s: &str) -> Vec<CellState> {
    ca.config_from_labels(&s.split_whitespace().collect::<Vec<_>>())
        .expect("fixture configuration")
}

fn counting_checks() -> Outcome {
    let ca = timer(11);
    ensure!(ca.num_states() == 14, "timer(11) has {} states", ca.num_states());
    let sim = build_simulator(&ca).map_err(err)?;
    let (letters, states) = (sim.machine().num_letters(), sim.machine().num_states());
    ensure!(
        (letters, states) == (30, 421),
        "14-state CA gave {letters} letters, {states} states"
    );

    let tm = io::parse_tm(include_str!("../../../fixtures/six_by_four.tm")).map_err(err)?;
    let full = tm_to_mealy(&tm).map_err(err)?;
    let (letters, states) = (full.machine().num_letters(), full.machine().num_states());
    ensure!(
        (letters, states) == (22, 81),
        "6x4 TM gave {letters} letters, {states} states"
    );
    let pruned = prune_unused_right_targets(&full, &tm).map_err(err)?;
    let states = pruned.machine().num_states();
    ensure!(states == 77, "pruned 6x4 TM gave {states} states");
    Ok("|Σ|=30 |A|=421; TM 22/81, pruned 77".into())
}

fn timer_orders() -> Outcome {
    let ca = timer(3);
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    let mut found = Vec::new();
    for k in 1..=3usize {
        let a = cells(&ca, &format!("c{k}"));
        let expected = 1u64 << (k + 2);
        let predicted = sim.predicted_order(&a, 10).map_err(err)?;
        ensure!(
            predicted == PredictedOrder::Exactly(expected),
            "c{k}: predicted {predicted:?}"
        );
        let w = sim.element_for_config(&a).map_err(err)?;
        ensure!(
            g.is_identity(&g.power(&w, expected as i64)).map_err(err)?.is_identity,
            "c{k}: w^{expected} is not trivial"
        );
        let witness = sim.witness_word(&a, k, None).map_err(err)?;
        let orbit = g.orbit_of_word(&w, &witness, 1 << 20).map_err(err)?;
        ensure!(orbit == Some(expected), "c{k}: witness orbit {orbit:?}");
        let opts = OrderOptions {
            hints: vec![witness],
            ..OrderOptions::default()
        };
        let order = g.order(&w, &opts).map_err(err)?.finite();
        ensure!(order == Some(expected), "c{k}: certified order {order:?}");
        found.push(expected);
    }
    Ok(format!("orders {found:?} predicted and certified"))
}

fn order_two() -> Outcome {
    let ca = timer(1);
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    for config in ["f", "c1 f", "f e c0", "e f"] {
        let a = cells(&ca, config);
        ensure!(
            sim.predicted_order(&a, 5).map_err(err)? == PredictedOrder::ExactlyTwo,
            "{config}: prediction"
        );
        let w = sim.element_for_config(&a).map_err(err)?;
        let order = g.order(&w, &OrderOptions::default()).map_err(err)?.finite();
        ensure!(order == Some(2), "{config}: certified order {order:?}");
    }
    Ok("4 configurations with f certified at order 2".into())
}

/// act(g², Z(a$,0)·y) = Z(a$,0)·act(g′, y) for every y up to length 4.
fn squaring() -> Outcome {
    let ca = timer(1);
    let sim = build_simulator(&ca).map_err(err)?;
    let m = sim.machine();
    let non_final: Vec<CellState> = (0..ca.num_states() as CellState).filter(|&s| !ca.is_final(s)).collect();
    let mut configs = vec![Vec::new()];
    let mut checked = 0usize;
    for len in 1..=3 {
        configs = configs
            .iter()
            .flat_map(|c| non_final.iter().map(move |&s| [c.clone(), vec![s]].concat()))
            .collect();
        assert!(configs.iter().all(|c| c.len() == len));
        for a in &configs {
            let g = sim.element_for_config(a).map_err(err)?;
            let g2 = [g.clone(), g].concat();
            let next = sim.element_for_config(&ca.update(a)).map_err(err)?;
            let mut syms = a.clone();
            syms.push(sim.dollar());
            let prefix = sim.z_word(&syms, 0).map_err(err)?;
            for d in 0..=4 {
                for y in all_inputs(m.num_letters(), d) {
                    let input = [prefix.clone(), y.clone()].concat();
                    let expected = [prefix.clone(), m.act(&next, &y)].concat();
                    ensure!(
                        m.act(&g2, &input) == expected,
                        "a={:?} y={:?}",
                        ca.config_labels(a),
                        m.letter_labels(&y)
                    );
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (a, y) pairs"))
}

fn regular_words(sim: &SimulatorMachine, max_len: usize) -> Vec<Vec<StateId>> {
    let n = sim.machine().num_states() as StateId;
    let mut layer: Vec<Vec<StateId>> = vec![Vec::new()];
    let mut out = Vec::new();
    for _ in 0..max_len {
        // Extending a non-regular word never makes it regular.
        layer = layer
            .iter()
            .flat_map(|w| (0..n).map(move |p| [w.clone(), vec![p]].concat()))
            .filter(|w| matches!(sim.classify_regular(w), RegularityVerdict::Regular { .. }))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn compiler_suites() -> Outcome {
    let ca = timer(1);
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    let m = sim.machine();
    let (n, k) = (m.num_states() as StateId, m.num_letters() as LetterId);
    let neg = sim.neg();

    for p in 0..n {
        ensure!(
            g.are_equivalent(&[p, neg, p], &[neg]).map_err(err)?,
            "p neg p != neg for {}",
            m.state_name(p)
        );
    }

    let mut words = vec![Vec::new()];
    let mut collapsed = 0;
    for _ in 0..=3 {
        for w in &words {
            let q = q_expand(&[w.clone(), vec![neg]].concat()).map_err(err)?;
            ensure!(
                g.are_equivalent(&q, &[neg]).map_err(err)?,
                "Q(w neg) != neg for {:?}",
                m.word_labels(w)
            );
            collapsed += 1;
        }
        words = words
            .iter()
            .flat_map(|w| (0..n).map(move |p| [w.clone(), vec![p]].concat()))
            .collect();
    }

    let regular = regular_words(&sim, 4);
    for w in &regular {
        let RegularityVerdict::Regular { potential, .. } = sim.classify_regular(w) else {
            unreachable!()
        };
        let q = q_expand(w).map_err(err)?;
        for x in 0..k {
            let rho = sim.rho(x, w).map_err(err)?;
            ensure!(
                m.residual(&q, &[x]) == q_expand(&rho).map_err(err)?,
                "δ_x(Q(w)) != Q(ρ_x(w)) for {:?}",
                m.word_labels(w)
            );
            if potential == Potential::Finite(0) {
                ensure!(m.act(&q, &[x]) == vec![x], "potential-0 word moved a letter");
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PARITY_SEED);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=16);
        let w = random_word(&mut rng, n as usize, len);
        let odd = w.iter().filter(|&&p| sim.is_modifying(p)).count() % 2 == 1;
        for x in 0..k {
            let expected = if odd { sim.flip(x) } else { x };
            ensure!(
                m.act(&w, &[x]) == vec![expected],
                "parity fails on {:?}",
                m.word_labels(&w)
            );
        }
    }

    let early = early_fix(&ca, &sim)?;
    let chain = order_sandwich()?;
    Ok(format!(
        "{n} conjugations, {collapsed} Q-collapses, {} regular words, 1000 parity words, {early} early-fix inputs, chain {chain:?}",
        regular.len()
    ))
}

/// The three early-fix statements, exhaustively at depth |a|+2 for |a| ≤ 2.
fn early_fix(ca: &CellularAutomaton, sim: &SimulatorMachine) -> Result<usize, String> {
    let m = sim.machine();
    let t = ca.num_states() as CellState;
    let mut count = 0;
    let mut configs: Vec<Vec<CellState>> = vec![Vec::new()];
    for len in 0..=2usize {
        for a in &configs {
            let g = sim.element_for_config(a).map_err(err)?;
            let g2 = g.repeat(2);
            let g4 = g.repeat(4);
            for x in all_inputs(m.num_letters(), len + 2) {
                let parts: Vec<(CellState, u8)> = x.iter().map(|&l| sim.letter_parts(l)).collect();
                let final_early = parts[..len].iter().any(|&(c, _)| c < t && ca.is_final(c));
                let wrong_early = parts[..len].iter().zip(a).any(|(&(c, bit), &ai)| c != ai || bit != 0);
                let no_dollar = parts[len].0 != sim.dollar();
                if final_early || wrong_early {
                    ensure!(
                        m.act(&g2, &x) == x,
                        "g² moves {:?} for a={:?}",
                        m.letter_labels(&x),
                        ca.config_labels(a)
                    );
                }
                if no_dollar {
                    ensure!(
                        m.act(&g4, &x) == x,
                        "g⁴ moves {:?} for a={:?}",
                        m.letter_labels(&x),
                        ca.config_labels(a)
                    );
                }
                count += 1;
            }
        }
        configs = configs
            .iter()
            .flat_map(|c| (0..t).map(move |s| [c.clone(), vec![s]].concat()))
            .collect();
    }
    Ok(count)
}

/// Orders along c3 → c2 e → c1 e e → c0 e e e → f e e e e, each twice the next.
fn order_sandwich() -> Result<Vec<u64>, String> {
    let ca = timer(3);
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    let mut a = cells(&ca, "c3");
    let mut orders = Vec::new();
    loop {
        let w = sim.element_for_config(&a).map_err(err)?;
        let order = g.order(&w, &OrderOptions::default()).map_err(err)?.finite();
        let order = order.ok_or_else(|| format!("no certificate for {:?}", ca.config_labels(&a)))?;
        orders.push(order);
        if ca.has_final(&a) {
            break;
        }
        a = ca.update(&a);
    }
    ensure!(
        orders.windows(2).all(|p| p[0] == 2 * p[1]),
        "orders along the chain: {orders:?}"
    );
    ensure!(
        orders.last() == Some(&2),
        "halted configuration has order {:?}",
        orders.last()
    );
    Ok(orders)
}

fn engel() -> Outcome {
    let ca = timer(1);
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    let v = sim.element_for_config(&cells(&ca, "c1")).map_err(err)?;
    let h = sim.engel_partner();
    let verdict = g.is_engel_pair(&v, &h, 4).map_err(err)?;
    ensure!(verdict == EngelVerdict::YesAt(3), "timer c1: {verdict:?}");
    for cap in 1..=2 {
        let verdict = g.is_engel_pair(&v, &h, cap).map_err(err)?;
        ensure!(
            verdict == EngelVerdict::NoUpTo(cap),
            "timer c1 with cap {cap}: {verdict:?}"
        );
    }

    let ca = shift();
    let sim = build_simulator(&ca).map_err(err)?;
    let g = Group::new(sim.machine()).map_err(err)?;
    let v = sim.element_for_config(&cells(&ca, "e")).map_err(err)?;
    let verdict = g.is_engel_pair(&v, &sim.engel_partner(), 4).map_err(err)?;
    ensure!(verdict == EngelVerdict::NoUpTo(4), "shift e: {verdict:?}");
    Ok("timer YesAt(3), shift NoUpTo(4)".into())
}

fn tm_pipeline() -> Outcome {
    let tm = unary_eraser();
    let built = tm_to_mealy(&tm).map_err(err)?;
    let limits = ClosureLimits {
        minimize: true,
        ..ClosureLimits::default()
    };
    let g = Group::with_limits(built.machine(), limits).map_err(err)?;
    let cfg = tm.config_from_labels(&["s", "1"]).map_err(err)?;
    let w = element_for_tm_config(&built, &tm, &cfg).map_err(err)?;
    let verdict = g.order(&w, &OrderOptions::default()).map_err(err)?;
    let order = verdict.finite();
    ensure!(order == Some(ERASER_ORDER_GOLDEN), "eraser: {verdict:?}");

    let tm = looping();
    let built = tm_to_mealy(&tm).map_err(err)?;
    let g = Group::new(built.machine()).map_err(err)?;
    let start = tm.config_from_labels(&["s"]).map_err(err)?;
    let w = element_for_tm_config(&built, &tm, &start).map_err(err)?;
    let (mut input, last) = built.trajectory_input(&tm, &start, 10).map_err(err)?;
    let last_element = element_for_tm_config(&built, &tm, &last).map_err(err)?;
    let tail = g
        .is_identity(&last_element)
        .map_err(err)?
        .witness
        .ok_or("last element is trivial")?;
    input.extend(tail);
    for j in 1..=10 {
        let opts = OrderOptions {
            exponent_cap: 1 << j,
            hints: vec![input.clone()],
            ..OrderOptions::default()
        };
        match g.order(&w, &opts).map_err(err)? {
            OrderVerdict::UnknownAbove { bound, probe } if bound == 1 << j => {
                ensure!(
                    probe.reason == UnknownReason::OrbitExceedsCap,
                    "looping, cap 2^{j}: {:?}",
                    probe.reason
                )
            }
            other => return Err(format!("looping, cap 2^{j}: {other:?}")),
        }
    }
    Ok(format!(
        "eraser Finite({ERASER_ORDER_GOLDEN}); looping UnknownAbove at caps 2^1..2^10"
    ))
}

fn bisimulate(tm: &TuringMachine, config: &[&str], steps: usize) -> Result<usize, String> {
    let enc = tm_to_ca(tm).map_err(err)?;
    let mut cfg = tm.config_from_labels(config).map_err(err)?;
    let mut cells = enc.encode(&cfg);
    for step in 1..=steps {
        cells = enc.ca().update(&cells);
        match tm_step(tm, &cfg).map_err(err)? {
            StepResult::Next(next) => {
                let decoded = enc
                    .decode(&cells)
                    .ok_or(format!("step {step}: no configuration decoded"))?;
                ensure!(
                    decoded.same_as(&next, tm.blank()),
                    "step {step}: {decoded:?} vs {next:?}"
                );
                cfg = next;
            }
            StepResult::Halted(_) => {
                ensure!(enc.ca().has_final(&cells), "step {step}: halt not reflected");
                return Ok(step - 1);
            }
        }
    }
    Ok(steps)
}

fn smith() -> Outcome {
    let ran = [
        bisimulate(&unary_eraser(), &["s", "1", "1"], 20)?,
        bisimulate(&looping(), &["s"], 20)?,
        bisimulate(&appender(), &["r", "m", "1", "1", "1"], 20)?,
    ];
    Ok(format!("steps matched before halting: {ran:?}"))
}

fn fixes_all_up_to(m: &MealyMachine, w: &[StateId], depth: usize) -> bool {
    (0..=depth).all(|d| all_inputs(m.num_letters(), d).all(|x| m.act(w, &x) == x))
}

fn oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
    let (mut trivial, mut words) = (0, 0);
    for i in 0..50 {
        let (states, letters) = (rng.gen_range(1..=6), rng.gen_range(1..=6));
        let m = random_invertible(&mut rng, states, letters);
        let g = Group::new(&m).map_err(err)?;
        let n = g.machine().num_states();
        for _ in 0..8 {
            let len = rng.gen_range(0..=4);
            let u = random_word(&mut rng, n, len);
            let v_len = rng.gen_range(0..=2);
            let v = random_word(&mut rng, n, v_len);
            // A commutator is trivial more often than a random word.
            let commutator = [u.clone(), v.clone(), g.inverse(&u), g.inverse(&v)].concat();
            for w in [u, commutator] {
                let check = g.is_identity(&w).map_err(err)?;
                let brute = fixes_all_up_to(g.machine(), &w, 4);
                match &check.witness {
                    None => ensure!(
                        check.is_identity && brute,
                        "machine {i}: identity not confirmed by brute force"
                    ),
                    Some(x) => {
                        ensure!(g.machine().act(&w, x) != *x, "machine {i}: witness is fixed");
                        ensure!(
                            brute == (x.len() > 4),
                            "machine {i}: witness length {} vs brute {brute}",
                            x.len()
                        );
                    }
                }
                trivial += usize::from(check.is_identity);
                words += 1;
            }
        }
    }
    Ok(format!(
        "50 machines, {words} words ({trivial} trivial), seed {ORACLE_SEED:#x}"
    ))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "counting checks",
            limit: Some(Duration::from_secs(1)),
            run: counting_checks,
        },
        Criterion {
            id: 2,
            name: "timer orders 8/16/32",
            limit: Some(Duration::from_secs(60)),
            run: timer_orders,
        },
        Criterion {
            id: 3,
            name: "order two with a final state",
            limit: Some(Duration::from_secs(1)),
            run: order_two,
        },
        Criterion {
            id: 4,
            name: "squaring correspondence",
            limit: None,
            run: squaring,
        },
        Criterion {
            id: 5,
            name: "compiler property suites",
            limit: Some(Duration::from_secs(120)),
            run: compiler_suites,
        },
        Criterion {
            id: 6,
            name: "Engel correspondence",
            limit: Some(Duration::from_secs(60)),
            run: engel,
        },
        Criterion {
            id: 7,
            name: "TM pipeline",
            limit: None,
            run: tm_pipeline,
        },
        Criterion {
            id: 8,
            name: "TM to CA bisimulation",
            limit: None,
            run: smith,
        },
        Criterion {
            id: 9,
            name: "brute-force oracle",
            limit: None,
            run: oracle,
        },
    ];
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.is_empty() || only.contains(&c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {} ({elapsed:.2?}): {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {} ({elapsed:.2?}): {why}", c.id, c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
