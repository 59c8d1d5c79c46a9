//! Seeded generators and brute-force oracles shared by the integration tests.
//! The oracles only read the transition table.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use wsynth_core::rational::{int, ratio};
use wsynth_core::spec::{StateId, SymbolId};
use wsynth_core::{Arena, BigRational, Measure, MealyTransducer, Owner, WeightedSpec};

/// All words of length `len` over `0..alphabet`.
pub fn all_words(alphabet: usize, len: usize) -> Vec<Vec<SymbolId>> {
    let mut words = vec![vec![]];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                (0..alphabet).map(move |a| {
                    let mut w = w.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    words
}

/// Sum of the weights along `u ⊗ v`, if the run exists and ends final.
pub fn run_sum(spec: &WeightedSpec, u: &[SymbolId], v: &[SymbolId]) -> Option<i64> {
    let mut q = spec.initial();
    let mut acc = 0;
    for (&a, &b) in u.iter().zip(v) {
        for sym in [a, b] {
            let t = spec.transition(spec.delta(q, sym)?);
            acc += t.weight;
            q = t.target;
        }
    }
    spec.is_final(q).then_some(acc)
}

/// Sum or Avg of a run of `len` input letters with weight sum `sum`.
pub fn measured(spec: &WeightedSpec, sum: i64, len: usize) -> BigRational {
    match spec.measure() {
        Measure::Sum => int(sum),
        Measure::Avg if len == 0 => int(0),
        Measure::Avg => ratio(sum, 2 * len as i64),
        Measure::Dsum => unreachable!("the brute-force oracle covers sum and avg"),
    }
}

pub fn brute_value(spec: &WeightedSpec, u: &[SymbolId], v: &[SymbolId]) -> Option<BigRational> {
    run_sum(spec, u, v).map(|s| measured(spec, s, u.len()))
}

pub fn brute_best(spec: &WeightedSpec, u: &[SymbolId]) -> Option<BigRational> {
    all_words(spec.outputs().len(), u.len())
        .iter()
        .filter_map(|v| brute_value(spec, u, v))
        .max()
}

/// Outputs of `t` on `u`, mapped into the spec's output ids.
pub fn transduce(spec: &WeightedSpec, t: &MealyTransducer, u: &[SymbolId]) -> Option<Vec<SymbolId>> {
    let names: Vec<&str> = u.iter().map(|&a| spec.inputs().name(a)).collect();
    let out = t.run(&names)?;
    out.iter().map(|b| spec.outputs().id(b)).collect()
}

/// Input states reachable after reading `a` and any output, from `set`.
pub fn subset_step(spec: &WeightedSpec, set: u64, a: SymbolId) -> u64 {
    let mut next = 0;
    for q in (0..spec.num_states()).filter(|q| set >> q & 1 == 1) {
        let Some(t) = spec.delta(q, a) else { continue };
        let p = spec.transition(t).target;
        for &e in spec.outgoing(p) {
            next |= 1 << spec.transition(e).target;
        }
    }
    next
}

pub fn subset_final(spec: &WeightedSpec, set: u64) -> bool {
    (0..spec.num_states()).any(|q| set >> q & 1 == 1 && spec.is_final(q))
}

pub fn in_domain(spec: &WeightedSpec, u: &[SymbolId]) -> bool {
    let set = u.iter().fold(1u64 << spec.initial(), |s, &a| subset_step(spec, s, a));
    subset_final(spec, set)
}

/// A random alternating spec over inputs `a b` and outputs `x y`, with at
/// most three input and three output states and at most six in total.
pub fn random_spec(rng: &mut ChaCha8Rng, measure: Measure) -> WeightedSpec {
    let k = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=6 - k).min(3);
    let mut b = WeightedSpec::builder(measure);
    b.inputs(["a", "b"]).outputs(["x", "y"]).initial("i0");
    let mut any_final = false;
    for i in 0..k {
        if rng.gen_bool(0.4) {
            b.final_state(&format!("i{i}"));
            any_final = true;
        }
    }
    if !any_final {
        b.final_state(&format!("i{}", rng.gen_range(0..k)));
    }
    for i in 0..k {
        for a in ["a", "b"] {
            if rng.gen_bool(0.75) {
                b.transition(&format!("i{i}"), a, rng.gen_range(-2..=2), &format!("o{}", rng.gen_range(0..m)));
            }
        }
    }
    for o in 0..m {
        for x in ["x", "y"] {
            if rng.gen_bool(0.6) {
                b.transition(&format!("o{o}"), x, rng.gen_range(-2..=2), &format!("i{}", rng.gen_range(0..k)));
            }
        }
    }
    b.build().expect("alternating by construction")
}

/// A random deadlock-free arena with up to five vertices and `|w| <= 2`.
pub fn random_arena(rng: &mut ChaCha8Rng) -> Arena {
    let n = rng.gen_range(1..=5);
    let mut a = Arena::new();
    for v in 0..n {
        let owner = if rng.gen_bool(0.5) { Owner::Eve } else { Owner::Adam };
        a.add_vertex(format!("v{v}"), owner);
    }
    for v in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            a.add_edge(v, rng.gen_range(-2..=2), rng.gen_range(0..n));
        }
    }
    a.set_initial(0);
    a
}

/// Every run of `spec` from `q` over `u` that follows some outputs reads all
/// of `u` and ends in a final state.
pub fn all_runs_accept(spec: &WeightedSpec, q: StateId, u: &[SymbolId]) -> bool {
    let Some((&a, rest)) = u.split_first() else {
        return spec.is_final(q);
    };
    let Some(t) = spec.delta(q, a) else { return false };
    let p = spec.transition(t).target;
    let outs = spec.outgoing(p);
    !outs.is_empty() && outs.iter().all(|&e| all_runs_accept(spec, spec.transition(e).target, rest))
}
