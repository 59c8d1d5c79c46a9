//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Oracles live here and only use the specification's transition table, so
//! they stay independent of the solvers under test.

use std::collections::HashMap;
use std::time::Instant;

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wsynth_core::domain::{domains_equal, make_domain_safe, DomainSafeResult};
use wsynth_core::dsum::{exists_path_leq, exists_path_lt, PathCheck, WeightedGraph};
use wsynth_core::game::{parse_arena, solve_discounted_sum, solve_mean_payoff};
use wsynth_core::prefix::{reduce_dsum_prefix_to_ds, solve_prefix_threshold, ReductionOutcome};
use wsynth_core::rational::{int, ratio};
use wsynth_core::spec::{parse_mealy, parse_wfa, StateId, SymbolId};
use wsynth_core::synth::{
    difference, gen_spec_from_mp_game, synth_approx, synth_best_value, synth_boolean, synth_threshold, verify_realizer,
};
use wsynth_core::{
    BigRational, Cmp, Measure, MealyTransducer, Objective, Owner, PrefixObjective, SynthResult, WeightedSpec,
};

mod common;

use common::{
    all_runs_accept, all_words, brute_best, in_domain, measured, random_arena, random_spec, run_sum, subset_final, subset_step,
    transduce,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture() -> WeightedSpec {
    parse_wfa(include_str!("../../../fixtures/running-example.wfa")).unwrap()
}

fn avg_fixture() -> WeightedSpec {
    fixture().with_measure(Measure::Avg, None).unwrap()
}

fn mealy(text: &str) -> MealyTransducer {
    parse_mealy(text).unwrap()
}

fn a_i_b(i: usize) -> Vec<&'static str> {
    let mut u = vec!["a"; i];
    u.push("b");
    u
}

// ---------------------------------------------------------------------------
// Bounded-game oracle over the subset construction.

fn ids(spec: &WeightedSpec, u: &[&str]) -> Vec<SymbolId> {
    u.iter().map(|a| spec.inputs().id(a).unwrap()).collect()
}

/// Some word of length at most `k` leads from `set` into the domain.
fn live(spec: &WeightedSpec, set: u64, k: usize, memo: &mut HashMap<(u64, usize), bool>) -> bool {
    if subset_final(spec, set) {
        return true;
    }
    if k == 0 || set == 0 {
        return false;
    }
    if let Some(&r) = memo.get(&(set, k)) {
        return r;
    }
    let r = spec.inputs().ids().any(|a| live(spec, subset_step(spec, set, a), k - 1, memo));
    memo.insert((set, k), r);
    r
}

/// Depth-bounded realizability game: Adam reads up to `depth` inputs, Eve
/// answers each one; whenever the input read so far is in the domain, Eve's
/// run must be final (and its Sum at least `nu`, when given). Losing this
/// game refutes realizability.
struct BoundedGame<'a> {
    spec: &'a WeightedSpec,
    nu: Option<i64>,
    live: HashMap<(u64, usize), bool>,
    memo: HashMap<(StateId, u64, i64, usize), bool>,
}

impl<'a> BoundedGame<'a> {
    fn new(spec: &'a WeightedSpec, nu: Option<i64>) -> Self {
        BoundedGame {
            spec,
            nu,
            live: HashMap::new(),
            memo: HashMap::new(),
        }
    }

    fn eve_wins(&mut self, depth: usize) -> bool {
        let q0 = self.spec.initial();
        self.win(q0, 1 << q0, 0, depth)
    }

    fn win(&mut self, q: StateId, set: u64, acc: i64, d: usize) -> bool {
        let spec = self.spec;
        if subset_final(spec, set) && !(spec.is_final(q) && self.nu.is_none_or(|nu| acc >= nu)) {
            return false;
        }
        if d == 0 {
            return true;
        }
        let key = (q, set, if self.nu.is_some() { acc } else { 0 }, d);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let mut result = true;
        for a in spec.inputs().ids() {
            let next = subset_step(spec, set, a);
            if !live(spec, next, d - 1, &mut self.live) {
                continue;
            }
            let Some(t) = spec.delta(q, a) else {
                result = false;
                break;
            };
            let t = spec.transition(t);
            let (p, w) = (t.target, t.weight);
            let outgoing = spec.outgoing(p).to_vec();
            let answered = outgoing.iter().any(|&e| {
                let e = spec.transition(e);
                self.win(e.target, next, acc + w + e.weight, d - 1)
            });
            if !answered {
                result = false;
                break;
            }
        }
        self.memo.insert(key, result);
        result
    }
}

// ---------------------------------------------------------------------------
// Criteria.

fn criterion_1() -> Check {
    let s = fixture();
    let mut expected = vec![(vec!["b"], 12), (vec!["a", "b"], 10)];
    expected.extend((2..=6).map(|i| (a_i_b(i), 2 * i as i64 + 4)));
    for (u, value) in &expected {
        let got = s.best_value(&ids(&s, u)).map_err(|e| e.to_string())?;
        ensure(got.value() == Some(&int(*value)), || format!("bestVal({}) = {got}, expected {value}", u.concat()))?;
        let brute = brute_best(&s, &ids(&s, u));
        ensure(brute == Some(int(*value)), || format!("enumeration gives {brute:?} on {}", u.concat()))?;
    }
    Ok("best values 12, 10 and 2i+4 (i = 2..6), exact".into())
}

fn criterion_2() -> Check {
    let s = fixture();
    let SynthResult::Realizable(t) = synth_threshold(&s, Cmp::Ge, &int(6)).map_err(|e| e.to_string())? else {
        return Err(">= 6 not realizable".into());
    };
    // Independent replay of the realizer on every input up to length 8.
    for len in 0..=8 {
        for u in all_words(2, len) {
            let dom = in_domain(&s, &u);
            match transduce(&s, &t, &u) {
                Some(v) => {
                    let sum = run_sum(&s, &u, &v);
                    ensure(dom && sum.is_some_and(|x| x >= 6), || format!("realizer fails on {u:?}"))?;
                }
                None => ensure(!dom, || format!("realizer undefined on domain word {u:?}"))?,
            }
        }
    }
    ensure(matches!(synth_threshold(&s, Cmp::Ge, &int(7)), Ok(SynthResult::Unrealizable)), || {
        ">= 7 not reported unrealizable".into()
    })?;
    ensure(BoundedGame::new(&s, Some(6)).eve_wins(8), || "bounded game lost at >= 6".into())?;
    ensure(!BoundedGame::new(&s, Some(7)).eve_wins(8), || "bounded game won at >= 7".into())?;
    let always_d = mealy(include_str!("../../../fixtures/always-d.mealy"));
    let obj = Objective::Threshold { cmp: Cmp::Ge, nu: int(6) };
    ensure(verify_realizer(&s, &always_d, &obj).is_ok_and(|v| v.is_pass()), || "always-d fails >= 6".into())?;
    Ok(format!(">= 6 realizable ({} states, replayed), >= 7 unrealizable, always-d verified", t.num_states()))
}

/// Best outputs of `u` by enumeration.
fn best_outputs(spec: &WeightedSpec, u: &[SymbolId]) -> Vec<Vec<SymbolId>> {
    let best = brute_best(spec, u);
    all_words(spec.outputs().len(), u.len())
        .into_iter()
        .filter(|v| run_sum(spec, u, v).map(|s| measured(spec, s, u.len())) == best)
        .collect()
}

fn criterion_3() -> Check {
    for s in [fixture(), avg_fixture()] {
        let measure = s.measure().keyword();
        ensure(matches!(synth_best_value(&s), Ok(SynthResult::Unrealizable)), || {
            format!("{measure}: best-value not reported unrealizable")
        })?;
        // A sequential function answers `a` the same way in `ab` and `aaab`.
        let first = |u: &[&str]| -> Vec<SymbolId> { best_outputs(&s, &ids(&s, u)).iter().map(|v| v[0]).collect() };
        let short = first(&["a", "b"]);
        let long = first(&a_i_b(3));
        ensure(short.iter().all(|b| !long.contains(b)), || {
            format!("{measure}: best outputs of ab and aaab agree on the first letter")
        })?;
    }
    Ok("no best-value realizer for sum and avg (best first outputs of ab, aaab disjoint)".into())
}

fn criterion_4() -> Check {
    let first_c = mealy(include_str!("../../../fixtures/first-c.mealy"));
    let cases = [(fixture(), int(4)), (avg_fixture(), ratio(2, 3))];
    for (s, r) in &cases {
        let measure = s.measure().keyword();
        let obj = Objective::Approx { strict: false, r: r.clone() };
        let result = synth_approx(s, false, r, 64).map_err(|e| e.to_string())?;
        let SynthResult::Realizable(t) = result else {
            return Err(format!("{measure}: approx not realizable at cap 64 ({})", result.keyword()));
        };
        for (name, m) in [("synthesized", &t), ("first-c", &first_c)] {
            ensure(verify_realizer(s, m, &obj).is_ok_and(|v| v.is_pass()), || format!("{measure}: {name} fails verify"))?;
            for i in 0..=8 {
                let u = ids(s, &a_i_b(i));
                let v = transduce(s, m, &u).ok_or_else(|| format!("{measure}: {name} undefined on a^{i}b"))?;
                let value = measured(s, run_sum(s, &u, &v).ok_or("output leaves the spec")?, u.len());
                let gap = brute_best(s, &u).unwrap() - value;
                ensure(&gap <= r, || format!("{measure}: {name} gap {gap} on a^{i}b"))?;
            }
        }
    }
    let s = avg_fixture();
    for i in 2..=6usize {
        let u = a_i_b(i);
        let d = difference(&s, &first_c, &u).map_err(|e| e.to_string())?;
        let expected = ratio(2, i as i64 + 1);
        ensure(d.as_ref() == Some(&expected), || format!("difference on a^{i}b is {d:?}, expected {expected}"))?;
        let v = transduce(&s, &first_c, &ids(&s, &u)).unwrap();
        let brute = brute_best(&s, &ids(&s, &u)).unwrap() - measured(&s, run_sum(&s, &ids(&s, &u), &v).unwrap(), i + 1);
        ensure(brute == expected, || format!("enumerated difference on a^{i}b is {brute}"))?;
    }
    Ok("sum r=4 and avg r=2/3 realizable at cap 64, first-c verified, differences 2/(i+1)".into())
}

fn criterion_5() -> Check {
    let arena = parse_arena(include_str!("../../../fixtures/strict-dsum.arena")).map_err(|e| e.to_string())?;
    let strict = PrefixObjective::dsum(Cmp::Gt, int(1), ratio(1, 2));
    let solution = solve_prefix_threshold(&arena, &strict).map_err(|e| e.to_string())?;
    ensure(solution.winner == Owner::Eve, || "strict nu = 1: Adam wins".into())?;
    ensure(solution.trace.contains("positional strategies checked"), || "strict case not enumerated".into())?;
    let ReductionOutcome::Reduced(red) = reduce_dsum_prefix_to_ds(&arena, Cmp::Ge).map_err(|e| e.to_string())? else {
        return Err("reduction trivialized".into());
    };
    let ds = solve_discounted_sum(&red.arena, &ratio(1, 2), &int(1), Cmp::Gt).map_err(|e| e.to_string())?;
    let value = ds.initial_value(&red.arena);
    ensure(value == &int(1), || format!("initial value {value}, expected 1"))?;
    // Reading the strict game off the reduction would answer Adam.
    ensure(!ds.eve_wins, || "reduced game wins > 1".into())?;
    Ok("strict nu=1 Eve wins by enumeration; reduced initial value exactly 1".into())
}

fn dsum_oracle(lambda: &BigRational, weights: &[i64]) -> BigRational {
    let mut factor = lambda.clone();
    let mut total = BigRational::zero();
    for &w in weights {
        total += int(w) * &factor;
        factor *= lambda;
    }
    total
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let lambdas = [ratio(1, 2), ratio(1, 3), ratio(2, 5)];
    let mut yes = 0;
    for round in 0..500 {
        let n = rng.gen_range(1..=6);
        let lambda = lambdas.choose(&mut rng).unwrap().clone();
        let nu = int(rng.gen_range(-2..=2));
        let mut g = WeightedGraph::new(n, 0, lambda.clone());
        for v in 0..n {
            g.targets[v] = rng.gen_bool(0.3);
            for _ in 0..rng.gen_range(0..=3) {
                g.add_edge(v, rng.gen_range(-3..=3), rng.gen_range(0..n));
            }
        }
        // min_dsum[v]: least Dsum over paths of the current length to v.
        let mut min_dsum: Vec<Option<BigRational>> = vec![None; n];
        min_dsum[0] = Some(BigRational::zero());
        let (mut brute_leq, mut brute_lt) = (false, false);
        let mut factor = BigRational::one();
        for _ in 0..=3 * n {
            for v in (0..n).filter(|&v| g.targets[v]) {
                if let Some(d) = &min_dsum[v] {
                    brute_leq |= d <= &nu;
                    brute_lt |= d < &nu;
                }
            }
            factor *= &lambda;
            let mut next: Vec<Option<BigRational>> = vec![None; n];
            for e in &g.edges {
                if let Some(d) = &min_dsum[e.source] {
                    let cand = d + int(e.weight) * &factor;
                    if next[e.target].as_ref().is_none_or(|x| &cand < x) {
                        next[e.target] = Some(cand);
                    }
                }
            }
            min_dsum = next;
        }
        for (strict, brute) in [(false, brute_leq), (true, brute_lt)] {
            let check = if strict { exists_path_lt(&g, &nu) } else { exists_path_leq(&g, &nu) };
            match check {
                PathCheck::Yes(w) => {
                    yes += 1;
                    let mut at = g.source;
                    let mut weights = Vec::new();
                    for &e in &w.edges {
                        let edge = &g.edges[e];
                        ensure(edge.source == at, || format!("graph {round}: witness is not a path"))?;
                        at = edge.target;
                        weights.push(edge.weight);
                    }
                    let d = dsum_oracle(&lambda, &weights);
                    let holds = if strict { d < nu } else { d <= nu };
                    ensure(g.targets[at] && holds && d == w.dsum, || format!("graph {round}: witness invalid"))?;
                }
                PathCheck::No => ensure(!brute, || format!("graph {round}: missed a path of length <= 3n"))?,
            }
        }
    }
    Ok(format!("500 graphs, {yes} witnesses re-validated, no path of length <= 3n missed"))
}

fn criterion_7() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut eve = 0;
    for round in 0..100 {
        let arena = random_arena(&mut rng);
        let mp = solve_mean_payoff(&arena).map_err(|e| e.to_string())?;
        let spec = gen_spec_from_mp_game(&arena).map_err(|e| e.to_string())?;
        for (cmp, nu) in [(Cmp::Ge, int(0)), (Cmp::Gt, int(-1))] {
            let result = synth_threshold(&spec, cmp, &nu).map_err(|e| e.to_string())?;
            let realizable = matches!(result, SynthResult::Realizable(_));
            ensure(realizable == (mp.winner == Owner::Eve), || {
                format!("arena {round}: synthesis says {}, mean-payoff winner {:?}", result.keyword(), mp.winner)
            })?;
        }
        eve += usize::from(mp.winner == Owner::Eve);
    }
    Ok(format!("100 arenas agree ({eve} Eve, {} Adam)", 100 - eve))
}

fn criterion_8() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut safe_count, mut changed) = (0, 0);
    for round in 0..200 {
        let s = random_spec(&mut rng, Measure::Sum);
        let oracle = BoundedGame::new(&s, None).eve_wins(12);
        match make_domain_safe(&s) {
            DomainSafeResult::Safe(d) => {
                safe_count += 1;
                changed += usize::from(d.num_states() != s.num_states() || d.transitions().len() != s.transitions().len());
                ensure(oracle, || format!("spec {round}: transformed although the bounded game is lost"))?;
                for len in 0..=6 {
                    for u in all_words(2, len) {
                        let dom = in_domain(&s, &u);
                        ensure(dom == in_domain(&d, &u), || format!("spec {round}: domain changed on {u:?}"))?;
                        if dom {
                            ensure(all_runs_accept(&d, d.initial(), &u), || {
                                format!("spec {round}: a run on domain word {u:?} misses a final state")
                            })?;
                        }
                    }
                }
                ensure(domains_equal(&s, &d), || format!("spec {round}: DFA equivalence fails"))?;
                let boolean = synth_boolean(&s).map_err(|e| e.to_string())?;
                ensure(matches!(boolean, SynthResult::Realizable(_)), || format!("spec {round}: no Boolean realizer"))?;
            }
            DomainSafeResult::NoBooleanRealizer => {
                ensure(!oracle, || format!("spec {round}: bounded game won but no Boolean realizer reported"))?;
            }
        }
    }
    Ok(format!("200 specs ({safe_count} with a Boolean realizer, {changed} pruned): safety, domain and realizability hold"))
}

/// A transducer with at most three states as a table
/// `(state, input) -> (output, target)`.
struct SmallMealy {
    moves: Vec<[Option<(SymbolId, usize)>; 2]>,
    finals: u8,
}

impl SmallMealy {
    fn run(&self, u: &[SymbolId]) -> Option<Vec<SymbolId>> {
        let mut q = 0;
        let mut out = Vec::new();
        for &a in u {
            let (b, next) = self.moves[q][a]?;
            out.push(b);
            q = next;
        }
        (self.finals >> q & 1 == 1).then_some(out)
    }
}

fn criterion_9() -> Check {
    let s = fixture();
    let result = synth_approx(&s, true, &int(4), 64).map_err(|e| e.to_string())?;
    ensure(matches!(result, SynthResult::UnknownAtCap(64)), || format!("strict r=4 gives {}", result.keyword()))?;
    // Exhaustive oracle: no transducer with at most 3 states keeps the gap
    // below 4 even on a^i b for i <= 6.
    let inputs: Vec<Vec<SymbolId>> = (0..=6).map(|i| ids(&s, &a_i_b(i))).collect();
    let best: Vec<i64> = inputs.iter().map(|u| brute_best(&s, u).unwrap().to_integer().try_into().unwrap()).collect();
    let mut checked = 0u64;
    for k in 1..=3usize {
        let slot_choices = 2 * k + 1;
        let slots = 2 * k;
        for code in 0..slot_choices.pow(slots as u32) {
            let mut c = code;
            let mut moves = vec![[None, None]; k];
            for slot in moves.iter_mut().flat_map(|m| m.iter_mut()) {
                let pick = c % slot_choices;
                c /= slot_choices;
                *slot = (pick > 0).then(|| ((pick - 1) % 2, (pick - 1) / 2));
            }
            for finals in 0..1u8 << k {
                checked += 1;
                let t = SmallMealy { moves: moves.clone(), finals };
                let good = inputs.iter().zip(&best).all(|(u, &b)| {
                    t.run(u).and_then(|v| run_sum(&s, u, &v)).is_some_and(|value| b - value < 4)
                });
                ensure(!good, || format!("a {k}-state transducer keeps the gap below 4"))?;
            }
        }
    }
    Ok(format!("strict r=4 unknown at cap 64; {checked} transducers with <= 3 states all refuted"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("running-example best values", criterion_1),
        ("threshold synthesis", criterion_2),
        ("best-value synthesis", criterion_3),
        ("approximate synthesis", criterion_4),
        ("strict dsum regression", criterion_5),
        ("path-check oracle equivalence", criterion_6),
        ("mean-payoff cross-validation", criterion_7),
        ("domain-safety properties", criterion_8),
        ("capped energy semi-decision", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS ({name}: {detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL ({name}: {why}) [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
