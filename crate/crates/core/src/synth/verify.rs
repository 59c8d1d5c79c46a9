use std::collections::{HashMap, VecDeque};

use num_rational::BigRational;

use super::{Objective, SynthError, Verdict};
use crate::domain::{closure, domain_accepts, domain_step, DomainSet};
use crate::game::{Arena, EdgeId, Owner, PositionalStrategy};
use crate::prefix::{check_positional, Cmp, PrefixObjective};
use crate::rational::format_rational;
use crate::spec::{split_word, MealyTransducer, StateId, SymbolId, ValueResult, WeightedSpec};

/// Symbol ids of the transducer translated to the spec's alphabets.
struct Symbols {
    input: Vec<SymbolId>,
    output: Vec<SymbolId>,
}

fn translate(spec: &WeightedSpec, t: &MealyTransducer) -> Result<Symbols, SynthError> {
    let map = |from: &crate::spec::Alphabet, to: &crate::spec::Alphabet| {
        from.symbols()
            .iter()
            .map(|s| to.id(s).ok_or_else(|| SynthError::AlphabetMismatch(s.clone())))
            .collect::<Result<Vec<_>, _>>()
    };
    Ok(Symbols {
        input: map(t.inputs(), spec.inputs())?,
        output: map(t.outputs(), spec.outputs())?,
    })
}

fn names(spec: &WeightedSpec, word: &[SymbolId]) -> Vec<String> {
    word.iter().map(|&a| spec.inputs().name(a).to_string()).collect()
}

/// Checks a transducer against a specification and an objective. The
/// transducer must realize the spec in the Boolean sense for any objective.
pub fn verify_realizer(spec: &WeightedSpec, t: &MealyTransducer, obj: &Objective) -> Result<Verdict, SynthError> {
    let symbols = translate(spec, t)?;
    if let Some(fail) = boolean_violation(spec, t, &symbols) {
        return Ok(fail);
    }
    let (product, target) = match obj {
        Objective::Boolean => return Ok(Verdict::Pass),
        Objective::Threshold { cmp, nu } => (threshold_product(spec, t, &symbols), (*cmp, nu.clone())),
        Objective::BestValue => (difference_product(spec, t, &symbols), (Cmp::Ge, BigRational::from_integer(0.into()))),
        Objective::Approx { strict, r } => {
            let cmp = if *strict { Cmp::Gt } else { Cmp::Ge };
            (difference_product(spec, t, &symbols), (cmp, -r.clone()))
        }
    };
    let prefix_obj = PrefixObjective {
        measure: spec.measure(),
        cmp: target.0,
        nu: target.1,
        lambda: spec.discount().cloned(),
    };
    let everything = PositionalStrategy::new(product.arena.num_vertices());
    let Some(violation) = check_positional(&product.arena, &everything, &prefix_obj)? else {
        return Ok(Verdict::Pass);
    };
    let word: Vec<SymbolId> = violation.edges.iter().filter_map(|&e| product.label[e]).collect();
    let input = names(spec, &word);
    let reason = describe(spec, t, &input, obj)?;
    Ok(Verdict::Fail { input, reason })
}

fn describe(spec: &WeightedSpec, t: &MealyTransducer, input: &[String], obj: &Objective) -> Result<String, SynthError> {
    let refs: Vec<&str> = input.iter().map(String::as_str).collect();
    let output = t.run(&refs).unwrap_or_default();
    let u = split_word(spec.inputs(), &input.join(" "))?;
    let v = split_word(spec.outputs(), &output.join(" "))?;
    let value = spec.evaluate(&u, &v)?;
    let best = spec.best_value(&u)?;
    Ok(match obj {
        Objective::Threshold { cmp, nu } => {
            format!("value {value} violates {cmp} {} (output {})", format_rational(nu), output.join(" "))
        }
        _ => format!("value {value} vs best value {best} (output {})", output.join(" ")),
    })
}

/// `dom(T) = dom(S)` and every pair produced on the domain is accepted.
fn boolean_violation(spec: &WeightedSpec, t: &MealyTransducer, symbols: &Symbols) -> Option<Verdict> {
    let to_t: HashMap<SymbolId, SymbolId> = symbols.input.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    // Determinized domain automaton of the spec against the transducer.
    type Node = (DomainSet, Option<StateId>);
    let start: Node = (closure(spec, [spec.initial()]), Some(t.initial()));
    let mut parent: HashMap<Node, Option<(Node, SymbolId)>> = HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(node) = queue.pop_front() {
        let in_spec = domain_accepts(spec, &node.0);
        let in_t = node.1.is_some_and(|m| t.is_final(m));
        if in_spec != in_t {
            let mut word = Vec::new();
            let mut cur = node;
            while let Some(Some((prev, a))) = parent.get(&cur).cloned() {
                word.push(a);
                cur = prev;
            }
            word.reverse();
            let reason = if in_spec {
                "input in the domain of the specification but not of the transducer"
            } else {
                "input in the domain of the transducer but not of the specification"
            };
            return Some(Verdict::Fail {
                input: names(spec, &word),
                reason: reason.into(),
            });
        }
        if node.0.is_empty() && node.1.is_none() {
            continue;
        }
        for a in spec.inputs().ids() {
            let m = node
                .1
                .and_then(|m| to_t.get(&a).and_then(|&ta| t.step(m, ta)))
                .map(|tr| tr.target);
            let next = (domain_step(spec, &node.0, a), m);
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((node.clone(), a)));
                queue.push_back(next);
            }
        }
    }
    // The run of the spec on what the transducer produces.
    let start = (t.initial(), Some(spec.initial()));
    let mut parent: HashMap<(StateId, Option<StateId>), Option<((StateId, Option<StateId>), SymbolId)>> =
        HashMap::from([(start, None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(node @ (m, s)) = queue.pop_front() {
        if t.is_final(m) && !s.is_some_and(|s| spec.is_final(s)) {
            let mut word = Vec::new();
            let mut cur = node;
            while let Some(Some((prev, a))) = parent.get(&cur).cloned() {
                word.push(a);
                cur = prev;
            }
            word.reverse();
            return Some(Verdict::Fail {
                input: names(spec, &word),
                reason: "the produced output is rejected by the specification".into(),
            });
        }
        for tr in t.transitions().iter().filter(|tr| tr.source == m) {
            let a = symbols.input[tr.input];
            let b = symbols.output[tr.output];
            let next_s = s.and_then(|s| spec.step(s, a)).and_then(|s| spec.step(s, b));
            let next = (tr.target, next_s);
            if let std::collections::hash_map::Entry::Vacant(e) = parent.entry(next) {
                e.insert(Some((node, a)));
                queue.push_back(next);
            }
        }
    }
    None
}

/// Letter-level product arena; `label[e]` is the input symbol read on `e`.
struct Product {
    arena: Arena,
    label: Vec<Option<SymbolId>>,
}

impl Product {
    fn edge(&mut self, s: usize, w: i64, t: usize, label: Option<SymbolId>) -> EdgeId {
        self.label.push(label);
        self.arena.add_edge(s, w, t)
    }
}

/// Pairs (transducer state, spec state) following the transducer's outputs.
fn threshold_product(spec: &WeightedSpec, t: &MealyTransducer, symbols: &Symbols) -> Product {
    let mut p = Product {
        arena: Arena::new(),
        label: Vec::new(),
    };
    let mut index: HashMap<(StateId, StateId), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut vertex = |p: &mut Product, queue: &mut VecDeque<(StateId, StateId)>, key: (StateId, StateId)| {
        *index.entry(key).or_insert_with(|| {
            let v = p.arena.add_vertex(format!("{}|{}", t.state_name(key.0), spec.state_name(key.1)), Owner::Adam);
            p.arena.set_critical(v, t.is_final(key.0) && spec.is_final(key.1));
            queue.push_back(key);
            v
        })
    };
    let start = vertex(&mut p, &mut queue, (t.initial(), spec.initial()));
    p.arena.set_initial(start);
    while let Some(key @ (m, s)) = queue.pop_front() {
        let from = vertex(&mut p, &mut queue, key);
        for tr in t.transitions().iter().filter(|tr| tr.source == m) {
            let a = symbols.input[tr.input];
            let b = symbols.output[tr.output];
            let Some(first) = spec.delta(s, a).map(|e| spec.transition(e)) else { continue };
            let Some(second) = spec.delta(first.target, b).map(|e| spec.transition(e)) else { continue };
            let (w1, w2, next) = (first.weight, second.weight, second.target);
            let mid = p.arena.add_vertex(format!("{}|{}|{}", t.state_name(m), spec.state_name(first.target), spec.inputs().name(a)), Owner::Adam);
            let to = vertex(&mut p, &mut queue, (tr.target, next));
            p.edge(from, w1, mid, Some(a));
            p.edge(mid, w2, to, None);
        }
    }
    p
}

/// Triples (transducer state, spec state following the transducer,
/// adversary spec state on the same input); weights are the transducer's
/// step weights minus the adversary's.
fn difference_product(spec: &WeightedSpec, t: &MealyTransducer, symbols: &Symbols) -> Product {
    let mut p = Product {
        arena: Arena::new(),
        label: Vec::new(),
    };
    type Key = (StateId, StateId, StateId);
    let mut index: HashMap<Key, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut vertex = |p: &mut Product, queue: &mut VecDeque<Key>, key: Key| {
        *index.entry(key).or_insert_with(|| {
            let name = format!("{}|{}|{}", t.state_name(key.0), spec.state_name(key.1), spec.state_name(key.2));
            let v = p.arena.add_vertex(name, Owner::Adam);
            p.arena.set_critical(v, t.is_final(key.0) && spec.is_final(key.1) && spec.is_final(key.2));
            queue.push_back(key);
            v
        })
    };
    let start = vertex(&mut p, &mut queue, (t.initial(), spec.initial(), spec.initial()));
    p.arena.set_initial(start);
    while let Some(key @ (m, s, s_adv)) = queue.pop_front() {
        let from = vertex(&mut p, &mut queue, key);
        for tr in t.transitions().iter().filter(|tr| tr.source == m) {
            let a = symbols.input[tr.input];
            let b = symbols.output[tr.output];
            let Some(first) = spec.delta(s, a).map(|e| spec.transition(e)) else { continue };
            let Some(first_adv) = spec.delta(s_adv, a).map(|e| spec.transition(e)) else { continue };
            let Some(second) = spec.delta(first.target, b).map(|e| spec.transition(e)) else { continue };
            let mid_name = format!("{}|{}|{}|{}", t.state_name(m), spec.state_name(first.target), spec.state_name(first_adv.target), spec.inputs().name(a));
            let mid = p.arena.add_vertex(mid_name, Owner::Adam);
            p.edge(from, first.weight - first_adv.weight, mid, Some(a));
            for &e in spec.outgoing(first_adv.target) {
                let second_adv = spec.transition(e);
                let to = vertex(&mut p, &mut queue, (tr.target, second.target, second_adv.target));
                p.edge(mid, second.weight - second_adv.weight, to, None);
            }
        }
    }
    p
}

/// `bestVal(u) - S(u ⊗ T(u))` for an input word given by names, or `None`
/// when the transducer is undefined on `u` or either value is `-∞`.
pub fn difference(spec: &WeightedSpec, t: &MealyTransducer, input: &[&str]) -> Result<Option<BigRational>, SynthError> {
    let Some(output) = t.run(input) else { return Ok(None) };
    let u = split_word(spec.inputs(), &input.join(" "))?;
    let v = split_word(spec.outputs(), &output.join(" "))?;
    Ok(match (spec.best_value(&u)?, spec.evaluate(&u, &v)?) {
        (ValueResult::Value(best), ValueResult::Value(value)) => Some(best - value),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::spec::{parse_mealy, parse_wfa, Measure};

    fn fixture() -> WeightedSpec {
        parse_wfa(include_str!("../../../../fixtures/running-example.wfa")).unwrap()
    }

    fn always_d() -> MealyTransducer {
        parse_mealy(include_str!("../../../../fixtures/always-d.mealy")).unwrap()
    }

    fn first_c() -> MealyTransducer {
        parse_mealy(include_str!("../../../../fixtures/first-c.mealy")).unwrap()
    }

    #[test]
    fn always_d_threshold() {
        let s = fixture();
        let t = always_d();
        let at = |nu| verify_realizer(&s, &t, &Objective::Threshold { cmp: Cmp::Ge, nu: int(nu) }).unwrap();
        assert_eq!(at(6), Verdict::Pass);
        let Verdict::Fail { input, .. } = at(7) else { panic!() };
        assert_eq!(input, vec!["a", "b"]);
        assert!(verify_realizer(&s, &t, &Objective::Boolean).unwrap().is_pass());
    }

    #[test]
    fn always_d_is_not_best() {
        let s = fixture();
        let Verdict::Fail { input, reason } = verify_realizer(&s, &always_d(), &Objective::BestValue).unwrap() else {
            panic!()
        };
        assert_eq!(input, vec!["a", "b"]);
        assert!(reason.contains("value 6") && reason.contains("best value 10"), "{reason}");
    }

    #[test]
    fn first_c_approximates() {
        let s = fixture();
        let t = first_c();
        let sum = |strict, r| verify_realizer(&s, &t, &Objective::Approx { strict, r: int(r) }).unwrap();
        assert!(sum(false, 4).is_pass());
        assert!(!sum(true, 4).is_pass());
        assert!(!sum(false, 3).is_pass());
        let avg = s.with_measure(Measure::Avg, None).unwrap();
        let approx = |strict, r| verify_realizer(&avg, &t, &Objective::Approx { strict, r }).unwrap();
        assert!(approx(false, ratio(2, 3)).is_pass());
        assert!(!approx(true, ratio(2, 3)).is_pass());
        assert!(!approx(false, ratio(1, 2)).is_pass());
        for i in 2..=6usize {
            let mut word = vec!["a"; i];
            word.push("b");
            assert_eq!(difference(&avg, &t, &word).unwrap(), Some(ratio(2, i as i64 + 1)));
            assert_eq!(difference(&s, &t, &word).unwrap(), Some(int(4)));
        }
    }

    #[test]
    fn domain_mismatch_detected() {
        let s = fixture();
        let partial = parse_mealy("mealy\ninputs: a b\noutputs: c d\ninitial: m\nfinals: n\ntrans: m b d n\n").unwrap();
        let Verdict::Fail { input, .. } = verify_realizer(&s, &partial, &Objective::Boolean).unwrap() else {
            panic!()
        };
        assert_eq!(input, vec!["a", "b"]);
    }

    #[test]
    fn alphabet_mismatch() {
        let s = fixture();
        let t = parse_mealy("mealy\ninitial: m\nfinals: m\ntrans: m z d m\n").unwrap();
        assert_eq!(
            verify_realizer(&s, &t, &Objective::Boolean),
            Err(SynthError::AlphabetMismatch("z".into()))
        );
    }
}
