use std::collections::VecDeque;

use super::SynthError;
use crate::game::{Arena, Owner, PositionalStrategy, VertexId};
use crate::spec::{MealyTransducer, Polarity, StateId, WeightedSpec};

/// The spec read as a game arena: vertex `q` is state `q` (input states
/// Adam's, output states Eve's), edge `t` is transition `t`, final states
/// are critical. Deadlocks go to a fresh sink with a 0-weight loop, whose id
/// is returned if one was needed.
pub fn spec_to_prefix_arena(spec: &WeightedSpec) -> (Arena, Option<VertexId>) {
    let mut arena = Arena::new();
    for q in 0..spec.num_states() {
        let owner = match spec.polarity(q) {
            Polarity::Input => Owner::Adam,
            Polarity::Output => Owner::Eve,
        };
        let v = arena.add_vertex(spec.state_name(q), owner);
        arena.set_critical(v, spec.is_final(q));
    }
    for t in spec.transitions() {
        arena.add_edge(t.source, t.weight, t.target);
    }
    arena.set_initial(spec.initial());
    let deadlocks = arena.deadlocks();
    if deadlocks.is_empty() {
        return (arena, None);
    }
    let mut name = String::from("_sink");
    while spec.state_id(&name).is_some() {
        name.push('_');
    }
    let sink = arena.add_vertex(name, Owner::Adam);
    arena.add_edge(sink, 0, sink);
    for v in deadlocks {
        arena.add_edge(v, 0, sink);
    }
    (arena, Some(sink))
}

/// Reads off the transducer of a positional strategy on
/// [`spec_to_prefix_arena`]: on input `a` in input state `p`, output the
/// strategy's choice at `δ(p, a)`.
pub fn extract_transducer(spec: &WeightedSpec, strategy: &PositionalStrategy) -> Result<MealyTransducer, SynthError> {
    let mut t = MealyTransducer::new(spec.inputs().clone(), spec.outputs().clone(), spec.state_name(spec.initial()));
    let mut id: Vec<Option<StateId>> = vec![None; spec.num_states()];
    id[spec.initial()] = Some(t.initial());
    t.set_final(t.initial(), spec.is_final(spec.initial()));
    let mut queue = VecDeque::from([spec.initial()]);
    while let Some(p) = queue.pop_front() {
        for &e in spec.outgoing(p) {
            let input = spec.transition(e);
            let o = input.target;
            if spec.outgoing(o).is_empty() {
                continue;
            }
            let chosen = strategy
                .get(o)
                .filter(|&c| c < spec.transitions().len() && spec.transition(c).source == o)
                .ok_or_else(|| SynthError::StrategyUndefined(spec.state_name(o).to_string()))?;
            let output = spec.transition(chosen);
            let next = output.target;
            let target = match id[next] {
                Some(s) => s,
                None => {
                    let s = t.add_state(spec.state_name(next));
                    t.set_final(s, spec.is_final(next));
                    id[next] = Some(s);
                    queue.push_back(next);
                    s
                }
            };
            t.add_transition(id[p].expect("visited"), input.symbol, output.symbol, target)?;
        }
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_wfa;

    #[test]
    fn fixture_arena_shape() {
        let spec = parse_wfa(include_str!("../../../../fixtures/running-example.wfa")).unwrap();
        let (arena, sink) = spec_to_prefix_arena(&spec);
        assert_eq!(arena.num_vertices(), spec.num_states() + 1);
        assert!(sink.is_some());
        assert_eq!(arena.critical_set().iter().filter(|&&c| c).count(), 2);
        for q in 0..spec.num_states() {
            assert_eq!(arena.owner(q) == Owner::Adam, spec.is_input_state(q));
        }
        assert!(arena.check_deadlock_free().is_ok());
    }

    #[test]
    fn epsilon_spec() {
        let spec = parse_wfa("wfa\nmeasure: sum\ninputs: a\noutputs: b\ninitial: q\nfinals: q\n").unwrap();
        let (arena, sink) = spec_to_prefix_arena(&spec);
        assert!(arena.is_critical(arena.initial()));
        assert_eq!(sink, Some(1));
    }
}
