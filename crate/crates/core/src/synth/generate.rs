use crate::game::{Arena, Owner, VertexId};
use crate::spec::{Measure, SpecError, WeightedSpec};

/// Inserts 0-weight relay vertices so that owners alternate along every
/// edge and the initial vertex is Adam's. Cycle signs are preserved.
fn alternating(arena: &Arena) -> Arena {
    let mut out = Arena::new();
    for v in arena.vertices() {
        let id = out.add_vertex(arena.name(v), arena.owner(v));
        out.set_critical(id, arena.is_critical(v));
    }
    for v in arena.vertices() {
        for &e in arena.out_edges(v) {
            let edge = arena.edge(e);
            if arena.owner(edge.source) == arena.owner(edge.target) {
                let relay = out.add_vertex(format!("{}~{e}", arena.name(v)), arena.owner(v).opponent());
                out.add_edge(v, edge.weight, relay);
                out.add_edge(relay, 0, edge.target);
            } else {
                out.add_edge(v, edge.weight, edge.target);
            }
        }
    }
    let v0 = arena.initial();
    if arena.owner(v0) == Owner::Adam {
        out.set_initial(v0);
    } else {
        let start = out.add_vertex(format!("{}~start", arena.name(v0)), Owner::Adam);
        out.add_edge(start, 0, v0);
        out.set_initial(start);
    }
    out
}

/// The Sum specification whose threshold problem `>= 0` (equivalently
/// `> -1`) is solved exactly when Eve wins the mean-payoff game `MP >= 0`.
///
/// Adam's `i`-th edge reads input `a<i>`, Eve's reads output `b<i>`; inputs
/// beyond Adam's out-degree repeat his first edge. A prefix `a1 b1` with
/// weight `N = Σ|w|` leads to the initial vertex, and Adam may end the word
/// with `bot b1` from any of his vertices.
pub fn gen_spec_from_mp_game(arena: &Arena) -> Result<WeightedSpec, SpecError> {
    arena.check_deadlock_free().map_err(|e| SpecError::Invalid(e.to_string()))?;
    let g = alternating(arena);
    let degree = |owner: Owner| {
        g.vertices()
            .filter(|&v| g.owner(v) == owner)
            .map(|v| g.out_edges(v).len())
            .max()
            .unwrap_or(0)
            .max(1)
    };
    let (m, n) = (degree(Owner::Adam), degree(Owner::Eve));
    let big_n: i64 = arena
        .edges()
        .iter()
        .map(|e| e.weight.checked_abs())
        .try_fold(0i64, |acc, w| w.and_then(|w| acc.checked_add(w)))
        .ok_or_else(|| SpecError::Invalid("weight sum overflows".into()))?;
    let state = |v: VertexId| format!("v:{}", g.name(v));
    let mut inputs: Vec<String> = (1..=m).map(|i| format!("a{i}")).collect();
    inputs.push("bot".into());
    let outputs: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    let mut b = WeightedSpec::builder(Measure::Sum);
    b.inputs(inputs).outputs(outputs).initial("_qi").final_state("_qf");
    b.transition("_qi", "a1", 0, "_q");
    b.transition("_q", "b1", big_n, &state(g.initial()));
    b.transition("_qbot", "b1", 0, "_qf");
    for v in g.vertices() {
        let out = g.out_edges(v);
        match g.owner(v) {
            Owner::Adam => {
                for i in 0..m {
                    let edge = g.edge(out[if i < out.len() { i } else { 0 }]);
                    b.transition(&state(v), &format!("a{}", i + 1), edge.weight, &state(edge.target));
                }
                b.transition(&state(v), "bot", 0, "_qbot");
            }
            Owner::Eve => {
                for (i, &e) in out.iter().enumerate() {
                    let edge = g.edge(e);
                    b.transition(&state(v), &format!("b{}", i + 1), edge.weight, &state(edge.target));
                }
            }
        }
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::synth::{synth_threshold, Cmp, SynthResult};

    fn single(owner: Owner, w: i64) -> Arena {
        let mut a = Arena::new();
        let v = a.add_vertex("v", owner);
        a.add_edge(v, w, v);
        a
    }

    #[test]
    fn eve_zero_loop_is_realizable() {
        let spec = gen_spec_from_mp_game(&single(Owner::Eve, 0)).unwrap();
        assert!(matches!(synth_threshold(&spec, Cmp::Ge, &int(0)).unwrap(), SynthResult::Realizable(_)));
    }

    #[test]
    fn adam_negative_loop_is_unrealizable() {
        let spec = gen_spec_from_mp_game(&single(Owner::Adam, -1)).unwrap();
        assert!(matches!(synth_threshold(&spec, Cmp::Ge, &int(0)).unwrap(), SynthResult::Unrealizable));
        assert!(matches!(synth_threshold(&spec, Cmp::Gt, &int(-1)).unwrap(), SynthResult::Unrealizable));
    }
}
