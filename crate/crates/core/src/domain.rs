//! Domain automata, domain-safety and the two-run safety game.
//!
//! The domain automaton of a spec keeps the input transitions and turns every
//! output transition into an ε-transition. An output transition `(p, b, q)`
//! is domain-safe when the residual domains of `p` and `q` coincide.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use crate::game::{solve_safety, Arena, Owner, VertexId};
use crate::spec::dot::quote;
use crate::spec::{Polarity, StateId, SymbolId, TransitionId, WeightedSpec};

/// A state of the determinized domain automaton: a set of input states.
pub type DomainSet = Vec<StateId>;

/// ε-closure restricted to input states: an output state stands for all of
/// its output successors.
pub fn closure(spec: &WeightedSpec, states: impl IntoIterator<Item = StateId>) -> DomainSet {
    let mut set = BTreeSet::new();
    for s in states {
        match spec.polarity(s) {
            Polarity::Input => {
                set.insert(s);
            }
            Polarity::Output => {
                for &t in spec.outgoing(s) {
                    set.insert(spec.transition(t).target);
                }
            }
        }
    }
    set.into_iter().collect()
}

pub fn domain_step(spec: &WeightedSpec, set: &[StateId], a: SymbolId) -> DomainSet {
    closure(spec, set.iter().filter_map(|&p| spec.step(p, a)))
}

pub fn domain_accepts(spec: &WeightedSpec, set: &[StateId]) -> bool {
    set.iter().any(|&p| spec.is_final(p))
}

/// `u ∈ dom(S)`.
pub fn domain_membership(spec: &WeightedSpec, u: &[SymbolId]) -> bool {
    let mut set = closure(spec, [spec.initial()]);
    for &a in u {
        set = domain_step(spec, &set, a);
        if set.is_empty() {
            return false;
        }
    }
    domain_accepts(spec, &set)
}

/// Searches the product of two determinized domain automata for a word
/// accepted by exactly one of them, breadth-first so the word is shortest.
/// Symbols are matched by name over the union of both input alphabets.
pub fn domain_difference(
    left: &WeightedSpec,
    left_start: DomainSet,
    right: &WeightedSpec,
    right_start: DomainSet,
) -> Option<Vec<String>> {
    let mut symbols: Vec<&str> = left.inputs().symbols().iter().map(String::as_str).collect();
    for s in right.inputs().symbols() {
        if !left.inputs().contains(s) {
            symbols.push(s);
        }
    }
    let step = |spec: &WeightedSpec, set: &[StateId], name: &str| match spec.inputs().id(name) {
        Some(a) => domain_step(spec, set, a),
        None => Vec::new(),
    };
    type Pair = (DomainSet, DomainSet);
    let start = (left_start, right_start);
    let mut parent: HashMap<Pair, Option<(Pair, usize)>> = HashMap::from([(start.clone(), None)]);
    let mut queue = VecDeque::from([start]);
    while let Some(pair) = queue.pop_front() {
        if domain_accepts(left, &pair.0) != domain_accepts(right, &pair.1) {
            let mut word = Vec::new();
            let mut cur = pair;
            while let Some(Some((prev, a))) = parent.get(&cur).cloned() {
                word.push(symbols[a].to_string());
                cur = prev;
            }
            word.reverse();
            return Some(word);
        }
        if pair.0.is_empty() && pair.1.is_empty() {
            continue;
        }
        for (i, name) in symbols.iter().enumerate() {
            let next = (step(left, &pair.0, name), step(right, &pair.1, name));
            if !parent.contains_key(&next) {
                parent.insert(next.clone(), Some((pair.clone(), i)));
                queue.push_back(next);
            }
        }
    }
    None
}

/// `dom(a) = dom(b)` for two specs over the same input symbol names.
pub fn domains_equal(a: &WeightedSpec, b: &WeightedSpec) -> bool {
    domain_difference(a, closure(a, [a.initial()]), b, closure(b, [b.initial()])).is_none()
}

/// Output transitions reachable from the initial state whose target has a
/// different residual domain than their source.
pub fn unsafe_transitions(spec: &WeightedSpec) -> Vec<TransitionId> {
    let reachable = spec.reachable();
    let mut memo: HashMap<(DomainSet, DomainSet), bool> = HashMap::new();
    let mut result = Vec::new();
    for (id, t) in spec.transitions().iter().enumerate() {
        if !reachable[t.source] || spec.polarity(t.source) != Polarity::Output {
            continue;
        }
        let from = closure(spec, [t.source]);
        let to = vec![t.target];
        let equal = *memo
            .entry((from.clone(), to.clone()))
            .or_insert_with(|| domain_difference(spec, from, spec, to).is_none());
        if !equal {
            result.push(id);
        }
    }
    result
}

pub fn is_domain_safe(spec: &WeightedSpec) -> bool {
    unsafe_transitions(spec).is_empty()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Both runs at input states; Adam picks the input.
    Input,
    /// Both runs at output states; Eve picks her output.
    EveOutput,
    /// Eve has answered; Adam picks the output of his run.
    AdamOutput,
}

/// Game vertex `(Eve's run, Adam's run, phase)`; Eve's run is `None` once it
/// has blocked.
pub type TwoRunVertex = (Option<StateId>, StateId, Phase);

/// Eve follows the spec with her own outputs while Adam follows it with
/// arbitrary outputs on the same inputs; Adam wins by reaching a final state
/// while Eve's run is not in one.
#[derive(Debug, Clone)]
pub struct TwoRunSafetyGame {
    pub arena: Arena,
    pub vertices: Vec<TwoRunVertex>,
    pub index: HashMap<TwoRunVertex, VertexId>,
    pub losing: Vec<bool>,
}

impl TwoRunSafetyGame {
    pub fn build(spec: &WeightedSpec) -> TwoRunSafetyGame {
        let mut game = TwoRunSafetyGame {
            arena: Arena::new(),
            vertices: Vec::new(),
            index: HashMap::new(),
            losing: Vec::new(),
        };
        let start = (Some(spec.initial()), spec.initial(), Phase::Input);
        game.intern(spec, start);
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            let (eve, adam, phase) = game.vertices[v];
            let mut successors = Vec::new();
            match phase {
                Phase::Input => {
                    for &t in spec.outgoing(adam) {
                        let tr = spec.transition(t);
                        let e = eve.and_then(|p| spec.step(p, tr.symbol));
                        successors.push((e, tr.target, Phase::EveOutput));
                    }
                }
                Phase::EveOutput => match eve.map(|p| spec.outgoing(p)).filter(|o| !o.is_empty()) {
                    Some(outs) => {
                        for &t in outs {
                            successors.push((Some(spec.transition(t).target), adam, Phase::AdamOutput));
                        }
                    }
                    None => successors.push((None, adam, Phase::AdamOutput)),
                },
                Phase::AdamOutput => {
                    for &t in spec.outgoing(adam) {
                        successors.push((eve, spec.transition(t).target, Phase::Input));
                    }
                }
            }
            for s in successors {
                let before = game.vertices.len();
                let id = game.intern(spec, s);
                if id == before {
                    queue.push_back(id);
                }
                game.arena.add_edge(v, 0, id);
            }
        }
        game
    }

    fn intern(&mut self, spec: &WeightedSpec, v: TwoRunVertex) -> VertexId {
        if let Some(&id) = self.index.get(&v) {
            return id;
        }
        let (eve, adam, phase) = v;
        let owner = if phase == Phase::EveOutput {
            Owner::Eve
        } else {
            Owner::Adam
        };
        let eve_name = eve.map_or("⊥", |p| spec.state_name(p));
        let tag = match phase {
            Phase::Input => "",
            Phase::EveOutput => "",
            Phase::AdamOutput => "'",
        };
        let id = self
            .arena
            .add_vertex(format!("({eve_name},{}){tag}", spec.state_name(adam)), owner);
        let losing = phase == Phase::Input && spec.is_final(adam) && !eve.is_some_and(|p| spec.is_final(p));
        self.losing.push(losing);
        self.vertices.push(v);
        self.index.insert(v, id);
        id
    }

    /// Eve's winning region (complement of Adam's attractor to the losing set).
    pub fn solve(&self) -> Vec<bool> {
        let safe: Vec<bool> = self.losing.iter().map(|l| !l).collect();
        solve_safety(&self.arena, &safe).0
    }

    pub fn vertex(&self, v: TwoRunVertex) -> Option<VertexId> {
        self.index.get(&v).copied()
    }

    /// Eve vertices are boxes, Adam vertices circles, losing vertices filled.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tworun {\n");
        for v in self.arena.vertices() {
            let shape = match self.arena.owner(v) {
                Owner::Eve => "box",
                Owner::Adam => "circle",
            };
            let style = if self.losing[v] {
                ", style=filled, fillcolor=lightcoral"
            } else {
                ""
            };
            writeln!(out, "  {} [shape={shape}{style}];", quote(self.arena.name(v))).unwrap();
        }
        for e in self.arena.edges() {
            writeln!(out, "  {} -> {};", quote(self.arena.name(e.source)), quote(self.arena.name(e.target))).unwrap();
        }
        out.push_str("}\n");
        out
    }
}

/// Result of [`make_domain_safe`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DomainSafeResult {
    Safe(WeightedSpec),
    NoBooleanRealizer,
}

/// Prunes the spec to Eve's winning region in the two-run safety game and
/// trims. The result has the same domain and the same Boolean realizers and
/// is domain-safe; when Eve loses from the start there is no Boolean realizer.
pub fn make_domain_safe(spec: &WeightedSpec) -> DomainSafeResult {
    let game = TwoRunSafetyGame::build(spec);
    let region = game.solve();
    if !region[0] {
        return DomainSafeResult::NoBooleanRealizer;
    }
    let winning = |v: TwoRunVertex| game.vertex(v).is_some_and(|id| region[id]);
    let keep_state: Vec<bool> = (0..spec.num_states())
        .map(|q| {
            let phase = match spec.polarity(q) {
                Polarity::Input => Phase::Input,
                Polarity::Output => Phase::EveOutput,
            };
            winning((Some(q), q, phase))
        })
        .collect();
    let keep_transition: Vec<bool> = spec
        .transitions()
        .iter()
        .map(|t| match spec.polarity(t.source) {
            Polarity::Input => true,
            Polarity::Output => match game.vertex((Some(t.target), t.source, Phase::AdamOutput)) {
                Some(id) => region[id],
                None => true,
            },
        })
        .collect();
    let (pruned, _) = spec.restrict(&keep_state, &keep_transition);
    DomainSafeResult::Safe(pruned.trim())
}
