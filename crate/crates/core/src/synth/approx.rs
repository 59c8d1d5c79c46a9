use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{check_bound, domain_safe, synth_boolean, verified, Objective, SynthError, SynthResult};
use crate::game::{
    solve_imperfect_energy_capped, ActionId, EnergyOutcome, ImperfectArena, ObsId, ObservationStrategy, VertexId,
};
use crate::prefix::reduce_prefix_energy_to_energy;
use crate::spec::{Measure, MealyTransducer, StateId, SymbolId, WeightedSpec};

/// Vertices of the approximation game. `eve` follows the outputs Eve
/// chooses, `adv` is the run Adam builds on the same input, hidden from Eve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ApproxVertex {
    Pair { eve: StateId, adv: StateId },
    Choice { eve: StateId, adv: StateId, input: SymbolId },
    Bottom,
    /// Non-critical copy of the initial pair for strict bounds.
    Start,
}

/// Critical prefix energy game with imperfect information whose
/// observation-based winning strategies are the approximate realizers.
///
/// The energy level at `(p, q)` is `Sum(eve run) - Sum(adv run)` scaled by
/// `den(r)`, plus `num(r)` per letter (Avg) or once as credit (Sum).
#[derive(Debug, Clone)]
pub struct ApproxGame {
    pub arena: ImperfectArena,
    pub credit: u64,
    pub vertices: Vec<ApproxVertex>,
    /// The completed spec the `eve` components run on.
    pub spec: WeightedSpec,
    choose: ActionId,
    output_action: Vec<ActionId>,
    pair_obs: HashMap<StateId, ObsId>,
    choice_obs: HashMap<(StateId, SymbolId), ObsId>,
}

fn scaled(scale: &BigInt, diff: i64, step: &BigInt) -> Result<i64, SynthError> {
    (scale * BigInt::from(diff) + step).to_i64().ok_or(SynthError::Overflow)
}

/// Builds the approximation game for `bestVal(u) - S(u ⊗ f(u)) <= r`, or
/// `< r` when `strict` (then the first move costs one extra unit, and the
/// empty input is left to the caller).
pub fn build_approx_game(spec: &WeightedSpec, strict: bool, r: &BigRational) -> Result<ApproxGame, SynthError> {
    check_bound(r)?;
    let step = match spec.measure() {
        Measure::Avg => r.numer().clone(),
        Measure::Sum => BigInt::zero(),
        Measure::Dsum => return Err(dsum_unsupported()),
    };
    let scale = r.denom().clone();
    let credit = match spec.measure() {
        Measure::Sum => r.numer().to_u64().ok_or(SynthError::Overflow)?,
        _ => 0,
    };
    let (full, _, _) = spec.completed();
    let reach = spec.reachable();
    let coreach = spec.coreachable();
    let trim = |q: StateId| reach[q] && coreach[q];

    let mut arena = ImperfectArena::new();
    let choose = arena.add_action("_choose");
    let output_action: Vec<ActionId> = spec.outputs().symbols().iter().map(|b| arena.add_action(b)).collect();
    let mut vertices = Vec::new();
    let mut index: HashMap<ApproxVertex, VertexId> = HashMap::new();
    let mut pair_obs = HashMap::new();
    let mut choice_obs = HashMap::new();
    let mut queue = VecDeque::new();
    let mut vertex = |arena: &mut ImperfectArena, queue: &mut VecDeque<ApproxVertex>, v: ApproxVertex| -> VertexId {
        if let Some(&id) = index.get(&v) {
            return id;
        }
        let (name, obs, critical) = match v {
            ApproxVertex::Pair { eve, adv } => (
                format!("{}|{}", full.state_name(eve), full.state_name(adv)),
                *pair_obs.entry(eve).or_insert_with(|| arena.observation_class(full.state_name(eve))),
                spec.is_final(adv),
            ),
            ApproxVertex::Choice { eve, adv, input } => {
                let a = spec.inputs().name(input);
                let obs = *choice_obs
                    .entry((eve, input))
                    .or_insert_with(|| arena.observation_class(&format!("{}/{a}", full.state_name(eve))));
                (format!("{}|{}|{a}", full.state_name(eve), full.state_name(adv)), obs, false)
            }
            ApproxVertex::Bottom => ("_bot".to_string(), arena.observation_class("_bot"), true),
            ApproxVertex::Start => {
                let q0 = spec.initial();
                let obs = *pair_obs.entry(q0).or_insert_with(|| arena.observation_class(full.state_name(q0)));
                ("_start".to_string(), obs, false)
            }
        };
        let id = arena.add_vertex(name);
        arena.set_observation(id, obs);
        arena.set_critical(id, critical);
        index.insert(v, id);
        vertices.push(v);
        queue.push_back(v);
        id
    };

    let q0 = spec.initial();
    let initial = if strict {
        vertex(&mut arena, &mut queue, ApproxVertex::Start)
    } else {
        vertex(&mut arena, &mut queue, ApproxVertex::Pair { eve: q0, adv: q0 })
    };
    arena.set_initial(initial);
    while let Some(v) = queue.pop_front() {
        let from = vertex(&mut arena, &mut queue, v);
        match v {
            ApproxVertex::Pair { eve, adv } => {
                pair_moves(&full, spec, &trim, &scale, &step, eve, adv, 0, &mut |w, next| {
                    let to = vertex(&mut arena, &mut queue, next);
                    arena.add_edge(from, choose, w, to);
                })?;
                arena.add_edge(from, choose, 0, from);
            }
            ApproxVertex::Start => {
                pair_moves(&full, spec, &trim, &scale, &step, q0, q0, -1, &mut |w, next| {
                    let to = vertex(&mut arena, &mut queue, next);
                    arena.add_edge(from, choose, w, to);
                })?;
                arena.add_edge(from, choose, 0, from);
            }
            ApproxVertex::Choice { eve, adv, .. } => {
                for b in spec.outputs().ids() {
                    let mine = full.transition(full.delta(eve, b).expect("completed spec"));
                    for &e in spec.outgoing(adv) {
                        let theirs = spec.transition(e);
                        if !trim(theirs.target) {
                            continue;
                        }
                        let w = scaled(&scale, mine.weight - theirs.weight, &step)?;
                        let to = vertex(&mut arena, &mut queue, ApproxVertex::Pair { eve: mine.target, adv: theirs.target });
                        arena.add_edge(from, output_action[b], w, to);
                    }
                }
            }
            ApproxVertex::Bottom => {
                arena.add_edge(from, choose, -1, from);
            }
        }
    }
    Ok(ApproxGame {
        arena,
        credit,
        vertices,
        spec: full,
        choose,
        output_action,
        pair_obs,
        choice_obs,
    })
}

/// Adam's input moves from the pair `(eve, adv)`, plus the escape to the
/// bottom vertex when his run is accepting and Eve's is not.
#[allow(clippy::too_many_arguments)]
fn pair_moves(
    full: &WeightedSpec,
    spec: &WeightedSpec,
    trim: &dyn Fn(StateId) -> bool,
    scale: &BigInt,
    step: &BigInt,
    eve: StateId,
    adv: StateId,
    offset: i64,
    add: &mut dyn FnMut(i64, ApproxVertex),
) -> Result<(), SynthError> {
    for a in spec.inputs().ids() {
        let Some(theirs) = spec.delta(adv, a).map(|e| spec.transition(e)) else { continue };
        if !trim(theirs.target) {
            continue;
        }
        let mine = full.transition(full.delta(eve, a).expect("completed spec"));
        let w = scaled(scale, mine.weight - theirs.weight, step)?
            .checked_add(offset)
            .ok_or(SynthError::Overflow)?;
        add(w, ApproxVertex::Choice { eve: mine.target, adv: theirs.target, input: a });
    }
    if !full.is_final(eve) && spec.is_final(adv) {
        add(0, ApproxVertex::Bottom);
    }
    Ok(())
}

impl ApproxGame {
    /// The transducer of a finite-memory observation-based strategy: its
    /// states are the memories held at input positions.
    pub fn transducer(&self, strategy: &ObservationStrategy) -> MealyTransducer {
        let eve_state = |m: usize| -> StateId {
            let v = strategy.beliefs[m].0[0].0;
            match self.vertices[v] {
                ApproxVertex::Pair { eve, .. } => eve,
                _ => self.spec.initial(),
            }
        };
        let initial_obs = self.arena.observation(self.arena.initial());
        let name = |m: usize| format!("{}_m{m}", self.spec.state_name(eve_state(m)));
        let mut t = MealyTransducer::new(self.spec.inputs().clone(), self.spec.outputs().clone(), "_init");
        let Some(&(_, m0)) = strategy.table.get(&(strategy.start, initial_obs)) else {
            return t;
        };
        t = MealyTransducer::new(self.spec.inputs().clone(), self.spec.outputs().clone(), &name(m0));
        let mut id: HashMap<usize, StateId> = HashMap::from([(m0, t.initial())]);
        t.set_final(t.initial(), self.spec.is_final(eve_state(m0)));
        let mut queue = VecDeque::from([m0]);
        while let Some(m) = queue.pop_front() {
            let p = eve_state(m);
            for a in self.spec.inputs().ids() {
                let pa = self.spec.step(p, a).expect("completed spec");
                let Some(&o) = self.choice_obs.get(&(pa, a)) else { continue };
                let Some(&(action, m1)) = strategy.table.get(&(m, o)) else { continue };
                let Some(b) = self.output_action.iter().position(|&x| x == action) else { continue };
                let pb = self.spec.step(pa, b).expect("completed spec");
                let Some(&o2) = self.pair_obs.get(&pb) else { continue };
                let Some(&(next_action, m2)) = strategy.table.get(&(m1, o2)) else { continue };
                debug_assert_eq!(next_action, self.choose);
                let target = *id.entry(m2).or_insert_with(|| {
                    let s = t.add_state(&name(m2));
                    t.set_final(s, self.spec.is_final(pb));
                    queue.push_back(m2);
                    s
                });
                t.add_transition(id[&m], a, b, target).expect("one move per input");
            }
        }
        t
    }
}

fn dsum_unsupported() -> SynthError {
    SynthError::Unsupported("approximate synthesis for dsum requires determinizing discounted-sum automata".into())
}

/// Approximate synthesis through the capped imperfect-information energy
/// game. `cap` bounds the energy kept in the critical prefix game; a loss at
/// the cap is reported as unknown, never as unrealizable.
pub fn synth_approx(spec: &WeightedSpec, strict: bool, r: &BigRational, cap: u64) -> Result<SynthResult, SynthError> {
    if spec.measure() == Measure::Dsum {
        return Err(dsum_unsupported());
    }
    check_bound(r)?;
    let objective = Objective::Approx {
        strict,
        r: r.clone(),
    };
    if domain_safe(spec).is_none() {
        return Ok(SynthResult::NoBooleanRealizer);
    }
    if !spec.coreachable()[spec.initial()] {
        // Empty domain: every Boolean realizer qualifies.
        return match synth_boolean(spec)? {
            SynthResult::Realizable(t) => verified(spec, t, &objective),
            other => Ok(other),
        };
    }
    if strict && r.is_zero() {
        // bestVal(u) - S(u ⊗ f(u)) >= 0 always.
        return Ok(SynthResult::Unrealizable);
    }
    let coreach = spec.coreachable();
    let nonempty_word = spec.outgoing(spec.initial()).iter().any(|&e| {
        let o = spec.transition(e).target;
        spec.outgoing(o).iter().any(|&f| coreach[spec.transition(f).target])
    });
    if !nonempty_word {
        // The domain is {ε}, where the gap is 0.
        return match synth_boolean(spec)? {
            SynthResult::Realizable(t) => verified(spec, t, &objective),
            other => Ok(other),
        };
    }
    let game = build_approx_game(spec, strict, r)?;
    let (reduced, credit) = reduce_prefix_energy_to_energy(&game.arena, game.credit)?;
    let bound = credit - game.credit;
    let effective_cap = cap.max(game.credit).checked_add(bound).ok_or(SynthError::Overflow)?;
    log::debug!(
        "approximation game: {} vertices, credit {credit}, cap {effective_cap}",
        game.arena.num_vertices()
    );
    match solve_imperfect_energy_capped(&reduced, credit, effective_cap)? {
        EnergyOutcome::Win(strategy) => verified(spec, game.transducer(&strategy).minimized(), &objective),
        EnergyOutcome::NotWinAtCap => Ok(SynthResult::UnknownAtCap(cap)),
    }
}
