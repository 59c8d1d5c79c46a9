//! Critical prefix threshold games and their reductions.
//!
//! The objective requires every play prefix that ends in a critical vertex to
//! satisfy `V(prefix) cmp ν`. The one-vertex prefix counts, with value 0.

use std::collections::VecDeque;
use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

pub use crate::game::Cmp;
use crate::dsum::{exists_path_leq, exists_path_lt, PathCheck, WeightedGraph};
use crate::game::{
    attractor, emit_arena, solve_discounted_sum, solve_mean_payoff, solve_safety, Arena, EdgeId, GameError,
    ImperfectArena, Owner, PositionalStrategy, VertexId,
};
use crate::rational::{format_rational, is_discount};
use crate::spec::Measure;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrefixError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("the discounted-sum reduction is only sound for non-strict thresholds")]
    StrictDsumReduction,
    #[error("dsum objectives need a discount factor 0 < lambda < 1")]
    MissingDiscount,
    #[error("scaled weights exceed 64-bit integers")]
    Overflow,
    #[error("Adam cannot force a visit to a critical vertex from every reachable vertex")]
    HypothesisFailed,
}

/// `V(prefix) cmp ν` at every critical prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixObjective {
    pub measure: Measure,
    pub cmp: Cmp,
    pub nu: BigRational,
    pub lambda: Option<BigRational>,
}

impl PrefixObjective {
    pub fn new(measure: Measure, cmp: Cmp, nu: BigRational) -> Self {
        PrefixObjective {
            measure,
            cmp,
            nu,
            lambda: None,
        }
    }

    pub fn dsum(cmp: Cmp, nu: BigRational, lambda: BigRational) -> Self {
        PrefixObjective {
            measure: Measure::Dsum,
            cmp,
            nu,
            lambda: Some(lambda),
        }
    }

    fn discount(&self) -> Result<&BigRational, PrefixError> {
        self.lambda
            .as_ref()
            .filter(|l| is_discount(l))
            .ok_or(PrefixError::MissingDiscount)
    }
}

/// Outcome of a critical prefix threshold game.
#[derive(Debug, Clone)]
pub struct PrefixSolution {
    pub winner: Owner,
    /// Eve's positional winning strategy, verified against the objective.
    pub strategy: Option<PositionalStrategy>,
    /// Optimal value of the initial vertex in the discounted-sum game, when
    /// that reduction was used.
    pub reduced_value: Option<BigRational>,
    /// Human-readable log of the reductions performed.
    pub trace: String,
}

fn checked(v: i128) -> Result<i64, PrefixError> {
    i64::try_from(v).map_err(|_| PrefixError::Overflow)
}

fn to_i64(v: &BigInt) -> Result<i64, PrefixError> {
    v.to_i64().ok_or(PrefixError::Overflow)
}

/// With `ν = p/q`, every weight `w` becomes `q·w - p`: for nonempty prefixes
/// `Avg cmp ν` iff the new sum `cmp 0`.
pub fn reduce_avg_to_sum(arena: &Arena, nu: &BigRational) -> Result<Arena, PrefixError> {
    let p = nu.numer();
    let q = nu.denom();
    let mut weights = Vec::with_capacity(arena.num_edges());
    for e in arena.edges() {
        weights.push(to_i64(&(q * BigInt::from(e.weight) - p))?);
    }
    Ok(arena.with_weights(&weights))
}

/// Sum arena with integer threshold: weights multiplied by `den(ν)` and
/// strict thresholds lowered to `ν + 1`.
fn scale_sum(arena: &Arena, cmp: Cmp, nu: &BigRational) -> Result<(Arena, BigInt), PrefixError> {
    let q = nu.denom().clone();
    let mut threshold = nu.numer().clone();
    if cmp.is_strict() {
        threshold += 1;
    }
    let mut weights = Vec::with_capacity(arena.num_edges());
    for e in arena.edges() {
        weights.push(to_i64(&(&q * BigInt::from(e.weight)))?);
    }
    Ok((arena.with_weights(&weights), threshold))
}

/// A reduced arena together with where its vertices and edges came from.
#[derive(Debug, Clone)]
pub struct Reduction {
    pub arena: Arena,
    /// Original vertex of each new vertex (gadgets point to their base).
    pub vertex_origin: Vec<Option<VertexId>>,
    /// Original edge represented by each new edge, if any.
    pub edge_origin: Vec<Option<EdgeId>>,
    /// New vertex carrying Eve's choice for each original Eve vertex.
    pub choice_vertex: Vec<Option<VertexId>>,
    /// Vertices from which Adam can force a critical visit.
    pub attractor: Vec<bool>,
}

impl Reduction {
    /// Pulls a strategy back: inside the attractor from the reduced game,
    /// outside from Eve's strategy for avoiding critical vertices.
    fn pull_back(&self, original: &Arena, reduced: &PositionalStrategy) -> PositionalStrategy {
        let outside: Vec<bool> = self.attractor.iter().map(|a| !a).collect();
        let (_, avoid) = solve_safety(original, &outside);
        let mut sigma = PositionalStrategy::new(original.num_vertices());
        for v in original.vertices() {
            if original.owner(v) != Owner::Eve {
                continue;
            }
            let e = if self.attractor[v] {
                self.choice_vertex[v]
                    .and_then(|c| reduced.get(c))
                    .and_then(|e| self.edge_origin[e])
            } else {
                avoid.get(v)
            };
            if let Some(e) = e.or_else(|| original.out_edges(v).first().copied()) {
                sigma.set(v, e);
            }
        }
        sigma
    }
}

/// Arena under construction with the origin of each added edge.
struct Builder {
    arena: Arena,
    origin: Vec<Option<EdgeId>>,
}

impl Builder {
    fn edge(&mut self, s: VertexId, w: i64, t: VertexId, origin: Option<EdgeId>) {
        self.arena.add_edge(s, w, t);
        self.origin.push(origin);
    }
}

/// Either Eve wins by never letting the play reach a critical vertex, or the
/// reduced game.
#[derive(Debug, Clone)]
pub enum ReductionOutcome {
    EveWinsTrivially(PositionalStrategy),
    Reduced(Reduction),
}

fn trivial_or(arena: &Arena) -> Result<Vec<bool>, PositionalStrategy> {
    let (attr, _) = attractor(arena, &arena.critical_set(), Owner::Adam);
    if attr[arena.initial()] {
        Ok(attr)
    } else {
        let outside: Vec<bool> = attr.iter().map(|a| !a).collect();
        let (_, avoid) = solve_safety(arena, &outside);
        Err(avoid)
    }
}

/// Reduces the critical prefix game `Sum >= ν` (integer `ν`; lower strict
/// thresholds to `ν + 1` first) to a mean-payoff game `MP >= 0`.
///
/// Vertices from which Adam cannot force a critical visit are dropped (edges
/// into them go to an Eve-winning sink). Adam may restart the game from every
/// critical vertex with weight `-ν`; an Eve-owned critical vertex becomes an
/// Adam vertex offering the restart or a 0-weight move to an Eve copy.
pub fn reduce_sum_prefix_to_mp(arena: &Arena, nu: &BigInt) -> Result<ReductionOutcome, PrefixError> {
    let attr = match trivial_or(arena) {
        Ok(attr) => attr,
        Err(avoid) => return Ok(ReductionOutcome::EveWinsTrivially(avoid)),
    };
    let restart = checked(-(to_i64(nu)? as i128))?;
    let mut g = Arena::new();
    let mut vertex_origin = Vec::new();
    let mut id: Vec<Option<VertexId>> = vec![None; arena.num_vertices()];
    let mut choice_vertex: Vec<Option<VertexId>> = vec![None; arena.num_vertices()];
    for v in arena.vertices().filter(|&v| attr[v]) {
        let eve_critical = arena.owner(v) == Owner::Eve && arena.is_critical(v);
        let owner = if eve_critical { Owner::Adam } else { arena.owner(v) };
        let nv = g.add_vertex(arena.name(v), owner);
        g.set_critical(nv, arena.is_critical(v));
        vertex_origin.push(Some(v));
        id[v] = Some(nv);
        choice_vertex[v] = Some(nv);
    }
    for v in arena.vertices().filter(|&v| attr[v]) {
        if arena.owner(v) == Owner::Eve && arena.is_critical(v) {
            let copy = g.add_vertex(format!("{}'", arena.name(v)), Owner::Eve);
            vertex_origin.push(Some(v));
            choice_vertex[v] = Some(copy);
        }
    }
    let sink = g.add_vertex("_sink", Owner::Eve);
    vertex_origin.push(None);
    let mut edge_origin = Vec::new();
    let mut push = |g: &mut Arena, s: VertexId, w: i64, t: VertexId, origin: Option<EdgeId>| {
        g.add_edge(s, w, t);
        edge_origin.push(origin);
    };
    push(&mut g, sink, 0, sink, None);
    let initial = id[arena.initial()].expect("initial in attractor");
    for v in arena.vertices().filter(|&v| attr[v]) {
        let nv = id[v].expect("kept");
        let from = choice_vertex[v].expect("kept");
        if from != nv {
            push(&mut g, nv, 0, from, None);
        }
        for &e in arena.out_edges(v) {
            let edge = arena.edge(e);
            let target = id[edge.target].unwrap_or(sink);
            push(&mut g, from, edge.weight, target, Some(e));
        }
        if arena.is_critical(v) {
            push(&mut g, nv, restart, initial, None);
        }
    }
    g.set_initial(initial);
    g.complete_deadlocks();
    edge_origin.resize(g.num_edges(), None);
    Ok(ReductionOutcome::Reduced(Reduction {
        arena: g,
        vertex_origin,
        edge_origin,
        choice_vertex,
        attractor: attr,
    }))
}

/// Reduces the critical prefix game `Dsum >= ν` to the discounted-sum game
/// `Dsum >= ν`, where Adam may stop the play at any critical vertex by moving
/// to a 0-weight sink.
///
/// For an Eve-owned critical vertex `v` and each of its edges `e`, an Adam
/// vertex `(v, e)` offers the stop or the move along `e`; Eve predecessors of
/// `v` go straight to the `(v, e)` so that no step is added. Adam predecessors
/// keep their edge into `v` and gain a stop edge with the same weight.
pub fn reduce_dsum_prefix_to_ds(arena: &Arena, cmp: Cmp) -> Result<ReductionOutcome, PrefixError> {
    if cmp.is_strict() {
        return Err(PrefixError::StrictDsumReduction);
    }
    let attr = match trivial_or(arena) {
        Ok(attr) => attr,
        Err(avoid) => return Ok(ReductionOutcome::EveWinsTrivially(avoid)),
    };
    let mut g = Arena::new();
    let mut vertex_origin = Vec::new();
    let mut id: Vec<Option<VertexId>> = vec![None; arena.num_vertices()];
    for v in arena.vertices().filter(|&v| attr[v]) {
        let nv = g.add_vertex(arena.name(v), arena.owner(v));
        g.set_critical(nv, arena.is_critical(v));
        vertex_origin.push(Some(v));
        id[v] = Some(nv);
    }
    let sink = g.add_vertex("_stop", Owner::Adam);
    vertex_origin.push(None);
    let eve_critical = |v: VertexId| arena.owner(v) == Owner::Eve && arena.is_critical(v);
    // Gadget vertices (v, e) for Eve-critical v.
    let mut gadget: Vec<Option<VertexId>> = vec![None; arena.num_edges()];
    for v in arena.vertices().filter(|&v| attr[v] && eve_critical(v)) {
        for &e in arena.out_edges(v) {
            let t = arena.edge(e).target;
            let nv = g.add_vertex(format!("({},{}>{})", arena.name(v), e, arena.name(t)), Owner::Adam);
            vertex_origin.push(Some(v));
            gadget[e] = Some(nv);
        }
    }
    let mut b = Builder {
        arena: g,
        origin: Vec::new(),
    };
    b.edge(sink, 0, sink, None);
    // Moves of an Adam-owned source (original vertex or gadget) along `e`.
    let adam_move = |b: &mut Builder, from: VertexId, e: EdgeId| {
        let edge = arena.edge(e);
        if let Some(t) = id[edge.target] {
            b.edge(from, edge.weight, t, Some(e));
            if eve_critical(edge.target) {
                b.edge(from, edge.weight, sink, Some(e));
            }
        }
    };
    for v in arena.vertices().filter(|&v| attr[v]) {
        let nv = id[v].expect("kept");
        for &e in arena.out_edges(v) {
            let edge = arena.edge(e);
            match arena.owner(v) {
                Owner::Adam => adam_move(&mut b, nv, e),
                Owner::Eve => match id[edge.target] {
                    None => b.edge(nv, 0, sink, Some(e)),
                    Some(_) if eve_critical(edge.target) => {
                        for &f in arena.out_edges(edge.target) {
                            b.edge(nv, edge.weight, gadget[f].expect("gadget"), Some(e));
                        }
                    }
                    Some(t) => b.edge(nv, edge.weight, t, Some(e)),
                },
            }
        }
        if arena.owner(v) == Owner::Adam && arena.is_critical(v) {
            b.edge(nv, 0, sink, None);
        }
    }
    for v in arena.vertices().filter(|&v| attr[v] && eve_critical(v)) {
        for &e in arena.out_edges(v) {
            let gv = gadget[e].expect("gadget");
            b.edge(gv, 0, sink, None);
            adam_move(&mut b, gv, e);
        }
    }
    b.arena.set_initial(id[arena.initial()].expect("initial kept"));
    for v in b.arena.deadlocks() {
        b.edge(v, 0, sink, None);
    }
    Ok(ReductionOutcome::Reduced(Reduction {
        arena: b.arena,
        vertex_origin,
        edge_origin: b.origin,
        choice_vertex: id,
        attractor: attr,
    }))
}

/// A critical prefix of the play that violates the objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub edges: Vec<EdgeId>,
    pub value: BigRational,
}

/// Checks a positional Eve strategy: no play prefix consistent with it ends in
/// a critical vertex with a value violating the threshold.
pub fn check_positional(
    arena: &Arena,
    strategy: &PositionalStrategy,
    obj: &PrefixObjective,
) -> Result<Option<Violation>, PrefixError> {
    let allowed = strategy.allowed_edges(arena, Owner::Eve);
    match obj.measure {
        Measure::Dsum => check_positional_dsum(arena, strategy, obj),
        Measure::Sum => {
            let (scaled, bound) = scale_sum(arena, obj.cmp, &obj.nu)?;
            let weights: Vec<i128> = scaled.edges().iter().map(|e| e.weight as i128).collect();
            let bound = bound.to_i128().ok_or(PrefixError::Overflow)?;
            Ok(sum_violation(arena, &allowed, &weights, bound, false).map(|edges| {
                let value = path_sum(arena, &edges);
                Violation { edges, value }
            }))
        }
        Measure::Avg => {
            if arena.is_critical(arena.initial()) && !obj.cmp.holds(&BigRational::zero(), &obj.nu) {
                return Ok(Some(Violation {
                    edges: Vec::new(),
                    value: BigRational::zero(),
                }));
            }
            let shifted = reduce_avg_to_sum(arena, &obj.nu)?;
            let weights: Vec<i128> = shifted.edges().iter().map(|e| e.weight as i128).collect();
            let bound = if obj.cmp.is_strict() { 1 } else { 0 };
            Ok(sum_violation(arena, &allowed, &weights, bound, true).map(|edges| {
                let value = path_sum(arena, &edges) / BigRational::from_integer(BigInt::from(edges.len()));
                Violation { edges, value }
            }))
        }
    }
}

fn path_sum(arena: &Arena, edges: &[EdgeId]) -> BigRational {
    BigRational::from_integer(edges.iter().map(|&e| BigInt::from(arena.edge(e).weight)).sum())
}

/// Path from the initial vertex to a critical vertex along allowed edges
/// whose weight sum is below `bound`; empty paths are skipped on request.
/// Negative cycles on the way are pumped as often as needed.
fn sum_violation(
    arena: &Arena,
    allowed: &[bool],
    weights: &[i128],
    bound: i128,
    exclude_empty: bool,
) -> Option<Vec<EdgeId>> {
    let n = arena.num_vertices();
    let critical = arena.critical_set();
    // Only vertices that can still reach a critical vertex matter.
    let mut useful = critical.clone();
    let mut queue: VecDeque<VertexId> = (0..n).filter(|&v| useful[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &e in arena.in_edges(v) {
            let u = arena.edge(e).source;
            if allowed[e] && !useful[u] {
                useful[u] = true;
                queue.push_back(u);
            }
        }
    }
    let v0 = arena.initial();
    if !useful[v0] {
        return None;
    }
    // Vertex `n` is a virtual copy of the initial vertex that is never critical.
    let mut edges: Vec<(usize, i128, usize, EdgeId)> = Vec::new();
    for (id, e) in arena.edges().iter().enumerate() {
        if allowed[id] && useful[e.source] && useful[e.target] {
            edges.push((e.source, weights[id], e.target, id));
            if e.source == v0 && exclude_empty {
                edges.push((n, weights[id], e.target, id));
            }
        }
    }
    let source = if exclude_empty { n } else { v0 };
    let mut dist: Vec<Option<i128>> = vec![None; n + 1];
    let mut parent: Vec<Option<usize>> = vec![None; n + 1];
    dist[source] = Some(0);
    let mut relaxed_in_last = None;
    for round in 0..=n + 1 {
        relaxed_in_last = None;
        for (k, &(s, w, t, _)) in edges.iter().enumerate() {
            if let Some(d) = dist[s] {
                if dist[t].is_none_or(|cur| d + w < cur) {
                    dist[t] = Some(d + w);
                    parent[t] = Some(k);
                    relaxed_in_last = Some(t);
                }
            }
        }
        if relaxed_in_last.is_none() || round == n + 1 {
            break;
        }
    }
    let walk_back = |mut v: usize, parent: &[Option<usize>]| -> Vec<usize> {
        let mut path = Vec::new();
        let mut steps = 0;
        while v != source {
            let k = parent[v].expect("reached vertex has a parent");
            path.push(k);
            v = edges[k].0;
            steps += 1;
            if steps > n + 1 {
                break;
            }
        }
        path.reverse();
        path
    };
    let to_edges = |ks: &[usize]| -> Vec<EdgeId> { ks.iter().map(|&k| edges[k].3).collect() };
    let sum_of = |ks: &[usize]| -> i128 { ks.iter().map(|&k| edges[k].1).sum() };
    if let Some(x) = relaxed_in_last {
        // A negative cycle: walk parents until a vertex repeats.
        let mut v = x;
        for _ in 0..=n {
            v = edges[parent[v].expect("parent")].0;
        }
        let start = v;
        let mut cycle = Vec::new();
        loop {
            let k = parent[v].expect("parent");
            cycle.push(k);
            v = edges[k].0;
            if v == start {
                break;
            }
        }
        cycle.reverse();
        let head = bfs(&edges, source, start, n + 1)?;
        let tail = bfs_to_target(&edges, start, &critical, n + 1)?;
        let base = sum_of(&head) + sum_of(&tail);
        let c = sum_of(&cycle);
        debug_assert!(c < 0);
        let mut pumps = 0i128;
        if base >= bound {
            pumps = (base - bound) / (-c) + 1;
        }
        let mut ks = head;
        for _ in 0..pumps {
            ks.extend_from_slice(&cycle);
        }
        ks.extend(tail);
        debug_assert!(sum_of(&ks) < bound);
        return Some(to_edges(&ks));
    }
    let t = (0..n)
        .filter(|&v| critical[v] && dist[v].is_some_and(|d| d < bound))
        .min_by_key(|&v| dist[v])?;
    let ks = walk_back(t, &parent);
    Some(to_edges(&ks))
}

fn bfs(edges: &[(usize, i128, usize, EdgeId)], from: usize, to: usize, n: usize) -> Option<Vec<usize>> {
    let mut targets = vec![false; n];
    targets[to] = true;
    bfs_to_target(edges, from, &targets, n)
}

fn bfs_to_target(edges: &[(usize, i128, usize, EdgeId)], from: usize, targets: &[bool], n: usize) -> Option<Vec<usize>> {
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if targets.get(v).copied().unwrap_or(false) {
            let mut path = Vec::new();
            let mut cur = v;
            while let Some(k) = parent[cur] {
                path.push(k);
                cur = edges[k].0;
            }
            path.reverse();
            return Some(path);
        }
        for (k, &(s, _, t, _)) in edges.iter().enumerate() {
            if s == v && !seen[t] {
                seen[t] = true;
                parent[t] = Some(k);
                queue.push_back(t);
            }
        }
    }
    None
}

/// Restricts the arena to the strategy and looks for a critical prefix with
/// `Dsum <= ν` (strict objective) or `Dsum < ν` (non-strict objective).
pub fn check_positional_dsum(
    arena: &Arena,
    strategy: &PositionalStrategy,
    obj: &PrefixObjective,
) -> Result<Option<Violation>, PrefixError> {
    let lambda = obj.discount()?.clone();
    let allowed = strategy.allowed_edges(arena, Owner::Eve);
    let g = WeightedGraph::from_arena(arena, &allowed, arena.critical_set(), lambda);
    let check = match obj.cmp {
        Cmp::Gt => exists_path_leq(&g, &obj.nu),
        Cmp::Ge => exists_path_lt(&g, &obj.nu),
    };
    Ok(match check {
        PathCheck::No => None,
        PathCheck::Yes(w) => Some(Violation {
            edges: w.edges,
            value: w.dsum,
        }),
    })
}

/// Eve vertices with a choice, and the positional strategies over them in
/// lexicographic order (vertices by index, edges in arena order).
fn enumerate_strategies(arena: &Arena, mut visit: impl FnMut(&PositionalStrategy) -> bool) -> bool {
    let eve: Vec<VertexId> = arena
        .vertices()
        .filter(|&v| arena.owner(v) == Owner::Eve && !arena.out_edges(v).is_empty())
        .collect();
    let mut digits = vec![0usize; eve.len()];
    loop {
        let mut sigma = PositionalStrategy::new(arena.num_vertices());
        for (i, &v) in eve.iter().enumerate() {
            sigma.set(v, arena.out_edges(v)[digits[i]]);
        }
        if visit(&sigma) {
            return true;
        }
        let mut i = eve.len();
        loop {
            if i == 0 {
                return false;
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < arena.out_edges(eve[i]).len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

/// Solves a critical prefix threshold game for any measure and comparison.
///
/// Sum goes through mean-payoff games, Avg through Sum, non-strict Dsum
/// through discounted-sum games; strict Dsum enumerates Eve's positional
/// strategies and path-checks each. Every strategy reported for Eve has been
/// checked against the objective.
pub fn solve_prefix_threshold(arena: &Arena, obj: &PrefixObjective) -> Result<PrefixSolution, PrefixError> {
    arena.check_deadlock_free()?;
    let mut trace = String::new();
    writeln!(
        trace,
        "objective: {} {} {}",
        obj.measure,
        obj.cmp,
        format_rational(&obj.nu)
    )
    .unwrap();
    let v0 = arena.initial();
    if arena.is_critical(v0) && !obj.cmp.holds(&BigRational::zero(), &obj.nu) {
        writeln!(trace, "the empty prefix already violates the threshold").unwrap();
        return Ok(PrefixSolution {
            winner: Owner::Adam,
            strategy: None,
            reduced_value: None,
            trace,
        });
    }
    let (strategy, reduced_value) = match obj.measure {
        Measure::Sum => {
            let (scaled, nu) = scale_sum(arena, obj.cmp, &obj.nu)?;
            writeln!(trace, "scaled to Sum >= {nu}").unwrap();
            (solve_sum(&scaled, &nu, &mut trace)?, None)
        }
        Measure::Avg => {
            let shifted = reduce_avg_to_sum(arena, &obj.nu)?;
            let nu = if obj.cmp.is_strict() { BigInt::one() } else { BigInt::zero() };
            writeln!(trace, "shifted to Sum >= {nu} on nonempty prefixes").unwrap();
            // The empty prefix is settled above, so the shifted game starts
            // from a non-critical copy of the initial vertex.
            let (detached, copy_edges) = detach_initial(&shifted);
            let sigma = solve_sum(&detached, &nu, &mut trace)?;
            let sigma = sigma.map(|s| attach_initial(arena, &s, &copy_edges));
            (sigma, None)
        }
        Measure::Dsum => {
            obj.discount()?;
            match obj.cmp {
                Cmp::Ge => solve_dsum_nonstrict(arena, obj, &mut trace)?,
                Cmp::Gt => (solve_by_enumeration(arena, obj, &mut trace)?, None),
            }
        }
    };
    let Some(sigma) = strategy else {
        return Ok(PrefixSolution {
            winner: Owner::Adam,
            strategy: None,
            reduced_value,
            trace,
        });
    };
    if let Some(v) = check_positional(arena, &sigma, obj)? {
        // The reductions are exact, so this indicates a defect; fall back to
        // the complete enumeration rather than report an unchecked strategy.
        log::warn!("reduced strategy failed its check (prefix of length {}); enumerating", v.edges.len());
        let sigma = solve_by_enumeration(arena, obj, &mut trace)?;
        return Ok(PrefixSolution {
            winner: if sigma.is_some() { Owner::Eve } else { Owner::Adam },
            strategy: sigma,
            reduced_value,
            trace,
        });
    }
    Ok(PrefixSolution {
        winner: Owner::Eve,
        strategy: Some(sigma),
        reduced_value,
        trace,
    })
}

fn solve_sum(arena: &Arena, nu: &BigInt, trace: &mut String) -> Result<Option<PositionalStrategy>, PrefixError> {
    match reduce_sum_prefix_to_mp(arena, nu)? {
        ReductionOutcome::EveWinsTrivially(avoid) => {
            writeln!(trace, "Adam cannot force a critical visit: Eve wins").unwrap();
            Ok(Some(avoid))
        }
        ReductionOutcome::Reduced(red) => {
            writeln!(trace, "mean-payoff game:\n{}", emit_arena(&red.arena)).unwrap();
            let mp = solve_mean_payoff(&red.arena)?;
            writeln!(trace, "mean-payoff winner: {}", mp.winner).unwrap();
            Ok((mp.winner == Owner::Eve).then(|| red.pull_back(arena, &mp.eve_strategy)))
        }
    }
}

/// Adds a non-critical copy of the initial vertex with the same owner and
/// outgoing edges and makes it initial. Returns the copy's edges paired with
/// the original edges they duplicate.
fn detach_initial(arena: &Arena) -> (Arena, Vec<(EdgeId, EdgeId)>) {
    let v0 = arena.initial();
    if !arena.is_critical(v0) {
        return (arena.clone(), Vec::new());
    }
    let mut out = arena.clone();
    let copy = out.add_vertex(format!("{}*", arena.name(v0)), arena.owner(v0));
    let mut pairs = Vec::new();
    for &e in arena.out_edges(v0) {
        let edge = arena.edge(e).clone();
        let ne = out.add_edge(copy, edge.weight, edge.target);
        pairs.push((ne, e));
    }
    out.set_initial(copy);
    (out, pairs)
}

/// Maps a strategy of the detached arena back; the initial vertex takes the
/// choice made at its copy.
fn attach_initial(arena: &Arena, sigma: &PositionalStrategy, copy_edges: &[(EdgeId, EdgeId)]) -> PositionalStrategy {
    let mut out = PositionalStrategy::new(arena.num_vertices());
    for (v, e) in sigma.entries() {
        if v < arena.num_vertices() && e < arena.num_edges() {
            out.set(v, e);
        }
    }
    if !copy_edges.is_empty() {
        // The copy was appended last.
        let copy = arena.num_vertices();
        if let Some(chosen) = sigma.get(copy) {
            if let Some(&(_, orig)) = copy_edges.iter().find(|(c, _)| *c == chosen) {
                out.set(arena.initial(), orig);
            }
        }
    }
    out
}

fn solve_dsum_nonstrict(
    arena: &Arena,
    obj: &PrefixObjective,
    trace: &mut String,
) -> Result<(Option<PositionalStrategy>, Option<BigRational>), PrefixError> {
    let lambda = obj.discount()?;
    match reduce_dsum_prefix_to_ds(arena, obj.cmp)? {
        ReductionOutcome::EveWinsTrivially(avoid) => {
            writeln!(trace, "Adam cannot force a critical visit: Eve wins").unwrap();
            Ok((Some(avoid), None))
        }
        ReductionOutcome::Reduced(red) => {
            writeln!(trace, "discounted-sum game:\n{}", emit_arena(&red.arena)).unwrap();
            let ds = solve_discounted_sum(&red.arena, lambda, &obj.nu, Cmp::Ge)?;
            let value = ds.initial_value(&red.arena).clone();
            writeln!(trace, "initial value: {}", format_rational(&value)).unwrap();
            let sigma = ds.eve_wins.then(|| red.pull_back(arena, &ds.eve_strategy));
            Ok((sigma, Some(value)))
        }
    }
}

fn solve_by_enumeration(
    arena: &Arena,
    obj: &PrefixObjective,
    trace: &mut String,
) -> Result<Option<PositionalStrategy>, PrefixError> {
    let mut found = None;
    let mut error = None;
    let mut tried = 0usize;
    enumerate_strategies(arena, |sigma| {
        tried += 1;
        match check_positional(arena, sigma, obj) {
            Ok(None) => {
                found = Some(sigma.clone());
                true
            }
            Ok(Some(_)) => false,
            Err(e) => {
                error = Some(e);
                true
            }
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    writeln!(trace, "positional strategies checked: {tried}").unwrap();
    Ok(found)
}

/// Every positional Eve strategy together with a violating prefix; empty
/// when some strategy wins.
pub fn refute_all_positional(arena: &Arena, obj: &PrefixObjective) -> Result<Vec<(PositionalStrategy, Violation)>, PrefixError> {
    let mut out = Vec::new();
    let mut error = None;
    let won = enumerate_strategies(arena, |sigma| match check_positional(arena, sigma, obj) {
        Ok(None) => true,
        Ok(Some(v)) => {
            out.push((sigma.clone(), v));
            false
        }
        Err(e) => {
            error = Some(e);
            true
        }
    });
    if let Some(e) = error {
        return Err(e);
    }
    if won {
        out.clear();
    }
    Ok(out)
}

/// Vertices of an imperfect-information arena from which Adam forces a
/// critical visit even against an Eve who sees the current vertex, and the
/// attractor rank of each (0 on critical vertices).
fn forcing_ranks(arena: &ImperfectArena) -> Vec<Option<usize>> {
    let n = arena.num_vertices();
    let mut rank: Vec<Option<usize>> = (0..n).map(|v| arena.is_critical(v).then_some(0)).collect();
    let mut r = 0;
    loop {
        r += 1;
        let mut added = Vec::new();
        for v in 0..n {
            if rank[v].is_some() || arena.out_edges(v).is_empty() {
                continue;
            }
            let forced = (0..arena.num_actions()).filter(|&a| arena.is_enabled(v, a)).all(|a| {
                arena
                    .out_edges(v)
                    .iter()
                    .any(|&e| arena.edge(e).action == a && rank[arena.edge(e).target].is_some_and(|x| x < r))
            });
            if forced {
                added.push(v);
            }
        }
        if added.is_empty() {
            return rank;
        }
        for v in added {
            rank[v] = Some(r);
        }
    }
}

/// The most energy Eve can gain before Adam, moving down the attractor
/// ranks, reaches a critical vertex.
pub fn energy_gain_bound(arena: &ImperfectArena) -> Option<i64> {
    let rank = forcing_ranks(arena);
    let reach = {
        let mut seen = vec![false; arena.num_vertices()];
        seen[arena.initial()] = true;
        let mut stack = vec![arena.initial()];
        while let Some(v) = stack.pop() {
            for &e in arena.out_edges(v) {
                let t = arena.edge(e).target;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    };
    if (0..arena.num_vertices()).any(|v| reach[v] && rank[v].is_none()) {
        return None;
    }
    let mut order: Vec<VertexId> = (0..arena.num_vertices()).filter(|&v| rank[v].is_some()).collect();
    order.sort_by_key(|&v| rank[v]);
    let mut gain: Vec<i128> = vec![0; arena.num_vertices()];
    for &v in &order {
        let r = rank[v].expect("ranked");
        if r == 0 {
            continue;
        }
        let mut best = i128::MIN;
        for a in (0..arena.num_actions()).filter(|&a| arena.is_enabled(v, a)) {
            let worst = arena
                .out_edges(v)
                .iter()
                .map(|&e| arena.edge(e))
                .filter(|e| e.action == a && rank[e.target].is_some_and(|x| x < r))
                .map(|e| e.weight as i128 + gain[e.target])
                .min()
                .expect("forced action has a lower-rank successor");
            best = best.max(worst);
        }
        gain[v] = best;
    }
    let b = order.iter().map(|&v| gain[v]).max().unwrap_or(0).max(0);
    i64::try_from(b).ok()
}

/// The cruder bound `|V| · max(0, w_max)`.
pub fn coarse_energy_bound(arena: &ImperfectArena) -> i64 {
    let w_max = arena.edges().iter().map(|e| e.weight).max().unwrap_or(0).max(0);
    (arena.num_vertices() as i64).saturating_mul(w_max)
}

/// Reduces the critical prefix energy objective with credit `c0` to a plain
/// energy objective with credit `c0 + B`: from every critical vertex each
/// action may also lead, with weight `-B`, to a sink with 0-weight loops.
///
/// The reduction needs Adam to force a critical visit from every reachable
/// vertex; this is checked against an Eve who sees the vertex, which
/// implies it for observation-based Eve.
pub fn reduce_prefix_energy_to_energy(arena: &ImperfectArena, c0: u64) -> Result<(ImperfectArena, u64), PrefixError> {
    let b = energy_gain_bound(arena).ok_or(PrefixError::HypothesisFailed)?;
    let mut out = arena.clone();
    let sink = out.add_vertex("_vB");
    for a in 0..arena.num_actions() {
        out.add_edge(sink, a, 0, sink);
    }
    for v in arena.vertices().filter(|&v| arena.is_critical(v)) {
        for a in 0..arena.num_actions() {
            if arena.is_enabled(v, a) {
                out.add_edge(v, a, -b, sink);
            }
        }
    }
    let credit = c0.checked_add(b as u64).ok_or(PrefixError::Overflow)?;
    Ok((out, credit))
}
