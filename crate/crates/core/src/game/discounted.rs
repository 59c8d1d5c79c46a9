use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::arena::{Arena, EdgeId, Owner, PositionalStrategy};
use super::{Cmp, GameError};
use crate::rational::{is_discount, pow};

#[derive(Debug, Clone)]
pub struct DiscountedSolution {
    /// Optimal value of every vertex (Eve maximizes, Adam minimizes).
    pub values: Vec<BigRational>,
    pub eve_strategy: PositionalStrategy,
    pub adam_strategy: PositionalStrategy,
    /// Whether Eve wins `Dsum(play) cmp ν` from the initial vertex.
    pub eve_wins: bool,
}

impl DiscountedSolution {
    pub fn initial_value(&self, arena: &Arena) -> &BigRational {
        &self.values[arena.initial()]
    }
}

fn weight(arena: &Arena, e: EdgeId) -> BigRational {
    BigRational::from_integer(BigInt::from(arena.edge(e).weight))
}

/// Values of the play from every vertex when each vertex follows `succ`.
///
/// Each play is a lasso. On a cycle `c1 … cL` with weights `w1 … wL` the value
/// of `c1` is `Σ λ^i w_i / (1 - λ^L)`; all other values follow from
/// `val(v) = λ·w + λ·val(next)`.
pub fn evaluate_positional(arena: &Arena, lambda: &BigRational, succ: &[EdgeId]) -> Vec<BigRational> {
    let n = arena.num_vertices();
    let mut values: Vec<Option<BigRational>> = vec![None; n];
    let mut on_stack = vec![false; n];
    for start in 0..n {
        if values[start].is_some() {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        while values[v].is_none() && !on_stack[v] {
            on_stack[v] = true;
            path.push(v);
            v = arena.edge(succ[v]).target;
        }
        if values[v].is_none() {
            // `v` closes a cycle inside `path`.
            let pos = path.iter().position(|&x| x == v).expect("cycle entry on path");
            let cycle = &path[pos..];
            let mut sum = BigRational::zero();
            let mut factor = lambda.clone();
            for &c in cycle {
                sum += &factor * weight(arena, succ[c]);
                factor *= lambda;
            }
            let denom = BigRational::one() - pow(lambda, cycle.len());
            values[v] = Some(sum / denom);
            for &c in cycle[1..].iter().rev() {
                let next = arena.edge(succ[c]).target;
                let val = lambda * (weight(arena, succ[c]) + values[next].clone().expect("set"));
                values[c] = Some(val);
            }
            path.truncate(pos);
        }
        for &u in path.iter().rev() {
            let next = arena.edge(succ[u]).target;
            let val = lambda * (weight(arena, succ[u]) + values[next].clone().expect("set"));
            values[u] = Some(val);
        }
        for &u in &path {
            on_stack[u] = false;
        }
    }
    values.into_iter().map(|v| v.expect("all evaluated")).collect()
}

fn edge_value(arena: &Arena, lambda: &BigRational, values: &[BigRational], e: EdgeId) -> BigRational {
    lambda * (weight(arena, e) + &values[arena.edge(e).target])
}

/// One round of strict improvement for `player` at every vertex it owns.
fn improve(
    arena: &Arena,
    lambda: &BigRational,
    values: &[BigRational],
    succ: &mut [EdgeId],
    player: Owner,
) -> bool {
    let mut changed = false;
    for v in arena.vertices() {
        if arena.owner(v) != player {
            continue;
        }
        let current = edge_value(arena, lambda, values, succ[v]);
        let mut best = (succ[v], current.clone());
        for &e in arena.out_edges(v) {
            let val = edge_value(arena, lambda, values, e);
            let strictly_better = match player {
                Owner::Eve => val > best.1,
                Owner::Adam => val < best.1,
            };
            if strictly_better {
                best = (e, val);
            }
        }
        if best.0 != succ[v] {
            succ[v] = best.0;
            changed = true;
        }
    }
    changed
}

/// Optimal values and positional strategies by nested strategy iteration:
/// each Eve strategy is evaluated against Adam's best response, itself found
/// by strategy iteration in the one-player game.
pub fn discounted_values(
    arena: &Arena,
    lambda: &BigRational,
) -> Result<(Vec<BigRational>, PositionalStrategy, PositionalStrategy), GameError> {
    arena.check_deadlock_free()?;
    if !is_discount(lambda) {
        return Err(GameError::InvalidDiscount);
    }
    let mut succ: Vec<EdgeId> = arena.vertices().map(|v| arena.out_edges(v)[0]).collect();
    let values = loop {
        let values = loop {
            let values = evaluate_positional(arena, lambda, &succ);
            if !improve(arena, lambda, &values, &mut succ, Owner::Adam) {
                break values;
            }
        };
        if !improve(arena, lambda, &values, &mut succ, Owner::Eve) {
            break values;
        }
    };
    let mut eve = PositionalStrategy::new(arena.num_vertices());
    let mut adam = PositionalStrategy::new(arena.num_vertices());
    for v in arena.vertices() {
        let e = arena
            .out_edges(v)
            .iter()
            .copied()
            .find(|&e| edge_value(arena, lambda, &values, e) == values[v])
            .expect("some edge attains the value");
        match arena.owner(v) {
            Owner::Eve => eve.set(v, e),
            Owner::Adam => adam.set(v, e),
        }
    }
    Ok((values, eve, adam))
}

/// Solves the discounted-sum threshold game `Dsum(play) cmp ν` for Eve.
/// Optimal strategies exist on both sides, so comparing the initial value with
/// `ν` decides the winner and the optimal strategy is a witness.
pub fn solve_discounted_sum(
    arena: &Arena,
    lambda: &BigRational,
    nu: &BigRational,
    cmp: Cmp,
) -> Result<DiscountedSolution, GameError> {
    let (values, eve_strategy, adam_strategy) = discounted_values(arena, lambda)?;
    let eve_wins = cmp.holds(&values[arena.initial()], nu);
    Ok(DiscountedSolution {
        values,
        eve_strategy,
        adam_strategy,
        eve_wins,
    })
}
