use std::collections::VecDeque;

use super::arena::{Arena, Owner, PositionalStrategy, VertexId};
use super::GameError;

/// Outcome of a mean-payoff game for the objective `MP(play) >= 0` of Eve.
///
/// Perfect-information mean-payoff games are positionally determined and the
/// limsup/liminf variants coincide, so one region describes both.
#[derive(Debug, Clone)]
pub struct MeanPayoffSolution {
    /// Vertices from which Eve wins.
    pub eve_region: Vec<bool>,
    /// Winner from the initial vertex.
    pub winner: Owner,
    /// Positional strategy for Eve, defined on her vertices in `eve_region`.
    pub eve_strategy: PositionalStrategy,
    /// Positional strategy for Adam, defined on his vertices outside `eve_region`.
    pub adam_strategy: PositionalStrategy,
}

impl MeanPayoffSolution {
    pub fn winning_strategy(&self) -> &PositionalStrategy {
        match self.winner {
            Owner::Eve => &self.eve_strategy,
            Owner::Adam => &self.adam_strategy,
        }
    }
}

/// Least energy progress measure for `player` over the given weights.
///
/// Returns the minimal initial credit from each vertex (`None` when no finite
/// credit suffices) and the argmin strategy of `player`, ties broken by edge
/// order.
pub fn energy_progress_measure(
    arena: &Arena,
    weights: &[i128],
    player: Owner,
) -> (Vec<Option<i128>>, PositionalStrategy) {
    let n = arena.num_vertices();
    let max_neg = weights.iter().map(|&w| (-w).max(0)).max().unwrap_or(0);
    let top = (n as i128) * max_neg;
    // `None` is the top element: the vertex is lost for every finite credit.
    let mut f: Vec<Option<i128>> = vec![Some(0); n];
    let lift = |f: &[Option<i128>], e: usize| -> Option<i128> {
        let edge = arena.edge(e);
        let need = (f[edge.target]? - weights[e]).max(0);
        (need <= top).then_some(need)
    };
    let better = |a: Option<i128>, b: Option<i128>, minimize: bool| match (a, b) {
        (Some(x), Some(y)) => {
            if minimize {
                x < y
            } else {
                x > y
            }
        }
        (Some(_), None) => minimize,
        (None, Some(_)) => !minimize,
        (None, None) => false,
    };
    let mut queue: VecDeque<VertexId> = arena.vertices().collect();
    let mut queued = vec![true; n];
    while let Some(v) = queue.pop_front() {
        queued[v] = false;
        if f[v].is_none() {
            continue;
        }
        let minimize = arena.owner(v) == player;
        let mut best: Option<Option<i128>> = None;
        for &e in arena.out_edges(v) {
            let candidate = lift(&f, e);
            best = Some(match best {
                None => candidate,
                Some(b) if better(candidate, b, minimize) => candidate,
                Some(b) => b,
            });
        }
        let Some(new) = best else { continue };
        let increased = match (f[v], new) {
            (Some(old), Some(x)) => x > old,
            (Some(_), None) => true,
            _ => false,
        };
        if increased {
            f[v] = new;
            for &e in arena.in_edges(v) {
                let u = arena.edge(e).source;
                if !queued[u] {
                    queued[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let mut strategy = PositionalStrategy::new(n);
    for v in arena.vertices() {
        if arena.owner(v) != player || f[v].is_none() {
            continue;
        }
        let mut best: Option<(usize, i128)> = None;
        for &e in arena.out_edges(v) {
            if let Some(c) = lift(&f, e) {
                if best.is_none_or(|(_, b)| c < b) {
                    best = Some((e, c));
                }
            }
        }
        if let Some((e, _)) = best {
            strategy.set(v, e);
        }
    }
    (f, strategy)
}

/// Solves the mean-payoff game `MP >= 0` for Eve by energy progress-measure
/// lifting. Adam's strategy is the Eve strategy of the dual game with weights
/// `-|V|·w - 1`, where his winning condition `MP < 0` becomes non-strict.
pub fn solve_mean_payoff(arena: &Arena) -> Result<MeanPayoffSolution, GameError> {
    arena.check_deadlock_free()?;
    let n = arena.num_vertices() as i128;
    let weights: Vec<i128> = arena.edges().iter().map(|e| e.weight as i128).collect();
    let (eve_f, eve_strategy) = energy_progress_measure(arena, &weights, Owner::Eve);
    let dual: Vec<i128> = weights.iter().map(|&w| -n * w - 1).collect();
    let (adam_f, adam_strategy) = energy_progress_measure(arena, &dual, Owner::Adam);
    let eve_region: Vec<bool> = eve_f.iter().map(Option::is_some).collect();
    debug_assert!(arena
        .vertices()
        .all(|v| eve_region[v] != adam_f[v].is_some()));
    let winner = if eve_region[arena.initial()] {
        Owner::Eve
    } else {
        Owner::Adam
    };
    Ok(MeanPayoffSolution {
        eve_region,
        winner,
        eve_strategy,
        adam_strategy,
    })
}
