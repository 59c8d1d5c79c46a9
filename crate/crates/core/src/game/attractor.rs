use std::collections::VecDeque;

use super::arena::{Arena, Owner, PositionalStrategy};

/// Vertices from which `player` can force a visit to `target`, with a
/// positional strategy for `player` that does so.
///
/// An opponent vertex joins once all of its edges lead into the attractor;
/// a vertex without edges never joins unless it is a target.
pub fn attractor(arena: &Arena, target: &[bool], player: Owner) -> (Vec<bool>, PositionalStrategy) {
    attractor_within(arena, target, player, &vec![true; arena.num_edges()])
}

/// Attractor computed on the sub-arena of allowed edges.
pub fn attractor_within(
    arena: &Arena,
    target: &[bool],
    player: Owner,
    allowed: &[bool],
) -> (Vec<bool>, PositionalStrategy) {
    let n = arena.num_vertices();
    let mut attr = target.to_vec();
    let mut strategy = PositionalStrategy::new(n);
    let mut remaining: Vec<usize> = arena
        .vertices()
        .map(|v| arena.out_edges(v).iter().filter(|&&e| allowed[e]).count())
        .collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| attr[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &e in arena.in_edges(v) {
            if !allowed[e] {
                continue;
            }
            let u = arena.edge(e).source;
            if attr[u] {
                continue;
            }
            if arena.owner(u) == player {
                attr[u] = true;
                strategy.set(u, e);
                queue.push_back(u);
            } else {
                remaining[u] -= 1;
                if remaining[u] == 0 {
                    attr[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    (attr, strategy)
}

/// Eve's winning region for staying inside `safe` forever, with a strategy
/// that keeps her there.
pub fn solve_safety(arena: &Arena, safe: &[bool]) -> (Vec<bool>, PositionalStrategy) {
    let unsafe_set: Vec<bool> = safe.iter().map(|s| !s).collect();
    let (adam_attr, _) = attractor(arena, &unsafe_set, Owner::Adam);
    let region: Vec<bool> = adam_attr.iter().map(|a| !a).collect();
    let mut strategy = PositionalStrategy::new(arena.num_vertices());
    for v in arena.vertices() {
        if region[v] && arena.owner(v) == Owner::Eve {
            if let Some(&e) = arena.out_edges(v).iter().find(|&&e| region[arena.edge(e).target]) {
                strategy.set(v, e);
            }
        }
    }
    (region, strategy)
}
