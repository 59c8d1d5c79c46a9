//! Relative gaps and discounted-sum path checks.
//!
//! For a path `π` and threshold `ν`, the relative gap is
//! `rg(π) = (ν - Dsum(π)) / λ^|π|`. Extending a path by an edge of weight `j`
//! maps `rg` to `rg/λ - j`, and `Dsum(π) <= ν` iff `rg(π) >= 0`. The table
//! `mrg_i(v)` holds the largest gap over paths of length at most `i` from the
//! source to `v`.

use std::collections::VecDeque;
use std::fmt::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::game::{Arena, EdgeId, VertexId};
use crate::rational::{format_rational, pow};

/// `(ν - dsum) / λ^length`.
pub fn relative_gap(dsum: &BigRational, length: usize, nu: &BigRational, lambda: &BigRational) -> BigRational {
    (nu - dsum) / pow(lambda, length)
}

/// Discounted sum of a weight sequence, exponents starting at one.
pub fn dsum_of(weights: impl IntoIterator<Item = i64>, lambda: &BigRational) -> BigRational {
    let mut factor = lambda.clone();
    let mut total = BigRational::zero();
    for w in weights {
        total += &factor * BigRational::from_integer(BigInt::from(w));
        factor *= lambda;
    }
    total
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub source: VertexId,
    pub weight: i64,
    pub target: VertexId,
}

/// A weighted graph with a source and a target set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    pub num_vertices: usize,
    pub edges: Vec<GraphEdge>,
    pub source: VertexId,
    pub targets: Vec<bool>,
    pub lambda: BigRational,
    disabled: Vec<bool>,
}

impl WeightedGraph {
    pub fn new(num_vertices: usize, source: VertexId, lambda: BigRational) -> Self {
        WeightedGraph {
            num_vertices,
            edges: Vec::new(),
            source,
            targets: vec![false; num_vertices],
            lambda,
            disabled: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, source: VertexId, weight: i64, target: VertexId) -> EdgeId {
        self.edges.push(GraphEdge { source, weight, target });
        self.edges.len() - 1
    }

    /// The arena's allowed edges with owners ignored; edge ids are preserved
    /// (disallowed edges are kept but never used).
    pub fn from_arena(arena: &Arena, allowed: &[bool], targets: Vec<bool>, lambda: BigRational) -> Self {
        let mut g = WeightedGraph::new(arena.num_vertices(), arena.initial(), lambda);
        g.targets = targets;
        for e in arena.edges() {
            g.add_edge(e.source, e.weight, e.target);
        }
        g.disabled = allowed.iter().map(|a| !a).collect();
        g
    }

    pub fn dsum(&self, path: &[EdgeId]) -> BigRational {
        dsum_of(path.iter().map(|&e| self.edges[e].weight), &self.lambda)
    }

    /// Checks that `path` is a path from the source to a target.
    pub fn is_path_to_target(&self, path: &[EdgeId]) -> bool {
        let mut v = self.source;
        for &e in path {
            let Some(edge) = self.edges.get(e) else { return false };
            if edge.source != v || self.is_disabled(e) {
                return false;
            }
            v = edge.target;
        }
        self.targets[v]
    }

    fn is_disabled(&self, e: EdgeId) -> bool {
        self.disabled.get(e).copied().unwrap_or(false)
    }

    /// Vertices with a path to some target.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut incoming = vec![Vec::new(); self.num_vertices];
        for (id, e) in self.edges.iter().enumerate() {
            if !self.is_disabled(id) {
                incoming[e.target].push(e.source);
            }
        }
        let mut seen = self.targets.clone();
        let mut queue: VecDeque<VertexId> = (0..self.num_vertices).filter(|&v| seen[v]).collect();
        while let Some(v) = queue.pop_front() {
            for &u in &incoming[v] {
                if !seen[u] {
                    seen[u] = true;
                    queue.push_back(u);
                }
            }
        }
        seen
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pointer {
    Keep,
    Edge(EdgeId),
}

/// The table `mrg_0 … mrg_n` over the vertices that can reach a target.
/// `None` is −∞.
#[derive(Debug, Clone)]
pub struct MrgTable {
    pub rows: Vec<Vec<Option<BigRational>>>,
    /// Vertices kept by preprocessing.
    pub kept: Vec<bool>,
    pointers: Vec<Vec<Option<Pointer>>>,
}

impl MrgTable {
    pub fn compute(g: &WeightedGraph, nu: &BigRational) -> MrgTable {
        let kept = g.coreachable();
        let n = kept.iter().filter(|&&k| k).count();
        let mut first = vec![None; g.num_vertices];
        if kept[g.source] {
            first[g.source] = Some(nu.clone());
        }
        let mut rows = vec![first];
        let mut pointers = vec![vec![None; g.num_vertices]];
        for _ in 1..=n {
            let prev = rows.last().expect("row 0");
            let mut row = prev.clone();
            let mut ptr: Vec<Option<Pointer>> = prev.iter().map(|v| v.as_ref().map(|_| Pointer::Keep)).collect();
            for (id, e) in g.edges.iter().enumerate() {
                if g.is_disabled(id) || !kept[e.source] || !kept[e.target] {
                    continue;
                }
                let Some(gap) = &prev[e.source] else { continue };
                let candidate = gap / &g.lambda - BigRational::from_integer(BigInt::from(e.weight));
                if row[e.target].as_ref().is_none_or(|cur| &candidate > cur) {
                    row[e.target] = Some(candidate);
                    ptr[e.target] = Some(Pointer::Edge(id));
                }
            }
            rows.push(row);
            pointers.push(ptr);
        }
        MrgTable { rows, kept, pointers }
    }

    pub fn size(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn is_fixpoint(&self) -> bool {
        let n = self.size();
        n == 0 || self.rows[n] == self.rows[n - 1]
    }

    /// Edges of a path of length at most `i` realizing `mrg_i(v)`; keep
    /// pointers are preferred so the path is as short as possible.
    fn backtrack(&self, g: &WeightedGraph, mut i: usize, mut v: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        while i > 0 {
            match self.pointers[i][v].expect("finite entry") {
                Pointer::Keep => {}
                Pointer::Edge(e) => {
                    path.push(e);
                    v = g.edges[e].source;
                }
            }
            i -= 1;
        }
        debug_assert_eq!(v, g.source);
        path.reverse();
        path
    }

    pub fn render(&self, g: &WeightedGraph, names: &dyn Fn(VertexId) -> String) -> String {
        let mut out = String::new();
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = (0..g.num_vertices)
                .filter(|&v| self.kept[v])
                .map(|v| {
                    let value = row[v].as_ref().map_or("-inf".to_string(), format_rational);
                    format!("{}={value}", names(v))
                })
                .collect();
            writeln!(out, "mrg_{i}: {}", cells.join(" ")).unwrap();
        }
        out
    }
}

/// A path from the source to a target with its exact discounted sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathWitness {
    pub edges: Vec<EdgeId>,
    pub dsum: BigRational,
    /// Number of loop iterations when the witness was obtained by pumping.
    pub pumped: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathCheck {
    No,
    Yes(PathWitness),
}

impl PathCheck {
    pub fn is_yes(&self) -> bool {
        matches!(self, PathCheck::Yes(_))
    }
}

/// Is there a path from the source to a target with `Dsum <= ν`?
pub fn exists_path_leq(g: &WeightedGraph, nu: &BigRational) -> PathCheck {
    exists_path(g, nu, false)
}

/// Is there a path from the source to a target with `Dsum < ν`?
///
/// At a fixpoint `mrg_n` is the attained maximum gap, so a strict witness
/// exists iff some target gap is positive; without a fixpoint, pumping gives
/// arbitrarily large gaps.
pub fn exists_path_lt(g: &WeightedGraph, nu: &BigRational) -> PathCheck {
    exists_path(g, nu, true)
}

fn exists_path(g: &WeightedGraph, nu: &BigRational, strict: bool) -> PathCheck {
    let table = MrgTable::compute(g, nu);
    exists_path_with_table(g, nu, strict, &table)
}

pub fn exists_path_with_table(g: &WeightedGraph, nu: &BigRational, strict: bool, table: &MrgTable) -> PathCheck {
    if !table.kept[g.source] {
        return PathCheck::No;
    }
    let good = |gap: &BigRational| if strict { gap.is_positive() } else { !gap.is_negative() };
    // Shortest witness read directly off the table.
    for (i, row) in table.rows.iter().enumerate() {
        let hit = (0..g.num_vertices).find(|&v| g.targets[v] && row[v].as_ref().is_some_and(good));
        if let Some(t) = hit {
            let edges = table.backtrack(g, i, t);
            return validated(g, nu, strict, edges, None);
        }
    }
    if table.is_fixpoint() {
        return PathCheck::No;
    }
    pumped_witness(g, nu, strict, table)
}

fn validated(g: &WeightedGraph, nu: &BigRational, strict: bool, edges: Vec<EdgeId>, pumped: Option<usize>) -> PathCheck {
    let dsum = g.dsum(&edges);
    let holds = if strict { &dsum < nu } else { &dsum <= nu };
    assert!(
        holds && g.is_path_to_target(&edges),
        "path witness failed exact validation"
    );
    PathCheck::Yes(PathWitness { edges, dsum, pumped })
}

/// Without a fixpoint, some gap first improves at round `n` along a path of
/// exactly `n` edges. That path repeats a vertex, and every loop on it raises
/// the gap; iterating the loop and then taking a shortest path to a target
/// gives the witness.
fn pumped_witness(g: &WeightedGraph, nu: &BigRational, strict: bool, table: &MrgTable) -> PathCheck {
    let n = table.size();
    let v = (0..g.num_vertices)
        .find(|&v| table.rows[n][v] != table.rows[n - 1][v])
        .expect("not a fixpoint");
    let path = table.backtrack(g, n, v);
    let mut vertices = vec![g.source];
    for &e in &path {
        vertices.push(g.edges[e].target);
    }
    let (i, j) = first_repetition(&vertices).expect("a path of n edges repeats a vertex");
    let prefix = &path[..i];
    let cycle = &path[i..j];
    let rg1 = relative_gap(&g.dsum(prefix), prefix.len(), nu, &g.lambda);
    let loop_gap = |gap: &BigRational| (gap - dsum_of(cycle.iter().map(|&e| g.edges[e].weight), &g.lambda)) / pow(&g.lambda, cycle.len());
    let z = loop_gap(&rg1) - &rg1;
    assert!(z.is_positive(), "loop on an improving path raises the gap");
    let tail = shortest_path_to_target(g, vertices[i], &table.kept).expect("kept vertices reach a target");
    let tail_dsum = g.dsum(&tail);
    // rg(π1 π2^ℓ) >= rg(π1) + ℓ·z, so this ℓ always suffices.
    let bound = {
        let need = (&tail_dsum - &rg1) / &z;
        let l = if strict {
            need.floor().to_integer() + BigInt::from(1)
        } else {
            need.ceil().to_integer()
        };
        l.max(BigInt::zero())
    };
    // The gap grows geometrically, so the least sufficient count is usually far smaller.
    let mut gap = rg1;
    let mut count = 0usize;
    let enough = |gap: &BigRational| if strict { gap > &tail_dsum } else { gap >= &tail_dsum };
    while !enough(&gap) {
        gap = loop_gap(&gap);
        count += 1;
    }
    debug_assert!(BigInt::from(count) <= bound);
    let mut edges = prefix.to_vec();
    for _ in 0..count {
        edges.extend_from_slice(cycle);
    }
    edges.extend(tail);
    validated(g, nu, strict, edges, Some(count))
}

fn first_repetition(vertices: &[VertexId]) -> Option<(usize, usize)> {
    for j in 0..vertices.len() {
        if let Some(i) = vertices[..j].iter().position(|&x| x == vertices[j]) {
            return Some((i, j));
        }
    }
    None
}

fn shortest_path_to_target(g: &WeightedGraph, from: VertexId, kept: &[bool]) -> Option<Vec<EdgeId>> {
    let mut parent: Vec<Option<EdgeId>> = vec![None; g.num_vertices];
    let mut seen = vec![false; g.num_vertices];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if g.targets[v] {
            let mut path = Vec::new();
            let mut cur = v;
            while let Some(e) = parent[cur] {
                path.push(e);
                cur = g.edges[e].source;
            }
            path.reverse();
            return Some(path);
        }
        for (id, e) in g.edges.iter().enumerate() {
            if e.source == v && !seen[e.target] && kept[e.target] && !g.is_disabled(id) {
                seen[e.target] = true;
                parent[e.target] = Some(id);
                queue.push_back(e.target);
            }
        }
    }
    None
}

/// A nondeterministic automaton whose run values are discounted sums; a word
/// takes the maximum over its accepting runs.
#[derive(Debug, Clone)]
pub struct DsumAutomaton {
    pub num_states: usize,
    pub initial: usize,
    pub finals: Vec<bool>,
    /// `(source, symbol, weight, target)`.
    pub transitions: Vec<(usize, String, i64, usize)>,
    pub lambda: BigRational,
}

/// Does some accepting run reach a value `>= ν`? Inverting the weights turns
/// this into a path check for `Dsum <= -ν`. Returns the run's symbols.
pub fn dsum_nonempty_geq(automaton: &DsumAutomaton, nu: &BigRational) -> Option<Vec<String>> {
    let mut g = WeightedGraph::new(automaton.num_states, automaton.initial, automaton.lambda.clone());
    g.targets = automaton.finals.clone();
    for &(s, _, w, t) in &automaton.transitions {
        g.add_edge(s, -w, t);
    }
    match exists_path_leq(&g, &-nu) {
        PathCheck::No => None,
        PathCheck::Yes(w) => Some(w.edges.iter().map(|&e| automaton.transitions[e].1.clone()).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn strict_dsum() -> WeightedGraph {
        let mut g = WeightedGraph::new(2, 0, ratio(1, 2));
        g.add_edge(0, 1, 0);
        g.add_edge(0, 3, 1);
        g.add_edge(1, 0, 1);
        g.targets[1] = true;
        g
    }

    #[test]
    fn gap_basics() {
        assert_eq!(relative_gap(&int(0), 0, &int(1), &ratio(1, 2)), int(1));
        assert_eq!(relative_gap(&ratio(3, 2), 1, &int(1), &ratio(1, 2)), int(-1));
    }

    #[test]
    fn strict_dsum_leq() {
        let g = strict_dsum();
        assert_eq!(exists_path_leq(&g, &int(1)), PathCheck::No);
        let PathCheck::Yes(w) = exists_path_leq(&g, &ratio(3, 2)) else { panic!() };
        assert_eq!(w.edges, vec![1]);
        assert_eq!(w.dsum, ratio(3, 2));
    }

    #[test]
    fn strict_dsum_lt() {
        let g = strict_dsum();
        let PathCheck::Yes(w) = exists_path_lt(&g, &int(2)) else { panic!() };
        assert_eq!(w.edges, vec![1]);
        // One turn of the loop first: 1/2 + 3/4 < 3/2.
        let PathCheck::Yes(w) = exists_path_lt(&g, &ratio(3, 2)) else { panic!() };
        assert_eq!(w.dsum, ratio(5, 4));
        assert_eq!(exists_path_lt(&g, &int(1)), PathCheck::No);
    }

    #[test]
    fn zero_edge_boundary() {
        let mut g = WeightedGraph::new(2, 0, ratio(1, 2));
        g.add_edge(0, 0, 1);
        g.targets[1] = true;
        assert!(exists_path_leq(&g, &int(0)).is_yes());
        assert_eq!(exists_path_lt(&g, &int(0)), PathCheck::No);
    }

    #[test]
    fn pumping_needed() {
        // A negative loop at the source, then a costly edge to the target.
        let mut g = WeightedGraph::new(2, 0, ratio(1, 2));
        g.add_edge(0, -1, 0);
        g.add_edge(0, 40, 1);
        g.targets[1] = true;
        let nu = int(0);
        let PathCheck::Yes(w) = exists_path_leq(&g, &nu) else { panic!() };
        assert_eq!(w.pumped, Some(5));
        assert_eq!(w.dsum, ratio(-22, 64));
    }

    #[test]
    fn unreachable_target_is_no() {
        let mut g = WeightedGraph::new(2, 0, ratio(1, 2));
        g.add_edge(1, 0, 1);
        g.targets[1] = true;
        assert_eq!(exists_path_leq(&g, &int(100)), PathCheck::No);
    }

    #[test]
    fn nonemptiness() {
        let a = DsumAutomaton {
            num_states: 1,
            initial: 0,
            finals: vec![true],
            transitions: vec![],
            lambda: ratio(1, 2),
        };
        assert_eq!(dsum_nonempty_geq(&a, &int(0)), Some(vec![]));
        let b = DsumAutomaton {
            num_states: 2,
            initial: 0,
            finals: vec![false, true],
            transitions: vec![(0, "x".into(), 1, 1)],
            lambda: ratio(1, 2),
        };
        assert_eq!(dsum_nonempty_geq(&b, &ratio(1, 2)), Some(vec!["x".to_string()]));
        assert_eq!(dsum_nonempty_geq(&b, &int(1)), None);
    }
}
