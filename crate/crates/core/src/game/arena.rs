use std::fmt;

use super::GameError;

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Owner {
    Eve,
    Adam,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Eve => Owner::Adam,
            Owner::Adam => Owner::Eve,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Owner::Eve => "eve",
            Owner::Adam => "adam",
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Eve => "Eve",
            Owner::Adam => "Adam",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub source: VertexId,
    pub weight: i64,
    pub target: VertexId,
}

/// A perfect-information weighted arena with optional critical vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Arena {
    names: Vec<String>,
    owners: Vec<Owner>,
    critical: Vec<bool>,
    initial: VertexId,
    edges: Vec<Edge>,
    out: Vec<Vec<EdgeId>>,
    inc: Vec<Vec<EdgeId>>,
}

impl Arena {
    pub fn new() -> Self {
        Arena::default()
    }

    pub fn add_vertex(&mut self, name: impl Into<String>, owner: Owner) -> VertexId {
        self.names.push(name.into());
        self.owners.push(owner);
        self.critical.push(false);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        self.names.len() - 1
    }

    pub fn add_edge(&mut self, source: VertexId, weight: i64, target: VertexId) -> EdgeId {
        let id = self.edges.len();
        self.edges.push(Edge { source, weight, target });
        self.out[source].push(id);
        self.inc[target].push(id);
        id
    }

    pub fn set_initial(&mut self, v: VertexId) {
        self.initial = v;
    }

    pub fn set_critical(&mut self, v: VertexId, critical: bool) {
        self.critical[v] = critical;
    }

    pub fn set_owner(&mut self, v: VertexId, owner: Owner) {
        self.owners[v] = owner;
    }

    pub fn num_vertices(&self) -> usize {
        self.names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.names.len()
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name)
    }

    pub fn owner(&self, v: VertexId) -> Owner {
        self.owners[v]
    }

    pub fn is_critical(&self, v: VertexId) -> bool {
        self.critical[v]
    }

    pub fn critical_set(&self) -> Vec<bool> {
        self.critical.clone()
    }

    pub fn initial(&self) -> VertexId {
        self.initial
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: VertexId) -> &[EdgeId] {
        &self.inc[v]
    }

    pub fn deadlocks(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.out[v].is_empty()).collect()
    }

    pub fn check_deadlock_free(&self) -> Result<(), GameError> {
        match self.deadlocks().first() {
            Some(&v) => Err(GameError::Deadlock(self.names[v].clone())),
            None => Ok(()),
        }
    }

    /// Gives every deadlocked vertex a 0-weight self-loop.
    pub fn complete_deadlocks(&mut self) {
        for v in self.deadlocks() {
            self.add_edge(v, 0, v);
        }
    }

    pub fn max_abs_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.weight.abs()).max().unwrap_or(0)
    }

    /// Copy of the arena with each weight replaced by `f(weight)`.
    pub fn map_weights(&self, f: impl Fn(i64) -> i64) -> Arena {
        let mut copy = self.clone();
        for e in &mut copy.edges {
            e.weight = f(e.weight);
        }
        copy
    }

    /// Copy of the arena with edge `e` weighted `weights[e]`.
    pub fn with_weights(&self, weights: &[i64]) -> Arena {
        assert_eq!(weights.len(), self.edges.len());
        let mut copy = self.clone();
        for (e, &w) in copy.edges.iter_mut().zip(weights) {
            e.weight = w;
        }
        copy
    }

    /// Vertices reachable from `from`.
    pub fn reachable_from(&self, from: VertexId) -> Vec<bool> {
        let mut seen = vec![false; self.num_vertices()];
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(v) = stack.pop() {
            for &e in &self.out[v] {
                let t = self.edges[e].target;
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }
}

/// A positional strategy: one chosen edge per vertex where it is defined.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositionalStrategy {
    choice: Vec<Option<EdgeId>>,
}

impl PositionalStrategy {
    pub fn new(num_vertices: usize) -> Self {
        PositionalStrategy {
            choice: vec![None; num_vertices],
        }
    }

    pub fn get(&self, v: VertexId) -> Option<EdgeId> {
        self.choice.get(v).copied().flatten()
    }

    pub fn set(&mut self, v: VertexId, e: EdgeId) {
        self.choice[v] = Some(e);
    }

    pub fn clear(&mut self, v: VertexId) {
        self.choice[v] = None;
    }

    pub fn len(&self) -> usize {
        self.choice.len()
    }

    pub fn is_empty(&self) -> bool {
        self.choice.iter().all(Option::is_none)
    }

    /// Defined entries as `(vertex, edge)` pairs.
    pub fn entries(&self) -> impl Iterator<Item = (VertexId, EdgeId)> + '_ {
        self.choice
            .iter()
            .enumerate()
            .filter_map(|(v, e)| e.map(|e| (v, e)))
    }

    /// Checks that every chosen edge exists and leaves its vertex.
    pub fn is_consistent_with(&self, arena: &Arena) -> bool {
        self.entries()
            .all(|(v, e)| e < arena.num_edges() && arena.edge(e).source == v)
    }

    /// Edges kept when `owner`'s vertices follow this strategy and every
    /// other vertex keeps all of its edges. Vertices of `owner` without a
    /// choice keep all edges.
    pub fn allowed_edges(&self, arena: &Arena, owner: Owner) -> Vec<bool> {
        arena
            .edges()
            .iter()
            .enumerate()
            .map(|(id, e)| {
                arena.owner(e.source) != owner || self.get(e.source).is_none_or(|c| c == id)
            })
            .collect()
    }
}
