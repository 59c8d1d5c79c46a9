use std::collections::HashMap;
use std::fmt::Write;

use super::arena::{Arena, Owner, PositionalStrategy};
use super::imperfect::ImperfectArena;
use super::GameError;
use crate::spec::dot::quote;

struct Line<'a> {
    number: usize,
    key: &'a str,
    rest: Vec<&'a str>,
}

fn syntax(line: usize, message: impl Into<String>) -> GameError {
    GameError::Syntax {
        line,
        message: message.into(),
    }
}

fn lines(text: &str) -> Result<Vec<Line<'_>>, GameError> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !seen_header {
            if content != "arena" {
                return Err(syntax(i + 1, "expected header `arena`"));
            }
            seen_header = true;
            continue;
        }
        let (key, rest) = content
            .split_once(':')
            .ok_or_else(|| syntax(i + 1, format!("expected `key: value`, found `{content}`")))?;
        out.push(Line {
            number: i + 1,
            key: key.trim(),
            rest: rest.split_whitespace().collect(),
        });
    }
    if !seen_header {
        return Err(syntax(1, "missing header `arena`"));
    }
    Ok(out)
}

struct Vertex<'a> {
    name: &'a str,
    owner: Owner,
    critical: bool,
}

struct RawArena<'a> {
    vertices: Vec<Vertex<'a>>,
    index: HashMap<&'a str, usize>,
    initial: usize,
    edges: Vec<(usize, &'a str, i64, usize)>,
    observations: Vec<(&'a str, Vec<usize>)>,
}

fn parse_raw(text: &str) -> Result<RawArena<'_>, GameError> {
    let lines = lines(text)?;
    let mut vertices = Vec::new();
    let mut index = HashMap::new();
    for line in lines.iter().filter(|l| l.key == "vertex") {
        let (name, owner, critical) = match line.rest.as_slice() {
            [name, owner] => (*name, *owner, false),
            [name, owner, "critical"] => (*name, *owner, true),
            _ => return Err(syntax(line.number, "expected `vertex: name eve|adam [critical]`")),
        };
        let owner = match owner {
            "eve" => Owner::Eve,
            "adam" => Owner::Adam,
            other => return Err(syntax(line.number, format!("unknown owner `{other}`"))),
        };
        if index.insert(name, vertices.len()).is_some() {
            return Err(GameError::DuplicateVertex(name.to_string()));
        }
        vertices.push(Vertex { name, owner, critical });
    }
    let lookup = |name: &str| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| GameError::UnknownVertex(name.to_string()))
    };
    let mut initial = None;
    let mut edges = Vec::new();
    let mut observations = Vec::new();
    for line in &lines {
        match line.key {
            "vertex" => {}
            "initial" => {
                let [name] = line.rest.as_slice() else {
                    return Err(syntax(line.number, "expected `initial: name`"));
                };
                if initial.replace(lookup(name)?).is_some() {
                    return Err(syntax(line.number, "duplicate `initial:` line"));
                }
            }
            "edge" => {
                let [source, action, weight, target] = line.rest.as_slice() else {
                    return Err(syntax(line.number, "expected `edge: source action weight target`"));
                };
                let weight: i64 = weight
                    .parse()
                    .map_err(|_| syntax(line.number, format!("weight `{weight}` is not an integer")))?;
                edges.push((lookup(source)?, *action, weight, lookup(target)?));
            }
            "obs" => {
                let Some((name, members)) = line.rest.split_first() else {
                    return Err(syntax(line.number, "expected `obs: name vertex...`"));
                };
                let members = members.iter().map(|m| lookup(m)).collect::<Result<Vec<_>, _>>()?;
                observations.push((*name, members));
            }
            other => return Err(syntax(line.number, format!("unknown key `{other}`"))),
        }
    }
    let initial = initial.ok_or_else(|| syntax(1, "missing `initial:` line"))?;
    Ok(RawArena {
        vertices,
        index,
        initial,
        edges,
        observations,
    })
}

/// Reads a perfect-information arena; edge actions are ignored.
pub fn parse_arena(text: &str) -> Result<Arena, GameError> {
    let raw = parse_raw(text)?;
    let mut arena = Arena::new();
    for v in &raw.vertices {
        let id = arena.add_vertex(v.name, v.owner);
        arena.set_critical(id, v.critical);
    }
    for &(s, _, w, t) in &raw.edges {
        arena.add_edge(s, w, t);
    }
    arena.set_initial(raw.initial);
    debug_assert_eq!(raw.index.len(), arena.num_vertices());
    Ok(arena)
}

/// Reads an imperfect-information arena; vertices not listed in an `obs:`
/// line are observed exactly.
pub fn parse_imperfect_arena(text: &str) -> Result<ImperfectArena, GameError> {
    let raw = parse_raw(text)?;
    let mut arena = ImperfectArena::new();
    for v in &raw.vertices {
        let id = arena.add_vertex(v.name);
        arena.set_critical(id, v.critical);
    }
    for &(s, a, w, t) in &raw.edges {
        let a = arena.add_action(a);
        arena.add_edge(s, a, w, t);
    }
    for (name, members) in &raw.observations {
        let o = arena.observation_class(name);
        for &m in members {
            arena.set_observation(m, o);
        }
    }
    arena.set_initial(raw.initial);
    Ok(arena)
}

pub fn emit_arena(arena: &Arena) -> String {
    let mut out = String::from("arena\n");
    for v in arena.vertices() {
        let critical = if arena.is_critical(v) { " critical" } else { "" };
        writeln!(out, "vertex: {} {}{critical}", arena.name(v), arena.owner(v).keyword()).unwrap();
    }
    writeln!(out, "initial: {}", arena.name(arena.initial())).unwrap();
    for e in arena.edges() {
        writeln!(out, "edge: {} - {} {}", arena.name(e.source), e.weight, arena.name(e.target)).unwrap();
    }
    out
}

pub fn emit_imperfect_arena(arena: &ImperfectArena) -> String {
    let mut out = String::from("arena\n");
    for v in arena.vertices() {
        let critical = if arena.is_critical(v) { " critical" } else { "" };
        writeln!(out, "vertex: {} eve{critical}", arena.name(v)).unwrap();
    }
    writeln!(out, "initial: {}", arena.name(arena.initial())).unwrap();
    for e in arena.edges() {
        writeln!(
            out,
            "edge: {} {} {} {}",
            arena.name(e.source),
            arena.action_name(e.action),
            e.weight,
            arena.name(e.target)
        )
        .unwrap();
    }
    for o in 0..arena.num_observations() {
        let members: Vec<&str> = arena
            .vertices()
            .filter(|&v| arena.observation(v) == o)
            .map(|v| arena.name(v))
            .collect();
        let implicit = members.len() == 1 && members[0] == arena.observation_name(o);
        if !members.is_empty() && !implicit {
            writeln!(out, "obs: {} {}", arena.observation_name(o), members.join(" ")).unwrap();
        }
    }
    out
}

/// `strategy: vertex edge-index` lines, edge indices counted in file order.
pub fn emit_strategy(arena: &Arena, strategy: &PositionalStrategy) -> String {
    let mut out = String::new();
    for (v, e) in strategy.entries() {
        writeln!(out, "strategy: {} {}", arena.name(v), e).unwrap();
    }
    out
}

/// Eve vertices are boxes, Adam vertices circles, critical vertices doubled.
pub fn arena_to_dot(arena: &Arena) -> String {
    let mut out = String::from("digraph arena {\n  __start [shape=point];\n");
    for v in arena.vertices() {
        let shape = match arena.owner(v) {
            Owner::Eve => "box",
            Owner::Adam => "circle",
        };
        let peripheries = if arena.is_critical(v) { 2 } else { 1 };
        writeln!(out, "  {} [shape={shape}, peripheries={peripheries}];", quote(arena.name(v))).unwrap();
    }
    writeln!(out, "  __start -> {};", quote(arena.name(arena.initial()))).unwrap();
    for e in arena.edges() {
        writeln!(
            out,
            "  {} -> {} [label=\"{}\"];",
            quote(arena.name(e.source)),
            quote(arena.name(e.target)),
            e.weight
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn imperfect_to_dot(arena: &ImperfectArena) -> String {
    let mut out = String::from("digraph arena {\n  __start [shape=point];\n");
    for o in 0..arena.num_observations() {
        let members: Vec<_> = arena.vertices().filter(|&v| arena.observation(v) == o).collect();
        if members.is_empty() {
            continue;
        }
        writeln!(out, "  subgraph \"cluster_{o}\" {{\n    label={};", quote(arena.observation_name(o))).unwrap();
        for v in members {
            let peripheries = if arena.is_critical(v) { 2 } else { 1 };
            writeln!(out, "    {} [peripheries={peripheries}];", quote(arena.name(v))).unwrap();
        }
        out.push_str("  }\n");
    }
    writeln!(out, "  __start -> {};", quote(arena.name(arena.initial()))).unwrap();
    for e in arena.edges() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(arena.name(e.source)),
            quote(arena.name(e.target)),
            quote(&format!("{}|{}", arena.action_name(e.action), e.weight))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRICT_DSUM: &str = "arena\nvertex: v0 adam\nvertex: v1 adam critical\ninitial: v0\nedge: v0 - 1 v0\nedge: v0 - 3 v1\nedge: v1 - 0 v1\n";

    #[test]
    fn round_trip() {
        let a = parse_arena(STRICT_DSUM).unwrap();
        assert_eq!(a.num_vertices(), 2);
        assert!(a.is_critical(1));
        assert_eq!(parse_arena(&emit_arena(&a)).unwrap(), a);
    }

    #[test]
    fn unknown_vertex_rejected() {
        let text = STRICT_DSUM.replace("edge: v1 - 0 v1", "edge: v1 - 0 v2");
        assert_eq!(parse_arena(&text), Err(GameError::UnknownVertex("v2".into())));
    }

    #[test]
    fn imperfect_round_trip() {
        let text = "arena\nvertex: s eve\nvertex: x eve\nvertex: y eve critical\ninitial: s\nedge: s go 0 x\nedge: s go 0 y\nedge: x a 1 s\nedge: y a -1 s\nobs: hidden x y\n";
        let g = parse_imperfect_arena(text).unwrap();
        assert_eq!(g.observation(1), g.observation(2));
        assert_ne!(g.observation(0), g.observation(1));
        let back = parse_imperfect_arena(&emit_imperfect_arena(&g)).unwrap();
        assert_eq!(emit_imperfect_arena(&back), emit_imperfect_arena(&g));
        assert!(imperfect_to_dot(&g).contains("cluster_"));
    }
}
