use std::fmt::Write;

use super::mealy::MealyTransducer;
use super::weighted::{Polarity, WeightedSpec};

pub(crate) fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Input states are circles, output states boxes, finals doubled.
pub fn spec_to_dot(spec: &WeightedSpec) -> String {
    let mut out = String::from("digraph spec {\n  rankdir=LR;\n  __start [shape=point];\n");
    for s in 0..spec.num_states() {
        let shape = match (spec.polarity(s), spec.is_final(s)) {
            (Polarity::Input, true) => "doublecircle",
            (Polarity::Input, false) => "circle",
            (Polarity::Output, _) => "box",
        };
        writeln!(out, "  {} [shape={shape}];", quote(spec.state_name(s))).unwrap();
    }
    writeln!(out, "  __start -> {};", quote(spec.state_name(spec.initial()))).unwrap();
    for t in spec.transitions() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(spec.state_name(t.source)),
            quote(spec.state_name(t.target)),
            quote(&format!("{}|{}", spec.symbol_name(t), t.weight))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

pub fn mealy_to_dot(t: &MealyTransducer) -> String {
    let mut out = String::from("digraph mealy {\n  rankdir=LR;\n  __start [shape=point];\n");
    for s in 0..t.num_states() {
        let shape = if t.is_final(s) { "doublecircle" } else { "circle" };
        writeln!(out, "  {} [shape={shape}];", quote(t.state_name(s))).unwrap();
    }
    writeln!(out, "  __start -> {};", quote(t.state_name(t.initial()))).unwrap();
    for x in t.transitions() {
        writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(t.state_name(x.source)),
            quote(t.state_name(x.target)),
            quote(&format!("{}/{}", t.inputs().name(x.input), t.outputs().name(x.output)))
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spec::parse_wfa;

    #[test]
    fn one_node_per_state() {
        let spec = parse_wfa("wfa\nmeasure: sum\ninputs: a\noutputs: c\ninitial: p\nfinals: p\ntrans: p a 1 q\ntrans: q c 2 p\n").unwrap();
        let dot = spec_to_dot(&spec);
        assert_eq!(dot.matches("[shape=").count(), spec.num_states() + 1);
        assert!(dot.contains("\"p\" -> \"q\""));
    }
}
