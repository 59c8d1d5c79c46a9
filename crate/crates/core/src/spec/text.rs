use std::fmt::Write;

use super::alphabet::Alphabet;
use super::mealy::MealyTransducer;
use super::weighted::{Measure, SpecBuilder, WeightedSpec};
use super::SpecError;
use crate::rational::{format_rational, parse_rational};

struct Line<'a> {
    number: usize,
    key: &'a str,
    rest: Vec<&'a str>,
}

fn syntax(line: usize, message: impl Into<String>) -> SpecError {
    SpecError::Syntax {
        line,
        message: message.into(),
    }
}

/// Splits a file into `key: values` lines after checking the header keyword.
fn lines<'a>(text: &'a str, header: &str) -> Result<Vec<Line<'a>>, SpecError> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if !seen_header {
            if content != header {
                return Err(syntax(number, format!("expected header `{header}`")));
            }
            seen_header = true;
            continue;
        }
        let Some((key, rest)) = content.split_once(':') else {
            return Err(syntax(number, format!("expected `key: value`, found `{content}`")));
        };
        out.push(Line {
            number,
            key: key.trim(),
            rest: rest.split_whitespace().collect(),
        });
    }
    if !seen_header {
        return Err(syntax(1, format!("missing header `{header}`")));
    }
    Ok(out)
}

fn single<'a>(line: &Line<'a>) -> Result<&'a str, SpecError> {
    match line.rest.as_slice() {
        [one] => Ok(one),
        _ => Err(syntax(line.number, format!("`{}` takes exactly one value", line.key))),
    }
}

pub fn parse_wfa(text: &str) -> Result<WeightedSpec, SpecError> {
    let lines = lines(text, "wfa")?;
    let mut measure = None;
    let mut discount = None;
    for line in &lines {
        match line.key {
            "measure" => {
                let word = single(line)?;
                measure = Some(
                    Measure::from_keyword(word)
                        .ok_or_else(|| syntax(line.number, format!("unknown measure `{word}`")))?,
                );
            }
            "discount" => {
                let word = single(line)?;
                discount = Some(
                    parse_rational(word)
                        .ok_or_else(|| syntax(line.number, format!("malformed rational `{word}`")))?,
                );
            }
            _ => {}
        }
    }
    let measure = measure.ok_or_else(|| syntax(1, "missing `measure:` line"))?;
    let mut builder = SpecBuilder::new(measure);
    if let Some(lambda) = discount {
        builder.discount(lambda);
    }
    let mut has_initial = false;
    for line in &lines {
        match line.key {
            "measure" | "discount" => {}
            "inputs" => {
                builder.inputs(line.rest.iter().copied());
            }
            "outputs" => {
                builder.outputs(line.rest.iter().copied());
            }
            "states" => {
                builder.declare_states(line.rest.iter().copied());
            }
            "initial" => {
                if has_initial {
                    return Err(syntax(line.number, "duplicate `initial:` line"));
                }
                has_initial = true;
                builder.initial(single(line)?);
            }
            "finals" => {
                for f in &line.rest {
                    builder.final_state(f);
                }
            }
            "trans" => {
                let [source, symbol, weight, target] = line.rest.as_slice() else {
                    return Err(syntax(line.number, "expected `trans: source symbol weight target`"));
                };
                let weight: i64 = weight
                    .parse()
                    .map_err(|_| syntax(line.number, format!("weight `{weight}` is not an integer")))?;
                builder.transition(source, symbol, weight, target);
            }
            other => return Err(syntax(line.number, format!("unknown key `{other}`"))),
        }
    }
    if !has_initial {
        return Err(syntax(1, "missing `initial:` line"));
    }
    builder.build()
}

pub fn emit_wfa(spec: &WeightedSpec) -> String {
    let mut out = String::from("wfa\n");
    writeln!(out, "measure: {}", spec.measure()).unwrap();
    if let Some(lambda) = spec.discount() {
        writeln!(out, "discount: {}", format_rational(lambda)).unwrap();
    }
    writeln!(out, "inputs: {}", spec.inputs().symbols().join(" ")).unwrap();
    writeln!(out, "outputs: {}", spec.outputs().symbols().join(" ")).unwrap();
    let states: Vec<&str> = (0..spec.num_states()).map(|s| spec.state_name(s)).collect();
    writeln!(out, "states: {}", states.join(" ")).unwrap();
    writeln!(out, "initial: {}", spec.state_name(spec.initial())).unwrap();
    let finals: Vec<&str> = spec.finals().map(|s| spec.state_name(s)).collect();
    writeln!(out, "finals: {}", finals.join(" ")).unwrap();
    for t in spec.transitions() {
        writeln!(
            out,
            "trans: {} {} {} {}",
            spec.state_name(t.source),
            spec.symbol_name(t),
            t.weight,
            spec.state_name(t.target)
        )
        .unwrap();
    }
    out
}

pub fn parse_mealy(text: &str) -> Result<MealyTransducer, SpecError> {
    let lines = lines(text, "mealy")?;
    let mut inputs = Alphabet::default();
    let mut outputs = Alphabet::default();
    let mut initial = None;
    for line in &lines {
        match line.key {
            "inputs" => line.rest.iter().for_each(|s| {
                inputs.insert(s.to_string());
            }),
            "outputs" => line.rest.iter().for_each(|s| {
                outputs.insert(s.to_string());
            }),
            "initial" => {
                if initial.is_some() {
                    return Err(syntax(line.number, "duplicate `initial:` line"));
                }
                initial = Some(single(line)?);
            }
            "states" | "finals" | "trans" => {}
            other => return Err(syntax(line.number, format!("unknown key `{other}`"))),
        }
    }
    let initial = initial.ok_or_else(|| syntax(1, "missing `initial:` line"))?;
    let mut t = MealyTransducer::new(inputs, outputs, initial);
    for line in &lines {
        match line.key {
            "states" => {
                for s in &line.rest {
                    t.add_state(s);
                }
            }
            "finals" => {
                for f in &line.rest {
                    let id = t.add_state(f);
                    t.set_final(id, true);
                }
            }
            "trans" => {
                let [source, a, b, target] = line.rest.as_slice() else {
                    return Err(syntax(line.number, "expected `trans: source input output target`"));
                };
                let s = t.add_state(source);
                let d = t.add_state(target);
                let a = t.add_input_symbol(a);
                let b = t.add_output_symbol(b);
                t.add_transition(s, a, b, d)?;
            }
            _ => {}
        }
    }
    Ok(t)
}

/// Alphabet and state lines are only written when they carry information
/// not already present in the transitions.
pub fn emit_mealy(t: &MealyTransducer) -> String {
    let mut out = String::from("mealy\n");
    let used_inputs = t.inputs().ids().all(|a| t.transitions().iter().any(|x| x.input == a));
    let used_outputs = t.outputs().ids().all(|b| t.transitions().iter().any(|x| x.output == b));
    let inputs_in_order = used_inputs && first_use_order(t.transitions().iter().map(|x| x.input));
    let outputs_in_order = used_outputs && first_use_order(t.transitions().iter().map(|x| x.output));
    if !inputs_in_order {
        writeln!(out, "inputs: {}", t.inputs().symbols().join(" ")).unwrap();
    }
    if !outputs_in_order {
        writeln!(out, "outputs: {}", t.outputs().symbols().join(" ")).unwrap();
    }
    let mentioned = |s: usize| {
        s == t.initial() || t.is_final(s) || t.transitions().iter().any(|x| x.source == s || x.target == s)
    };
    let state_order_implied = (0..t.num_states()).all(mentioned);
    if !state_order_implied {
        let names: Vec<&str> = (0..t.num_states()).map(|s| t.state_name(s)).collect();
        writeln!(out, "states: {}", names.join(" ")).unwrap();
    }
    writeln!(out, "initial: {}", t.state_name(t.initial())).unwrap();
    let finals: Vec<&str> = (0..t.num_states())
        .filter(|&s| t.is_final(s))
        .map(|s| t.state_name(s))
        .collect();
    writeln!(out, "finals: {}", finals.join(" ")).unwrap();
    for x in t.transitions() {
        writeln!(
            out,
            "trans: {} {} {} {}",
            t.state_name(x.source),
            t.inputs().name(x.input),
            t.outputs().name(x.output),
            t.state_name(x.target)
        )
        .unwrap();
    }
    out
}

/// True when symbol ids appear for the first time in increasing order, so that
/// re-reading the transitions rebuilds the same alphabet.
fn first_use_order(ids: impl Iterator<Item = usize>) -> bool {
    let mut next = 0;
    for id in ids {
        if id == next {
            next += 1;
        } else if id > next {
            return false;
        }
    }
    true
}
