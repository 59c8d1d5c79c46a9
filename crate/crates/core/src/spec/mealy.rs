use std::collections::{BTreeSet, HashMap, VecDeque};

use super::alphabet::{Alphabet, SymbolId};
use super::weighted::StateId;
use super::SpecError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MealyTransition {
    pub source: StateId,
    pub input: SymbolId,
    pub output: SymbolId,
    pub target: StateId,
}

/// An input-deterministic transducer with final states.
#[derive(Debug, Clone)]
pub struct MealyTransducer {
    inputs: Alphabet,
    outputs: Alphabet,
    states: Vec<String>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<MealyTransition>,
    table: Vec<Vec<Option<usize>>>,
}

impl MealyTransducer {
    /// A transducer with the given alphabets and a single non-final initial state.
    pub fn new(inputs: Alphabet, outputs: Alphabet, initial: &str) -> Self {
        MealyTransducer {
            inputs,
            outputs,
            states: vec![initial.to_string()],
            initial: 0,
            finals: vec![false],
            transitions: Vec::new(),
            table: vec![Vec::new()],
        }
    }

    pub fn add_state(&mut self, name: &str) -> StateId {
        if let Some(id) = self.state_id(name) {
            return id;
        }
        self.states.push(name.to_string());
        self.finals.push(false);
        self.table.push(Vec::new());
        self.states.len() - 1
    }

    pub fn set_final(&mut self, state: StateId, is_final: bool) {
        self.finals[state] = is_final;
    }

    pub fn add_input_symbol(&mut self, symbol: &str) -> SymbolId {
        self.inputs.insert(symbol.to_string())
    }

    pub fn add_output_symbol(&mut self, symbol: &str) -> SymbolId {
        self.outputs.insert(symbol.to_string())
    }

    pub fn add_transition(
        &mut self,
        source: StateId,
        input: SymbolId,
        output: SymbolId,
        target: StateId,
    ) -> Result<(), SpecError> {
        let row = &mut self.table[source];
        if row.len() <= input {
            row.resize(input + 1, None);
        }
        if row[input].is_some() {
            return Err(SpecError::Nondeterministic {
                state: self.states[source].clone(),
                symbol: self.inputs.name(input).to_string(),
            });
        }
        row[input] = Some(self.transitions.len());
        self.transitions.push(MealyTransition {
            source,
            input,
            output,
            target,
        });
        Ok(())
    }

    pub fn inputs(&self) -> &Alphabet {
        &self.inputs
    }

    pub fn outputs(&self) -> &Alphabet {
        &self.outputs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.states[state]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name)
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals[state]
    }

    pub fn transitions(&self) -> &[MealyTransition] {
        &self.transitions
    }

    /// The transition read on `input` from `state`.
    pub fn step(&self, state: StateId, input: SymbolId) -> Option<&MealyTransition> {
        let idx = (*self.table[state].get(input)?)?;
        Some(&self.transitions[idx])
    }

    /// Runs on a word over this transducer's input ids.
    pub fn run_ids(&self, u: &[SymbolId]) -> Option<Vec<SymbolId>> {
        let mut state = self.initial;
        let mut out = Vec::with_capacity(u.len());
        for &a in u {
            let t = self.step(state, a)?;
            out.push(t.output);
            state = t.target;
        }
        self.finals[state].then_some(out)
    }

    /// Runs on a word given by symbol names; unknown symbols make the result undefined.
    pub fn run(&self, u: &[&str]) -> Option<Vec<String>> {
        let ids: Option<Vec<SymbolId>> = u.iter().map(|a| self.inputs.id(a)).collect();
        let out = self.run_ids(&ids?)?;
        Some(out.into_iter().map(|b| self.outputs.name(b).to_string()).collect())
    }

    /// Drops states unreachable from the initial state.
    pub fn trimmed(&self) -> MealyTransducer {
        let mut seen = vec![false; self.states.len()];
        seen[self.initial] = true;
        let mut queue = VecDeque::from([self.initial]);
        while let Some(s) = queue.pop_front() {
            for t in self.transitions.iter().filter(|t| t.source == s) {
                if !seen[t.target] {
                    seen[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        let mut result = MealyTransducer::new(self.inputs.clone(), self.outputs.clone(), &self.states[self.initial]);
        let mut map = vec![None; self.states.len()];
        map[self.initial] = Some(0);
        for s in 0..self.states.len() {
            if seen[s] && s != self.initial {
                map[s] = Some(result.add_state(&self.states[s]));
            }
        }
        for s in 0..self.states.len() {
            if let Some(n) = map[s] {
                result.set_final(n, self.finals[s]);
            }
        }
        for t in &self.transitions {
            if let (Some(s), Some(d)) = (map[t.source], map[t.target]) {
                result
                    .add_transition(s, t.input, t.output, d)
                    .expect("source transducer is deterministic");
            }
        }
        result
    }

    /// Merges states with the same finality and the same outputs and
    /// successor classes on every input (partition refinement). Drops
    /// unreachable states first; each class keeps the name of its first member.
    pub fn minimized(&self) -> MealyTransducer {
        let t = self.trimmed();
        let n = t.num_states();
        let mut class: Vec<usize> = t.finals.iter().map(|&f| usize::from(f)).collect();
        loop {
            let mut ids: HashMap<(usize, Vec<Option<(SymbolId, usize)>>), usize> = HashMap::new();
            let mut next = vec![0; n];
            for s in 0..n {
                let moves = t.inputs.ids().map(|a| t.step(s, a).map(|x| (x.output, class[x.target]))).collect();
                let fresh = ids.len();
                next[s] = *ids.entry((class[s], moves)).or_insert(fresh);
            }
            let stable = ids.len() == class.iter().collect::<BTreeSet<_>>().len();
            class = next;
            if stable {
                break;
            }
        }
        let mut result = MealyTransducer::new(t.inputs.clone(), t.outputs.clone(), &t.states[t.initial]);
        let mut rep: HashMap<usize, StateId> = HashMap::from([(class[t.initial], 0)]);
        for s in 0..n {
            let id = *rep.entry(class[s]).or_insert_with(|| result.add_state(&t.states[s]));
            result.set_final(id, t.finals[s]);
        }
        for x in &t.transitions {
            let (s, d) = (rep[&class[x.source]], rep[&class[x.target]]);
            if result.step(s, x.input).is_none() {
                result.add_transition(s, x.input, x.output, d).expect("checked above");
            }
        }
        result
    }

    fn canonical(&self) -> (BTreeSet<&str>, &str, BTreeSet<&str>, BTreeSet<(&str, &str, &str, &str)>) {
        (
            self.states.iter().map(String::as_str).collect(),
            &self.states[self.initial],
            (0..self.states.len())
                .filter(|&s| self.finals[s])
                .map(|s| self.states[s].as_str())
                .collect(),
            self.transitions
                .iter()
                .map(|t| {
                    (
                        self.states[t.source].as_str(),
                        self.inputs.name(t.input),
                        self.outputs.name(t.output),
                        self.states[t.target].as_str(),
                    )
                })
                .collect(),
        )
    }
}

/// Equality by state and symbol names.
impl PartialEq for MealyTransducer {
    fn eq(&self, other: &Self) -> bool {
        let sym = |a: &Alphabet| a.symbols().iter().cloned().collect::<BTreeSet<_>>();
        sym(&self.inputs) == sym(&other.inputs)
            && sym(&self.outputs) == sym(&other.outputs)
            && self.canonical() == other.canonical()
    }
}

impl Eq for MealyTransducer {}
