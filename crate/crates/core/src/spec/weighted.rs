use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::alphabet::{Alphabet, SymbolId};
use super::value::ValueResult;
use super::SpecError;
use crate::rational::{is_discount, pow};

pub type StateId = usize;
pub type TransitionId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measure {
    Sum,
    Avg,
    Dsum,
}

impl Measure {
    pub fn keyword(self) -> &'static str {
        match self {
            Measure::Sum => "sum",
            Measure::Avg => "avg",
            Measure::Dsum => "dsum",
        }
    }

    pub fn from_keyword(text: &str) -> Option<Measure> {
        match text {
            "sum" => Some(Measure::Sum),
            "avg" => Some(Measure::Avg),
            "dsum" => Some(Measure::Dsum),
            _ => None,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Whether a state reads input symbols or output symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Input,
    Output,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Input => Polarity::Output,
            Polarity::Output => Polarity::Input,
        }
    }

    fn describe(self) -> &'static str {
        match self {
            Polarity::Input => "input",
            Polarity::Output => "output",
        }
    }
}

/// A weighted transition. `symbol` indexes the input alphabet when the source
/// is an input state and the output alphabet otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub source: StateId,
    pub symbol: SymbolId,
    pub weight: i64,
    pub target: StateId,
}

/// A deterministic weighted automaton over alternating input/output symbols.
#[derive(Debug, Clone)]
pub struct WeightedSpec {
    inputs: Alphabet,
    outputs: Alphabet,
    states: Vec<String>,
    polarity: Vec<Polarity>,
    initial: StateId,
    finals: Vec<bool>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<TransitionId>>,
    measure: Measure,
    discount: Option<BigRational>,
}

impl WeightedSpec {
    pub fn builder(measure: Measure) -> SpecBuilder {
        SpecBuilder::new(measure)
    }

    /// Assembles a spec from already-validated parts.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        inputs: Alphabet,
        outputs: Alphabet,
        states: Vec<String>,
        polarity: Vec<Polarity>,
        initial: StateId,
        finals: Vec<bool>,
        transitions: Vec<Transition>,
        measure: Measure,
        discount: Option<BigRational>,
    ) -> WeightedSpec {
        let mut outgoing = vec![Vec::new(); states.len()];
        for (id, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(id);
        }
        WeightedSpec {
            inputs,
            outputs,
            states,
            polarity,
            initial,
            finals,
            transitions,
            outgoing,
            measure,
            discount,
        }
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

    pub fn polarity(&self, state: StateId) -> Polarity {
        self.polarity[state]
    }

    pub fn is_input_state(&self, state: StateId) -> bool {
        self.polarity[state] == Polarity::Input
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, state: StateId) -> bool {
        self.finals[state]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).filter(|&s| self.finals[s])
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id]
    }

    pub fn outgoing(&self, state: StateId) -> &[TransitionId] {
        &self.outgoing[state]
    }

    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn discount(&self) -> Option<&BigRational> {
        self.discount.as_ref()
    }

    /// The alphabet read from `state`.
    pub fn alphabet_of(&self, state: StateId) -> &Alphabet {
        match self.polarity[state] {
            Polarity::Input => &self.inputs,
            Polarity::Output => &self.outputs,
        }
    }

    /// Name of the symbol carried by a transition.
    pub fn symbol_name(&self, t: &Transition) -> &str {
        self.alphabet_of(t.source).name(t.symbol)
    }

    pub fn delta(&self, state: StateId, symbol: SymbolId) -> Option<TransitionId> {
        self.outgoing[state]
            .iter()
            .copied()
            .find(|&t| self.transitions[t].symbol == symbol)
    }

    pub fn step(&self, state: StateId, symbol: SymbolId) -> Option<StateId> {
        self.delta(state, symbol).map(|t| self.transitions[t].target)
    }

    /// Same automaton read with another measure.
    pub fn with_measure(&self, measure: Measure, discount: Option<BigRational>) -> Result<WeightedSpec, SpecError> {
        check_discount(measure, discount.as_ref())?;
        let mut spec = self.clone();
        spec.measure = measure;
        spec.discount = discount;
        Ok(spec)
    }

    /// Value of a weight sequence under this spec's measure.
    pub fn measure_value(&self, weights: &[i64]) -> BigRational {
        measure_value(self.measure, self.discount.as_ref(), weights)
    }

    /// Runs the automaton on `u ⊗ v` and returns the transitions taken, or
    /// `None` when the run blocks.
    pub fn run(&self, u: &[SymbolId], v: &[SymbolId]) -> Result<Option<(Vec<TransitionId>, StateId)>, SpecError> {
        if u.len() != v.len() {
            return Err(SpecError::LengthMismatch {
                input: u.len(),
                output: v.len(),
            });
        }
        self.check_word(u, v)?;
        let mut state = self.initial;
        let mut path = Vec::with_capacity(2 * u.len());
        for (&a, &b) in u.iter().zip(v) {
            for sym in [a, b] {
                match self.delta(state, sym) {
                    Some(t) => {
                        path.push(t);
                        state = self.transitions[t].target;
                    }
                    None => return Ok(None),
                }
            }
        }
        Ok(Some((path, state)))
    }

    fn check_word(&self, u: &[SymbolId], v: &[SymbolId]) -> Result<(), SpecError> {
        if let Some(&a) = u.iter().find(|&&a| a >= self.inputs.len()) {
            return Err(SpecError::UnknownSymbol(format!("#{a}")));
        }
        if let Some(&b) = v.iter().find(|&&b| b >= self.outputs.len()) {
            return Err(SpecError::UnknownSymbol(format!("#{b}")));
        }
        Ok(())
    }

    /// `S(u ⊗ v)`.
    pub fn evaluate(&self, u: &[SymbolId], v: &[SymbolId]) -> Result<ValueResult, SpecError> {
        Ok(match self.run(u, v)? {
            Some((path, end)) if self.finals[end] => {
                let weights: Vec<i64> = path.iter().map(|&t| self.transitions[t].weight).collect();
                ValueResult::Value(self.measure_value(&weights))
            }
            _ => ValueResult::NegInf,
        })
    }

    /// `bestVal(u)`: the maximum of `S(u ⊗ v)` over all `v` with `|v| = |u|`.
    pub fn best_value(&self, u: &[SymbolId]) -> Result<ValueResult, SpecError> {
        Ok(match self.best_output(u)? {
            Some((value, _)) => ValueResult::Value(value),
            None => ValueResult::NegInf,
        })
    }

    /// A maximizing output word for `u` together with its value.
    ///
    /// Forward dynamic programming over positions; each reachable state keeps
    /// its best accumulated (discounted) weight.
    pub fn best_output(&self, u: &[SymbolId]) -> Result<Option<(BigRational, Vec<SymbolId>)>, SpecError> {
        self.check_word(u, &[])?;
        let lambda = self.discount.clone();
        // layer[state] = (accumulated, predecessor index into the previous layer, output symbol)
        let mut layers: Vec<BTreeMap<StateId, (BigRational, StateId, SymbolId)>> = Vec::new();
        let mut current: BTreeMap<StateId, BigRational> = BTreeMap::new();
        current.insert(self.initial, BigRational::zero());
        let mut position = 0usize;
        for &a in u {
            let mut next: BTreeMap<StateId, (BigRational, StateId, SymbolId)> = BTreeMap::new();
            for (&state, acc) in &current {
                let Some(ti) = self.delta(state, a) else { continue };
                let mid = self.transitions[ti].target;
                let after_input = acc + self.scaled(self.transitions[ti].weight, position + 1, lambda.as_ref());
                for &to in &self.outgoing[mid] {
                    let t = &self.transitions[to];
                    let value = &after_input + self.scaled(t.weight, position + 2, lambda.as_ref());
                    let better = next.get(&t.target).is_none_or(|(best, _, _)| &value > best);
                    if better {
                        next.insert(t.target, (value, state, t.symbol));
                    }
                }
            }
            position += 2;
            current = next.iter().map(|(&s, (v, _, _))| (s, v.clone())).collect();
            layers.push(next);
        }
        let best = current
            .iter()
            .filter(|(&s, _)| self.finals[s])
            .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(x.0)));
        let Some((&end, acc)) = best else {
            return Ok(None);
        };
        let mut output = Vec::with_capacity(u.len());
        let mut state = end;
        for layer in layers.iter().rev() {
            let (_, prev, sym) = &layer[&state];
            output.push(*sym);
            state = *prev;
        }
        output.reverse();
        let value = match self.measure {
            Measure::Avg if !u.is_empty() => acc / BigRational::from_integer(BigInt::from(2 * u.len())),
            _ => acc.clone(),
        };
        Ok(Some((value, output)))
    }

    fn scaled(&self, weight: i64, position: usize, lambda: Option<&BigRational>) -> BigRational {
        let w = BigRational::from_integer(BigInt::from(weight));
        match (self.measure, lambda) {
            (Measure::Dsum, Some(l)) => w * pow(l, position),
            _ => w,
        }
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for &t in &self.outgoing[s] {
                let target = self.transitions[t].target;
                if !seen[target] {
                    seen[target] = true;
                    queue.push_back(target);
                }
            }
        }
        seen
    }

    /// States from which a final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut incoming = vec![Vec::new(); self.states.len()];
        for t in &self.transitions {
            incoming[t.target].push(t.source);
        }
        let mut seen = self.finals.clone();
        let mut queue: VecDeque<StateId> = self.finals().collect();
        while let Some(s) = queue.pop_front() {
            for &p in &incoming[s] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Keeps only the given states and transitions (the initial state is always
    /// kept). Returns the new spec and the old-to-new state map.
    pub fn restrict(&self, keep_state: &[bool], keep_transition: &[bool]) -> (WeightedSpec, Vec<Option<StateId>>) {
        let mut map = vec![None; self.states.len()];
        let mut states = Vec::new();
        let mut polarity = Vec::new();
        let mut finals = Vec::new();
        for s in 0..self.states.len() {
            if keep_state[s] || s == self.initial {
                map[s] = Some(states.len());
                states.push(self.states[s].clone());
                polarity.push(self.polarity[s]);
                finals.push(self.finals[s]);
            }
        }
        let transitions = self
            .transitions
            .iter()
            .enumerate()
            .filter(|(id, _)| keep_transition[*id])
            .filter_map(|(_, t)| {
                Some(Transition {
                    source: map[t.source]?,
                    symbol: t.symbol,
                    weight: t.weight,
                    target: map[t.target]?,
                })
            })
            .collect();
        let spec = WeightedSpec::from_parts(
            self.inputs.clone(),
            self.outputs.clone(),
            states,
            polarity,
            map[self.initial].expect("initial kept"),
            finals,
            transitions,
            self.measure,
            self.discount.clone(),
        );
        (spec, map)
    }

    /// Removes states that are unreachable or cannot reach a final state.
    pub fn trim(&self) -> WeightedSpec {
        self.trim_with_map().0
    }

    pub fn trim_with_map(&self) -> (WeightedSpec, Vec<Option<StateId>>) {
        let reach = self.reachable();
        let coreach = self.coreachable();
        let keep: Vec<bool> = (0..self.states.len()).map(|s| reach[s] && coreach[s]).collect();
        let keep_t: Vec<bool> = self
            .transitions
            .iter()
            .map(|t| keep[t.source] && keep[t.target])
            .collect();
        self.restrict(&keep, &keep_t)
    }

    /// Adds two non-final sink states so that every input state reads every
    /// input symbol and every output state every output symbol. Missing
    /// transitions get weight zero. Returns the completed spec and the ids of
    /// the input-polarity and output-polarity sinks.
    pub fn completed(&self) -> (WeightedSpec, StateId, StateId) {
        let mut states = self.states.clone();
        let mut polarity = self.polarity.clone();
        let mut finals = self.finals.clone();
        let fresh = |base: &str, states: &[String]| {
            let mut name = base.to_string();
            while states.contains(&name) {
                name.push('\'');
            }
            name
        };
        let sink_in = states.len();
        states.push(fresh("_sink_in", &states));
        polarity.push(Polarity::Input);
        finals.push(false);
        let sink_out = states.len();
        states.push(fresh("_sink_out", &states));
        polarity.push(Polarity::Output);
        finals.push(false);
        let mut transitions = self.transitions.clone();
        for s in 0..states.len() {
            let (alphabet_len, sink) = match polarity[s] {
                Polarity::Input => (self.inputs.len(), sink_out),
                Polarity::Output => (self.outputs.len(), sink_in),
            };
            for sym in 0..alphabet_len {
                let present = s < self.states.len() && self.delta(s, sym).is_some();
                if !present {
                    transitions.push(Transition {
                        source: s,
                        symbol: sym,
                        weight: 0,
                        target: sink,
                    });
                }
            }
        }
        let spec = WeightedSpec::from_parts(
            self.inputs.clone(),
            self.outputs.clone(),
            states,
            polarity,
            self.initial,
            finals,
            transitions,
            self.measure,
            self.discount.clone(),
        );
        (spec, sink_in, sink_out)
    }

    /// Largest absolute transition weight.
    pub fn max_abs_weight(&self) -> i64 {
        self.transitions.iter().map(|t| t.weight.abs()).max().unwrap_or(0)
    }

    fn canonical(&self) -> CanonicalSpec<'_> {
        CanonicalSpec {
            inputs: self.inputs.symbols().iter().map(String::as_str).collect(),
            outputs: self.outputs.symbols().iter().map(String::as_str).collect(),
            states: self.states.iter().map(String::as_str).collect(),
            initial: &self.states[self.initial],
            finals: self.finals().map(|s| self.states[s].as_str()).collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| {
                    (
                        self.states[t.source].as_str(),
                        self.symbol_name(t),
                        t.weight,
                        self.states[t.target].as_str(),
                    )
                })
                .collect(),
            measure: self.measure,
            discount: self.discount.as_ref(),
        }
    }
}

#[derive(PartialEq, Eq)]
struct CanonicalSpec<'a> {
    inputs: BTreeSet<&'a str>,
    outputs: BTreeSet<&'a str>,
    states: BTreeSet<&'a str>,
    initial: &'a str,
    finals: BTreeSet<&'a str>,
    transitions: BTreeSet<(&'a str, &'a str, i64, &'a str)>,
    measure: Measure,
    discount: Option<&'a BigRational>,
}

/// Structural equality by state and symbol names.
impl PartialEq for WeightedSpec {
    fn eq(&self, other: &Self) -> bool {
        self.canonical() == other.canonical()
    }
}

impl Eq for WeightedSpec {}

pub(crate) fn measure_value(measure: Measure, discount: Option<&BigRational>, weights: &[i64]) -> BigRational {
    let sum = |ws: &[i64]| -> BigRational {
        BigRational::from_integer(ws.iter().map(|&w| BigInt::from(w)).sum())
    };
    match measure {
        Measure::Sum => sum(weights),
        Measure::Avg => {
            if weights.is_empty() {
                BigRational::zero()
            } else {
                sum(weights) / BigRational::from_integer(BigInt::from(weights.len()))
            }
        }
        Measure::Dsum => {
            let lambda = discount.expect("dsum spec carries a discount");
            let mut factor = lambda.clone();
            let mut total = BigRational::zero();
            for &w in weights {
                total += &factor * BigRational::from_integer(BigInt::from(w));
                factor *= lambda;
            }
            total
        }
    }
}

fn check_discount(measure: Measure, discount: Option<&BigRational>) -> Result<(), SpecError> {
    match (measure, discount) {
        (Measure::Dsum, None) => Err(SpecError::MissingDiscount),
        (Measure::Dsum, Some(l)) if !is_discount(l) => Err(SpecError::InvalidDiscount),
        (Measure::Sum | Measure::Avg, Some(_)) => Err(SpecError::UnexpectedDiscount),
        _ => Ok(()),
    }
}

/// Collects states and transitions by name and infers state polarity.
#[derive(Debug, Clone)]
pub struct SpecBuilder {
    measure: Measure,
    discount: Option<BigRational>,
    inputs: Alphabet,
    outputs: Alphabet,
    declared: Option<Vec<String>>,
    states: Vec<String>,
    index: HashMap<String, StateId>,
    initial: Option<String>,
    finals: Vec<String>,
    transitions: Vec<(String, String, i64, String)>,
}

impl SpecBuilder {
    pub fn new(measure: Measure) -> Self {
        SpecBuilder {
            measure,
            discount: None,
            inputs: Alphabet::default(),
            outputs: Alphabet::default(),
            declared: None,
            states: Vec::new(),
            index: HashMap::new(),
            initial: None,
            finals: Vec::new(),
            transitions: Vec::new(),
        }
    }

    pub fn discount(&mut self, lambda: BigRational) -> &mut Self {
        self.discount = Some(lambda);
        self
    }

    pub fn inputs<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, symbols: I) -> &mut Self {
        for s in symbols {
            self.inputs.insert(s.into());
        }
        self
    }

    pub fn outputs<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, symbols: I) -> &mut Self {
        for s in symbols {
            self.outputs.insert(s.into());
        }
        self
    }

    /// Declares states explicitly; once used, every referenced state must be declared.
    pub fn declare_states<I: IntoIterator<Item = S>, S: Into<String>>(&mut self, names: I) -> &mut Self {
        let declared = self.declared.get_or_insert_with(Vec::new);
        for n in names {
            let n = n.into();
            if !declared.contains(&n) {
                declared.push(n.clone());
            }
            Self::intern_into(&mut self.states, &mut self.index, &n);
        }
        self
    }

    fn intern_into(states: &mut Vec<String>, index: &mut HashMap<String, StateId>, name: &str) -> StateId {
        if let Some(&id) = index.get(name) {
            return id;
        }
        let id = states.len();
        states.push(name.to_string());
        index.insert(name.to_string(), id);
        id
    }

    fn intern(&mut self, name: &str) {
        Self::intern_into(&mut self.states, &mut self.index, name);
    }

    pub fn initial(&mut self, name: &str) -> &mut Self {
        self.intern(name);
        self.initial = Some(name.to_string());
        self
    }

    pub fn final_state(&mut self, name: &str) -> &mut Self {
        self.intern(name);
        if !self.finals.iter().any(|f| f == name) {
            self.finals.push(name.to_string());
        }
        self
    }

    pub fn transition(&mut self, source: &str, symbol: &str, weight: i64, target: &str) -> &mut Self {
        self.intern(source);
        self.intern(target);
        self.transitions
            .push((source.to_string(), symbol.to_string(), weight, target.to_string()));
        self
    }

    pub fn build(&self) -> Result<WeightedSpec, SpecError> {
        check_discount(self.measure, self.discount.as_ref())?;
        let initial_name = self
            .initial
            .as_ref()
            .ok_or_else(|| SpecError::Invalid("missing initial state".into()))?;
        if let Some(declared) = &self.declared {
            let referenced = std::iter::once(initial_name)
                .chain(&self.finals)
                .chain(self.transitions.iter().flat_map(|(s, _, _, t)| [s, t]));
            for name in referenced {
                if !declared.contains(name) {
                    return Err(SpecError::DanglingState(name.clone()));
                }
            }
        }
        let n = self.states.len();
        let initial = self.index[initial_name.as_str()];

        let mut seen_pairs = BTreeSet::new();
        for (s, a, _, _) in &self.transitions {
            if !seen_pairs.insert((s.as_str(), a.as_str())) {
                return Err(SpecError::Nondeterministic {
                    state: s.clone(),
                    symbol: a.clone(),
                });
            }
            if !self.inputs.contains(a) && !self.outputs.contains(a) {
                return Err(SpecError::UnknownSymbol(a.clone()));
            }
        }

        let edges: Vec<(StateId, &str, i64, StateId)> = self
            .transitions
            .iter()
            .map(|(s, a, w, t)| (self.index[s.as_str()], a.as_str(), *w, self.index[t.as_str()]))
            .collect();
        let polarity = self.infer_polarity(n, initial, &edges)?;

        let mut finals = vec![false; n];
        for f in &self.finals {
            let id = self.index[f.as_str()];
            if polarity[id] == Polarity::Output {
                return Err(SpecError::FinalOutputState(f.clone()));
            }
            finals[id] = true;
        }

        let mut transitions = Vec::with_capacity(edges.len());
        for &(s, a, w, t) in &edges {
            let alphabet = match polarity[s] {
                Polarity::Input => &self.inputs,
                Polarity::Output => &self.outputs,
            };
            let symbol = alphabet.id(a).ok_or_else(|| SpecError::WrongAlphabet {
                state: self.states[s].clone(),
                symbol: a.to_string(),
                polarity: polarity[s].describe(),
            })?;
            transitions.push(Transition {
                source: s,
                symbol,
                weight: w,
                target: t,
            });
        }
        Ok(WeightedSpec::from_parts(
            self.inputs.clone(),
            self.outputs.clone(),
            self.states.clone(),
            polarity,
            initial,
            finals,
            transitions,
            self.measure,
            self.discount.clone(),
        ))
    }

    /// Breadth-first propagation from the initial state (an input state),
    /// then from unreachable states whose polarity is forced by their symbols
    /// or by being final. Undetermined leftovers default to input.
    fn infer_polarity(
        &self,
        n: usize,
        initial: StateId,
        edges: &[(StateId, &str, i64, StateId)],
    ) -> Result<Vec<Polarity>, SpecError> {
        let mut adjacency: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for &(s, _, _, t) in edges {
            adjacency[s].push(t);
            adjacency[t].push(s);
        }
        let mut polarity: Vec<Option<Polarity>> = vec![None; n];
        let propagate = |seed: StateId, p: Polarity, polarity: &mut Vec<Option<Polarity>>| -> Result<(), SpecError> {
            if let Some(existing) = polarity[seed] {
                return if existing == p {
                    Ok(())
                } else {
                    Err(SpecError::PolarityConflict(self.states[seed].clone()))
                };
            }
            polarity[seed] = Some(p);
            let mut queue = VecDeque::from([seed]);
            while let Some(s) = queue.pop_front() {
                let flipped = polarity[s].expect("set").flip();
                for &t in &adjacency[s] {
                    match polarity[t] {
                        None => {
                            polarity[t] = Some(flipped);
                            queue.push_back(t);
                        }
                        Some(q) if q != flipped => {
                            return Err(SpecError::PolarityConflict(self.states[t].clone()));
                        }
                        Some(_) => {}
                    }
                }
            }
            Ok(())
        };
        propagate(initial, Polarity::Input, &mut polarity)?;
        for &(s, a, _, _) in edges {
            if polarity[s].is_some() {
                continue;
            }
            let forced = match (self.inputs.contains(a), self.outputs.contains(a)) {
                (true, false) => Some(Polarity::Input),
                (false, true) => Some(Polarity::Output),
                _ => None,
            };
            if let Some(p) = forced {
                propagate(s, p, &mut polarity)?;
            }
        }
        for f in &self.finals {
            let id = self.index[f.as_str()];
            if polarity[id].is_none() {
                propagate(id, Polarity::Input, &mut polarity)?;
            }
        }
        for s in 0..n {
            if polarity[s].is_none() {
                propagate(s, Polarity::Input, &mut polarity)?;
            }
        }
        Ok(polarity.into_iter().map(|p| p.expect("all assigned")).collect())
    }
}
