//! Weighted specifications, Mealy transducers and their text formats.

mod alphabet;
pub(crate) mod dot;
mod mealy;
mod text;
mod value;
mod weighted;

pub use alphabet::{Alphabet, SymbolId};
pub use dot::{mealy_to_dot, spec_to_dot};
pub use mealy::{MealyTransducer, MealyTransition};
pub use text::{emit_mealy, emit_wfa, parse_mealy, parse_wfa};
pub use value::ValueResult;
pub use weighted::{Measure, Polarity, SpecBuilder, StateId, Transition, TransitionId, WeightedSpec};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("state {0} is reachable both as an input state and as an output state")]
    PolarityConflict(String),
    #[error("nondeterministic at {state}/{symbol}")]
    Nondeterministic { state: String, symbol: String },
    #[error("final state {0} is an output state")]
    FinalOutputState(String),
    #[error("reference to undeclared state {0}")]
    DanglingState(String),
    #[error("symbol {0} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("symbol {symbol} used on a transition from {polarity} state {state}")]
    WrongAlphabet {
        state: String,
        symbol: String,
        polarity: &'static str,
    },
    #[error("input and output words differ in length ({input} vs {output})")]
    LengthMismatch { input: usize, output: usize },
    #[error("discount factor must satisfy 0 < lambda < 1")]
    InvalidDiscount,
    #[error("measure dsum requires a discount factor")]
    MissingDiscount,
    #[error("discount factor given for a non-dsum measure")]
    UnexpectedDiscount,
    #[error("{0}")]
    Invalid(String),
}

/// Splits a word given on a command line or in a test into symbols.
///
/// Whitespace or commas separate symbols. Without separators, a word over
/// an alphabet of single-character symbols is split per character; `ε`,
/// `eps` and the empty string denote the empty word.
pub fn split_word(alphabet: &Alphabet, text: &str) -> Result<Vec<SymbolId>, SpecError> {
    let text = text.trim();
    if text.is_empty() || text == "ε" || text == "eps" {
        return Ok(Vec::new());
    }
    let tokens: Vec<String> = if text.contains(|c: char| c.is_whitespace() || c == ',') {
        text.split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    } else if alphabet.is_single_char() {
        text.chars().map(|c| c.to_string()).collect()
    } else {
        vec![text.to_string()]
    };
    tokens
        .iter()
        .map(|t| alphabet.id(t).ok_or_else(|| SpecError::UnknownSymbol(t.clone())))
        .collect()
}
