//! Synthesis pipelines, realizer verification and generators.

mod approx;
mod arena;
mod church;
mod generate;
mod verify;

use std::fmt;

use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

pub use approx::{build_approx_game, synth_approx, ApproxGame, ApproxVertex};
pub use arena::{extract_transducer, spec_to_prefix_arena};
pub use church::totalize_for_church;
pub use generate::gen_spec_from_mp_game;
pub use verify::{difference, verify_realizer};

use crate::domain::{make_domain_safe, DomainSafeResult};
use crate::game::{GameError, Owner, PositionalStrategy};
use crate::prefix::{solve_prefix_threshold, Cmp, PrefixError, PrefixObjective};
use crate::rational::format_rational;
use crate::spec::{Measure, MealyTransducer, Polarity, SpecError, WeightedSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Prefix(#[from] PrefixError),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("approximation bound must be nonnegative, got {0}")]
    NegativeBound(String),
    #[error("transducer symbol {0} is not in the specification's alphabet")]
    AlphabetMismatch(String),
    #[error("strategy undefined at reachable output state {0}")]
    StrategyUndefined(String),
    #[error("weights overflow 64-bit integers after scaling")]
    Overflow,
    #[error("internal error: synthesized transducer fails verification on input `{0}`")]
    Unverified(String),
}

/// What a realizer has to guarantee on every input of the domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    /// `dom(f) = dom(S)` and every produced pair is accepted.
    Boolean,
    /// `S(u ⊗ f(u)) cmp ν`.
    Threshold { cmp: Cmp, nu: BigRational },
    /// `S(u ⊗ f(u)) = bestVal(u)`.
    BestValue,
    /// `bestVal(u) - S(u ⊗ f(u)) < r` (strict) or `<= r`.
    Approx { strict: bool, r: BigRational },
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Boolean => f.write_str("boolean"),
            Objective::Threshold { cmp, nu } => write!(f, "threshold {cmp} {}", format_rational(nu)),
            Objective::BestValue => f.write_str("best-value"),
            Objective::Approx { strict, r } => {
                write!(f, "approx {} {}", if *strict { "<" } else { "<=" }, format_rational(r))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum SynthResult {
    Realizable(MealyTransducer),
    Unrealizable,
    NoBooleanRealizer,
    /// The capped solver found no strategy; the cap used is attached.
    UnknownAtCap(u64),
}

impl SynthResult {
    pub fn keyword(&self) -> &'static str {
        match self {
            SynthResult::Realizable(_) => "realizable",
            SynthResult::Unrealizable => "unrealizable",
            SynthResult::NoBooleanRealizer => "no-boolean-realizer",
            SynthResult::UnknownAtCap(_) => "unknown-at-cap",
        }
    }

    pub fn transducer(&self) -> Option<&MealyTransducer> {
        match self {
            SynthResult::Realizable(t) => Some(t),
            _ => None,
        }
    }
}

/// Outcome of [`verify_realizer`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// An input word on which the objective is violated.
    Fail { input: Vec<String>, reason: String },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        *self == Verdict::Pass
    }
}

/// Returns `t` if it passes, and an internal error otherwise.
fn verified(spec: &WeightedSpec, t: MealyTransducer, obj: &Objective) -> Result<SynthResult, SynthError> {
    match verify_realizer(spec, &t, obj)? {
        Verdict::Pass => Ok(SynthResult::Realizable(t)),
        Verdict::Fail { input, .. } => Err(SynthError::Unverified(input.join(" "))),
    }
}

fn domain_safe(spec: &WeightedSpec) -> Option<WeightedSpec> {
    match make_domain_safe(spec) {
        DomainSafeResult::Safe(s) => Some(s),
        DomainSafeResult::NoBooleanRealizer => None,
    }
}

/// Any realizer with the right domain: the first output of every state of
/// the domain-safe spec.
pub fn synth_boolean(spec: &WeightedSpec) -> Result<SynthResult, SynthError> {
    let Some(safe) = domain_safe(spec) else {
        return Ok(SynthResult::NoBooleanRealizer);
    };
    let (arena, _) = spec_to_prefix_arena(&safe);
    let mut sigma = PositionalStrategy::new(arena.num_vertices());
    for q in 0..safe.num_states() {
        if let Some(&t) = safe.outgoing(q).first().filter(|_| safe.polarity(q) == Polarity::Output) {
            sigma.set(q, t);
        }
    }
    let t = extract_transducer(&safe, &sigma)?;
    verified(spec, t, &Objective::Boolean)
}

/// Threshold synthesis through the critical prefix game on the domain-safe
/// spec.
pub fn synth_threshold(spec: &WeightedSpec, cmp: Cmp, nu: &BigRational) -> Result<SynthResult, SynthError> {
    let Some(safe) = domain_safe(spec) else {
        return Ok(SynthResult::NoBooleanRealizer);
    };
    let (arena, _) = spec_to_prefix_arena(&safe);
    let obj = PrefixObjective {
        measure: spec.measure(),
        cmp,
        nu: nu.clone(),
        lambda: spec.discount().cloned(),
    };
    let solution = solve_prefix_threshold(&arena, &obj)?;
    log::debug!("{}", solution.trace);
    match (solution.winner, solution.strategy) {
        (Owner::Eve, Some(sigma)) => {
            let t = extract_transducer(&safe, &sigma)?;
            verified(spec, t, &Objective::Threshold { cmp, nu: nu.clone() })
        }
        _ => Ok(SynthResult::Unrealizable),
    }
}

/// Best-value synthesis by searching the positional output selectors of the
/// domain-safe spec: a best-value realizer can always be taken to be a
/// subautomaton.
pub fn synth_best_value(spec: &WeightedSpec) -> Result<SynthResult, SynthError> {
    // Avg and Sum agree on which outputs are best for a fixed input length.
    let search = match spec.measure() {
        Measure::Avg => spec.with_measure(Measure::Sum, None)?,
        _ => spec.clone(),
    };
    let Some(safe) = domain_safe(&search) else {
        return Ok(SynthResult::NoBooleanRealizer);
    };
    let choices: Vec<usize> = (0..safe.num_states())
        .filter(|&q| safe.polarity(q) == Polarity::Output && !safe.outgoing(q).is_empty())
        .collect();
    let mut digits = vec![0usize; choices.len()];
    let mut tried = 0usize;
    loop {
        let mut sigma = PositionalStrategy::new(safe.num_states() + 1);
        for (i, &q) in choices.iter().enumerate() {
            sigma.set(q, safe.outgoing(q)[digits[i]]);
        }
        tried += 1;
        let t = extract_transducer(&safe, &sigma)?.trimmed();
        if verify_realizer(&search, &t, &Objective::BestValue)?.is_pass() {
            log::debug!("best-value selector found after {tried} candidates");
            return verified(spec, t, &Objective::BestValue);
        }
        let mut i = choices.len();
        loop {
            if i == 0 {
                log::debug!("no best-value selector among {tried} candidates");
                return Ok(SynthResult::Unrealizable);
            }
            i -= 1;
            digits[i] += 1;
            if digits[i] < safe.outgoing(choices[i]).len() {
                break;
            }
            digits[i] = 0;
        }
    }
}

fn check_bound(r: &BigRational) -> Result<(), SynthError> {
    if r.is_negative() {
        Err(SynthError::NegativeBound(format_rational(r)))
    } else {
        Ok(())
    }
}
