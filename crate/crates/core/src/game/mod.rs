//! Arenas and exact game solvers.

mod arena;
mod attractor;
mod discounted;
mod format;
mod imperfect;
mod mean_payoff;

pub use arena::{Arena, Edge, EdgeId, Owner, PositionalStrategy, VertexId};
pub use attractor::{attractor, attractor_within, solve_safety};
pub use discounted::{discounted_values, evaluate_positional, solve_discounted_sum, DiscountedSolution};
pub use format::{
    arena_to_dot, emit_arena, emit_imperfect_arena, emit_strategy, imperfect_to_dot, parse_arena,
    parse_imperfect_arena,
};
pub use imperfect::{
    solve_imperfect_energy_capped, ActionId, Belief, EnergyOutcome, IEdge, ImperfectArena, ObsId,
    ObservationStrategy,
};
pub use mean_payoff::{energy_progress_measure, solve_mean_payoff, MeanPayoffSolution};

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

/// Threshold comparison `value cmp ν`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cmp {
    Ge,
    Gt,
}

impl Cmp {
    pub fn is_strict(self) -> bool {
        self == Cmp::Gt
    }

    pub fn holds(self, value: &BigRational, nu: &BigRational) -> bool {
        match self {
            Cmp::Ge => value >= nu,
            Cmp::Gt => value > nu,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("vertex {0} has no outgoing edge")]
    Deadlock(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("vertex {0} declared twice")]
    DuplicateVertex(String),
    #[error("cap {cap} is below the initial credit {credit}")]
    CapBelowCredit { cap: u64, credit: u64 },
    #[error("discount factor must satisfy 0 < lambda < 1")]
    InvalidDiscount,
    #[error("{0}")]
    Invalid(String),
}
