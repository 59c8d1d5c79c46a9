//! Synthesis of finite-state transducers (Mealy machines) from weighted
//! specifications over finite words.
//!
//! A specification is a deterministic weighted automaton that alternates
//! between reading an input symbol and an output symbol, equipped with a
//! `Sum`, `Avg` or `Dsum` measure. The crate decides threshold, best-value
//! and approximate realizability by building and solving *critical prefix
//! games*: infinite-duration games whose quantitative condition is only
//! checked at prefixes ending in designated critical vertices.
//!
//! Layout:
//!
//! * [`spec`]: weighted specifications, transducers, values and text formats.
//! * [`domain`]: domain automata, domain-safety, the two-run safety game.
//! * [`game`]: arenas and exact solvers (attractors, safety, mean-payoff,
//!   discounted-sum, capped imperfect-information energy).
//! * [`dsum`]: relative gaps and the discounted-sum path checks.
//! * [`prefix`]: critical prefix objectives and their reductions.
//! * [`synth`]: synthesis pipelines, realizer verification and generators.

pub mod domain;
pub mod dsum;
pub mod game;
pub mod prefix;
pub mod rational;
pub mod spec;
pub mod synth;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;

pub use game::{Arena, ImperfectArena, Owner, PositionalStrategy};
pub use prefix::{Cmp, PrefixObjective};
pub use spec::{Measure, MealyTransducer, ValueResult, WeightedSpec};
pub use synth::{Objective, SynthResult, Verdict};
