//! Domain-safety transformation on random specs.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{all_runs_accept, all_words, in_domain, random_spec};
use wsynth_core::domain::{
    domain_membership, domains_equal, is_domain_safe, make_domain_safe, DomainSafeResult, TwoRunSafetyGame,
};
use wsynth_core::spec::emit_wfa;
use wsynth_core::Measure;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn domain_safe_result(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_spec(&mut rng, Measure::Sum);
        let DomainSafeResult::Safe(d) = make_domain_safe(&s) else { return Ok(()) };
        prop_assert!(is_domain_safe(&d));
        prop_assert!(domains_equal(&s, &d));
        for len in 0..=6 {
            for u in all_words(2, len) {
                let dom = in_domain(&s, &u);
                prop_assert_eq!(dom, in_domain(&d, &u));
                prop_assert_eq!(dom, domain_membership(&s, &u));
                if dom {
                    prop_assert!(all_runs_accept(&d, d.initial(), &u), "run on {:?} misses a final state", u);
                }
            }
        }
    }

    #[test]
    fn transformation_is_idempotent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_spec(&mut rng, Measure::Sum);
        let DomainSafeResult::Safe(d) = make_domain_safe(&s) else { return Ok(()) };
        let DomainSafeResult::Safe(dd) = make_domain_safe(&d) else {
            return Err(TestCaseError::fail("second pass lost the Boolean realizer"));
        };
        prop_assert_eq!(emit_wfa(&dd), emit_wfa(&d));
    }

    #[test]
    fn two_run_game_is_quadratic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_spec(&mut rng, Measure::Sum);
        let game = TwoRunSafetyGame::build(&s);
        let q = s.num_states();
        prop_assert!(game.arena.num_vertices() <= 2 * q * q);
    }
}
