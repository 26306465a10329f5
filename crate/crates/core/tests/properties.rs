use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dpkit::density::{count_table, Mode};
use dpkit::harness::gen::{random_formula, random_indiscernible};
use dpkit::setfam::{sauer_bound, SetFamily};
use dpkit::theories::{ConstraintSet, Formula, Rel, Slot, TheoryId};
use dpkit::transforms::{alternation_count, alternation_search_oracle, switch_report, switchpoints_from_trace, trace};

fn family() -> impl Strategy<Value = SetFamily> {
    (1usize..=8).prop_flat_map(|g| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), g), 0..=12).prop_map(move |rows| {
            let sets: Vec<Vec<usize>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect())
                .collect();
            SetFamily::from_sets(g, &sets).unwrap()
        })
    })
}

fn order_delta(theory: TheoryId) -> Vec<Formula> {
    let mut d = vec![Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(0))];
    if theory == TheoryId::Ddlo {
        d.push(Formula::atom(Rel::Lt2, Slot::X(0), Slot::Y(0)));
    }
    d.push(Formula::atom(Rel::Eq, Slot::X(0), Slot::Y(0)));
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shatter_function_obeys_the_binomial_bound(f in family()) {
        let vc = f.vc_dimension();
        for e in f.shatter_profile().unwrap().values {
            let bound = if vc < 0 { 0 } else { sauer_bound(e.m as u64, vc as u64) };
            prop_assert!(e.pi_m as u128 <= bound);
        }
    }

    #[test]
    fn double_dual_keeps_the_dimension(f in family()) {
        prop_assert_eq!(f.dual().dual().vc_dimension(), f.vc_dimension());
    }

    #[test]
    fn family_json_round_trips(f in family()) {
        let back = SetFamily::from_json(&f.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.members(), f.members());
        prop_assert_eq!(back.ground_size(), f.ground_size());
    }

    #[test]
    fn formula_text_round_trips(seed in any::<u64>(), ddlo in any::<bool>()) {
        let theory = if ddlo { TheoryId::Ddlo } else { TheoryId::Dlo };
        let f = random_formula(&mut ChaCha8Rng::seed_from_u64(seed), theory, 2, 2);
        let back: Formula = f.to_string().parse().unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn counts_grow_with_nested_parameters(seed in 0u64..1000, ddlo in any::<bool>()) {
        let theory = if ddlo { TheoryId::Ddlo } else { TheoryId::Dlo };
        let sizes = [1, 2, 4, 7, 12];
        let exact = count_table(theory, &order_delta(theory), &sizes, seed, Mode::Oracle).unwrap();
        let pool = count_table(theory, &order_delta(theory), &sizes, seed, Mode::Pool { size: 200 }).unwrap();
        for w in exact.rows.windows(2) {
            prop_assert!(w[0].count <= w[1].count);
        }
        for (p, e) in pool.rows.iter().zip(&exact.rows) {
            prop_assert!(p.count <= e.count);
        }
    }

    #[test]
    fn switch_points_double_into_alternations(bits in prop::collection::vec(any::<bool>(), 2..24)) {
        let r = switch_report(&bits);
        prop_assert!(r.count <= alternation_count(&bits));
        let seq = dpkit::indisc::Sequence::singletons(&(0..bits.len()).collect::<Vec<_>>());
        let phi = Formula::atom(Rel::Lt1, Slot::X(0), Slot::Y(0));
        if let Some(out) = switchpoints_from_trace(&phi, &seq, &bits).unwrap() {
            prop_assert_eq!(out.alternations, 2 * out.selection.switches_used);
            prop_assert!(out.selection.switches_used <= r.count);
        } else {
            prop_assert_eq!(r.count, 0);
        }
    }

    #[test]
    fn oracle_alternation_dominates_realized_traces(seed in any::<u64>(), ddlo in any::<bool>()) {
        let theory = if ddlo { TheoryId::Ddlo } else { TheoryId::Dlo };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (s, seq) = random_indiscernible(&mut rng, theory, 6, 1).unwrap();
        let f = random_formula(&mut rng, theory, 1, 1);
        let best = alternation_search_oracle(&s, &f, &seq, &ConstraintSet::default()).unwrap().max;
        for c in 0..s.len() {
            let t = trace(&s, &f, &seq, &[c]).unwrap();
            prop_assert!(alternation_count(&t) <= best);
        }
    }
}
