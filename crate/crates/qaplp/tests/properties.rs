use proptest::prelude::*;

use qaplp::indexer::VariableSpace;
use qaplp::instance::{instance_header, CostMode, Matching, QapInstance};
use qaplp::model::{build_model, embed, BuildOptions};
use qaplp::rng::Pcg64;

fn arb_mode() -> impl Strategy<Value = CostMode> {
    prop_oneof![Just(CostMode::NoOpcost), Just(CostMode::WithOpcost)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_deterministic(n in 2usize..=6, mode in arb_mode(), seed in any::<u64>(), sym in any::<bool>()) {
        let a = QapInstance::generate_random(n, mode, seed, sym).unwrap();
        let b = QapInstance::generate_random(n, mode, seed, sym).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn instance_text_round_trips(n in 2usize..=6, mode in arb_mode(), seed in any::<u64>()) {
        let inst = QapInstance::generate_random(n, mode, seed, false).unwrap();
        let header = instance_header("roundtrip", mode, seed, false);
        let text = inst.render(&header);
        let (back, header_back) = QapInstance::parse(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(header_back, header);
    }

    #[test]
    fn embedded_matchings_stay_feasible(n in 3usize..=5, mode in arb_mode(), seed in any::<u64>(), cuts in any::<bool>()) {
        let inst = QapInstance::generate_random(n, mode, seed, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let model = build_model(&inst, &space, BuildOptions { valid_cuts: cuts }).unwrap();
        let mut rng = Pcg64::seed_from_u64(seed);
        let all: Vec<Matching> = Matching::enumerate(n).collect();
        let m = &all[rng.next_below(all.len() as u64) as usize];
        let emb = embed(&space, m).unwrap();
        prop_assert_eq!(model.max_integer_residual(&emb.to_mask()), 0);
        let lifted = model.objective_value(&emb.to_dense()).unwrap();
        prop_assert_eq!(lifted, inst.evaluate(m).unwrap());
    }

    #[test]
    fn brute_force_agrees_with_full_scan(seed in any::<u64>(), mode in arb_mode()) {
        let inst = QapInstance::generate_random(4, mode, seed, false).unwrap();
        let (best, value) = inst.brute_force_optimum().unwrap();
        prop_assert_eq!(inst.evaluate(&best).unwrap(), value);
        for m in Matching::enumerate(4) {
            prop_assert!(inst.evaluate(&m).unwrap() >= value - 1e-9);
        }
    }

    #[test]
    fn mps_round_trip_is_exact(n in 2usize..=4, seed in any::<u64>(), cuts in any::<bool>()) {
        let inst = QapInstance::generate_random(n, CostMode::WithOpcost, seed, false).unwrap();
        let space = VariableSpace::build(n).unwrap();
        let model = build_model(&inst, &space, BuildOptions { valid_cuts: cuts }).unwrap();
        let text = qaplp::mps::write_mps(&model);
        let back = qaplp::mps::parse_mps(&text).unwrap();
        prop_assert_eq!(back.num_rows(), model.num_rows());
        prop_assert_eq!(back.num_cols(), model.num_cols());
        // identical sparse structure, costs, and right-hand sides
        prop_assert_eq!(qaplp::mps::write_mps(&back), text);
    }

    #[test]
    fn rng_streams_are_reproducible(seed in any::<u64>()) {
        let mut a = Pcg64::seed_from_u64(seed);
        let mut b = Pcg64::seed_from_u64(seed);
        for _ in 0..64 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        // bounded draws stay in range
        for bound in [1u64, 2, 7, 24, 1 << 40] {
            prop_assert!(a.next_below(bound) < bound);
        }
    }

    #[test]
    fn uniform_instances_make_all_matchings_tie(n in 2usize..=5, f in 1i64..=80, d in 1i64..=80) {
        let inst = QapInstance::make_uniform(n, f as f64, d as f64).unwrap();
        let first = inst.evaluate(&Matching::identity(n)).unwrap();
        for m in Matching::enumerate(n) {
            prop_assert_eq!(inst.evaluate(&m).unwrap(), first);
        }
    }
}
