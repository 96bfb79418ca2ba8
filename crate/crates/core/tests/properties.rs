// SPDX-License-Identifier: Apache-2.0

mod common;

use cswp_core::analysis::{
    brute_force_partitioned, brute_force_sequential, coarse_upper_bound, knownbits_trace,
    knownbits_upper_bound, maxsat_oracle, DEFAULT_BUDGET,
};
use cswp_core::energy::{decompose, fit_hamming_model, gen_synthetic_grid, GridSpec, Stage};
use cswp_core::reductions::{
    embed_assignment, reduce_maxsat2, reduce_sat_gap, GapFactor, Literal, MaxSat2Instance,
};
use cswp_core::{
    evaluate_switching, execute, hamming_distance, parse_program, serialize_program, BitVector,
    Mnemonic,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_assignment, random_program, random_sat, ProgramShape};

fn seeded_program(seed: u64) -> (cswp_core::Program, cswp_core::Assignment) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = random_program(&mut rng, &ProgramShape::default());
    let a = random_assignment(&mut rng, &p);
    (p, a)
}

fn literal() -> impl Strategy<Value = Literal> {
    (1usize..=4, any::<bool>()).prop_map(|(var, negated)| Literal { var, negated })
}

fn maxsat2() -> impl Strategy<Value = MaxSat2Instance> {
    prop::collection::vec(prop::collection::vec(literal(), 1..=2), 0..=6)
        .prop_map(|clauses| MaxSat2Instance::new(4, clauses).unwrap())
}

#[test]
fn hamming_axioms_exhaustive_w8() {
    let v = |x: u64| BitVector::new(x, 8).unwrap();
    for a in 0..256 {
        for b in 0..256 {
            let ab = hamming_distance(v(a), v(b)).unwrap();
            assert_eq!(ab, hamming_distance(v(b), v(a)).unwrap());
            assert_eq!(ab == 0, a == b);
            assert!(ab <= 8);
        }
    }
    for a in (0..256).step_by(3) {
        for b in (0..256).step_by(5) {
            for c in 0..256 {
                let d = |x, y| hamming_distance(v(x), v(y)).unwrap();
                assert!(d(a, c) <= d(a, b) + d(b, c));
            }
        }
    }
}

proptest! {
    #[test]
    fn hamming_triangle_any_width(w in 1u32..=64, a: u64, b: u64, c: u64) {
        let v = |x: u64| BitVector::wrapping(x, w).unwrap();
        let d = |x, y| hamming_distance(v(x), v(y)).unwrap();
        prop_assert!(d(a, c) <= d(a, b) + d(b, c));
        prop_assert_eq!(d(a, b), d(b, a));
        prop_assert!(d(a, b) <= w);
    }

    #[test]
    fn execute_is_deterministic(seed: u64) {
        let (p, a) = seeded_program(seed);
        let first = execute(&p, &a).unwrap();
        prop_assert_eq!(&first, &execute(&p, &a).unwrap());
        prop_assert_eq!(first.outputs.len(), p.len());
    }

    #[test]
    fn switching_total_is_bounded(seed: u64) {
        let (p, a) = seeded_program(seed);
        let s = evaluate_switching(&p, &a).unwrap();
        prop_assert_eq!(s.transitions.len(), p.len() - 1);
        prop_assert!(s.total <= coarse_upper_bound(&p));
    }

    #[test]
    fn text_round_trip(seed: u64) {
        let (p, _) = seeded_program(seed);
        let text = serialize_program(&p);
        prop_assert_eq!(parse_program(&text).unwrap(), p);
    }

    #[test]
    fn knownbits_sound(seed: u64) {
        let (p, a) = seeded_program(seed);
        let trace = execute(&p, &a).unwrap();
        for (kb, out) in knownbits_trace(&p).unwrap().iter().zip(&trace.outputs) {
            prop_assert!(kb.contains(out.value()), "{} not in {}", out, kb);
        }
    }

    #[test]
    fn bounds_are_ordered(seed: u64) {
        let (p, _) = seeded_program(seed);
        let exact = brute_force_sequential(&p, DEFAULT_BUDGET).unwrap().max_switching;
        let kb = knownbits_upper_bound(&p).unwrap();
        prop_assert!(exact <= kb);
        prop_assert!(kb <= coarse_upper_bound(&p));
    }

    #[test]
    fn partitioning_does_not_change_result(seed: u64, parts in 1u64..16) {
        let (p, _) = seeded_program(seed);
        prop_assert_eq!(
            brute_force_partitioned(&p, DEFAULT_BUDGET, parts).unwrap(),
            brute_force_sequential(&p, DEFAULT_BUDGET).unwrap()
        );
    }

    #[test]
    fn maxsat_reduction_identity(inst in maxsat2(), width in 1u32..=8, bits in 0u8..16) {
        let red = reduce_maxsat2(&inst, width).unwrap();
        let bools: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
        let a = embed_assignment(&red, &bools).unwrap();
        let got = evaluate_switching(&red.program, &a).unwrap().total;
        prop_assert_eq!(got, red.predicted_switching(inst.satisfied_count(&bools)));
        prop_assert_eq!(parse_program(&red.to_text()).unwrap(), red.program.clone());

        let best = brute_force_sequential(&red.program, DEFAULT_BUDGET).unwrap();
        let oracle = maxsat_oracle(&inst, DEFAULT_BUDGET).unwrap();
        prop_assert_eq!(best.max_switching, red.predicted_switching(oracle.satisfied));
    }

    #[test]
    fn gap_program_round_trips(seed: u64, width in 1u32..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_sat(&mut rng, 3, 6, 3);
        let gap = reduce_sat_gap(&inst, width, GapFactor::ONE).unwrap();
        prop_assert_eq!(parse_program(&gap.to_text()).unwrap(), gap.program);
    }

    #[test]
    fn noiseless_fit_is_exact(
        base in 0.0f64..100.0,
        c_in in 0.1f64..5.0,
        c_out in 0.1f64..10.0,
        op in prop::sample::select(vec![Mnemonic::Add, Mnemonic::Sub, Mnemonic::Xor]),
        width in 2u32..=5,
    ) {
        let spec = GridSpec { base_mw: base, c_in_mw: c_in, c_out_mw: c_out, ..GridSpec::new(op, width) };
        let f = fit_hamming_model(&gen_synthetic_grid(&spec).unwrap()).unwrap();
        prop_assert!((f.base_mw - base).abs() < 1e-9);
        prop_assert!((f.c_in_mw - c_in).abs() < 1e-9);
        prop_assert!((f.c_out_mw - c_out).abs() < 1e-9);
    }

    #[test]
    fn decomposition_shrinks_range(seed in 0u64..1000, sigma in 0.1f64..2.0) {
        let spec = GridSpec { base_mw: 50.0, sigma_mw: sigma, seed, ..GridSpec::new(Mnemonic::Add, 4) };
        let grid = gen_synthetic_grid(&spec).unwrap();
        let fit = fit_hamming_model(&grid).unwrap();
        let range = |v: &[f64]| {
            v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
        };
        let stages = decompose(&grid, &fit);
        let get = |s: Stage| range(&stages.iter().find(|(st, _)| *st == s).unwrap().1);
        prop_assert!(get(Stage::MinusOut) < get(Stage::Raw));
        prop_assert!(get(Stage::Residual) < get(Stage::MinusOut));
    }
}
