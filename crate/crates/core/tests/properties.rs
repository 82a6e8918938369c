use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;

use diqc_core::diqc::{find_next_k_diqc, post_process_intervals, run_node, DiqcConfig};
use diqc_core::io::{parse_marked_set, SetFormat};
use diqc_core::miqae::{angles_from_measurement, chernoff_interval, quadrant, same_quadrant};
use diqc_core::oracle::{Indicator, OracleSpec, PartitionScheme};
use diqc_core::qsim::{good_probability, AnalyticSampler, NodeCircuit};

fn scheme() -> impl Strategy<Value = PartitionScheme> {
    prop_oneof![Just(PartitionScheme::Prefix), Just(PartitionScheme::Stride)]
}

fn marked_set(max_n: u32) -> impl Strategy<Value = (u32, BTreeSet<u64>)> {
    (2..=max_n).prop_flat_map(|n| (Just(n), prop::collection::btree_set(0..(1u64 << n), 0..=(1usize << n))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_partitions_the_set((n, set) in marked_set(8), k_frac in 0.0f64..1.0, scheme in scheme()) {
        let k = 1 + ((n - 1) as f64 * k_frac) as u32 % (n - 1);
        let oracle = OracleSpec::new(n, set.iter().copied()).unwrap();
        let subs = oracle.decompose(k, scheme).unwrap();
        prop_assert_eq!(subs.len(), 1usize << k);
        prop_assert_eq!(subs.iter().map(|s| s.t_local()).sum::<u64>(), oracle.count());
        let lifted: Vec<u64> = subs.iter().flat_map(|s| s.lifted().collect::<Vec<_>>()).collect();
        let rebuilt: BTreeSet<u64> = lifted.iter().copied().collect();
        prop_assert_eq!(rebuilt.len(), lifted.len());
        prop_assert_eq!(&rebuilt, &set);
    }

    #[test]
    fn chernoff_interval_is_clamped(a_hat in 0.0f64..=1.0, n in 1u64..100_000, alpha in 1e-9f64..0.9) {
        let (lo, hi) = chernoff_interval(a_hat, n, alpha).unwrap();
        prop_assert!(0.0 <= lo && lo <= a_hat && a_hat <= hi && hi <= 1.0);
    }

    #[test]
    fn measured_angles_reproduce_the_interval(a in 0.0f64..=1.0, b in 0.0f64..=1.0, r in 0i64..200, big_k in (0u64..200).prop_map(|h| 2 * h + 1)) {
        let (a_min, a_max) = if a <= b { (a, b) } else { (b, a) };
        let (lo, hi) = angles_from_measurement(a_min, a_max, r, big_k).unwrap();
        prop_assert!(lo <= hi);
        let kf = big_k as f64;
        prop_assert!(lo >= r as f64 * FRAC_PI_2 / kf - 1e-12);
        prop_assert!(hi <= (r + 1) as f64 * FRAC_PI_2 / kf + 1e-12);
        let ends = [(kf * lo).sin().powi(2), (kf * hi).sin().powi(2)];
        let expect = if r % 2 == 0 { [a_min, a_max] } else { [a_max, a_min] };
        prop_assert!((ends[0] - expect[0]).abs() < 1e-9 && (ends[1] - expect[1]).abs() < 1e-9);
    }

    #[test]
    fn next_k_respects_its_contract(lo in 0.0f64..FRAC_PI_2, w in 1e-6f64..0.5, q in 2u32..=3, k_cur in (0u64..50).prop_map(|h| 2 * h + 1), backtracked: bool) {
        let hi = (lo + w).min(FRAC_PI_2);
        prop_assume!(hi > lo);
        if let Some(next) = find_next_k_diqc(lo, hi, q, k_cur, backtracked).unwrap() {
            prop_assert_eq!(next.big_k % 2, 1);
            prop_assert!(next.big_k >= q as u64 * k_cur);
            prop_assert!(next.big_k as f64 <= PI / (2.0 * (hi - lo)) + 1.0);
            if next.r == 1.0 {
                prop_assert!(same_quadrant(next.big_k, lo, hi));
                prop_assert_eq!(next.quadrant, quadrant(next.big_k, lo));
            } else {
                prop_assert!(!backtracked);
                prop_assert!(next.r > 0.75 && next.r <= 1.0);
                let (rlo, rhi) = ((next.r.sqrt() * lo.sin()).asin(), (next.r.sqrt() * hi.sin()).asin());
                prop_assert!(same_quadrant(next.big_k, rlo, rhi));
                prop_assert_eq!(next.quadrant, quadrant(next.big_k, rlo));
            }
        }
    }

    #[test]
    fn post_processing_rounds_within_two_thirds(
        centres in prop::collection::vec(0.0f64..=1.0, 1..8),
        widths in prop::collection::vec(0.0f64..=1.0, 8),
        eps in 1e-4f64..0.01,
        m in 1u32..12,
    ) {
        let intervals: Vec<(f64, f64)> = centres
            .iter()
            .zip(&widths)
            .map(|(&c, &w)| ((c - 1.5 * eps * w).max(0.0), (c + 1.5 * eps * w).min(1.0)))
            .collect();
        let out = post_process_intervals(&intervals, eps, m).unwrap();
        let lo = intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
        let hi = intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out.amplitude >= lo - 1e-15 && out.amplitude <= hi + 1e-15);
        prop_assert!((out.t_prime as f64 - out.c_j).abs() <= 2.0 / 3.0);
        prop_assert!(out.a_low <= out.amplitude && out.amplitude <= out.a_high);
        prop_assert!(out.a_high - out.a_low <= 3.0 * eps + 1e-15);
    }

    #[test]
    fn good_probability_is_a_probability(a in 0.0f64..=1.0, r in 0.0f64..=1.0, k in 0u64..10_000) {
        let p = good_probability(a, r, k);
        prop_assert!((0.0..=1.0).contains(&p));
        let theta = (r * a).sqrt().asin();
        prop_assert!((p - ((2 * k + 1) as f64 * theta).sin().powi(2)).abs() < 1e-9);
    }

    #[test]
    fn decimal_sets_round_trip((n, set) in marked_set(10)) {
        let mut text = format!("# n = {n}\n");
        for x in &set {
            text += &format!("{x}\n");
        }
        let parsed = parse_marked_set(&text, SetFormat::Decimal).unwrap();
        prop_assert_eq!(parsed.marked.iter().copied().collect::<BTreeSet<u64>>(), set);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn statevector_matches_the_closed_form((n, set) in marked_set(5), r in 0.76f64..=1.0, power in 0u64..6) {
        let oracle = OracleSpec::new(n, set.iter().copied()).unwrap();
        let sub = &oracle.decompose(1, PartitionScheme::Prefix).unwrap()[0];
        let circuit = NodeCircuit::new(sub).unwrap();
        let simulated = circuit.prob11(r, power).unwrap();
        prop_assert!((simulated - good_probability(sub.amplitude(), r, power)).abs() < 1e-10);
    }

    #[test]
    fn node_traces_are_consistent(t in 0u64..=64, seed: u64, n0 in 1u64..64) {
        let config = DiqcConfig::new(0.005, 0.05, n0).unwrap();
        let mut sampler = AnalyticSampler::new(t as f64 / 64.0, seed).unwrap();
        let node = run_node(6, &config, &mut sampler, seed).unwrap();
        prop_assert_eq!(node.oracle_calls_physical, 2 * node.oracle_calls_nominal + node.total_shots);
        prop_assert_eq!(node.total_shots, node.rounds.iter().map(|r| r.shots).sum::<u64>());
        prop_assert!(node.rounds.iter().all(|r| r.shots <= r.shots_cap && r.hits <= r.shots));
        prop_assert!(node.rounds.windows(2).all(|w| w[1].big_k >= w[0].big_k));
        prop_assert!(node.final_high - node.final_low <= 3.0 * config.epsilon + 1e-15);
    }
}
