//! Cross-module properties that do not belong to any single unit-test
//! module: the p=7 scan band, multi-run determinism, and randomized
//! algebraic invariants via proptest.

use proptest::prelude::*;

use glk_core::local::{nice_density_oracle, scan_nice, ImageModel, LocalClass};
use glk_core::primes::crt_pair;
use glk_core::rep_source::{EllipticCurveSource, RepresentationSource};
use glk_core::residue::{Modulus, ResidueInt};
use glk_core::selmer::{Ledger, PlaceEntry};
use glk_core::sim::{run_simulation, SimConfig};

#[test]
fn scan_density_matches_oracle_at_p7() {
    let source = RepresentationSource::Curve(EllipticCurveSource::curve_37a1());
    let (records, summary) = scan_nice(&source, 7, 1, 1, 100_000).unwrap();
    let (num, den) = nice_density_oracle(7, 1, ImageModel::FullGl2);
    assert_eq!((num, den), (2, 9));
    let n = records.len() as f64;
    let p_hat = num as f64 / den as f64;
    let sigma = (n * p_hat * (1.0 - p_hat)).sqrt();
    let dev = (summary.nice_count as f64 - n * p_hat).abs();
    assert!(
        dev <= 3.0 * sigma,
        "p=7 nice count {} deviates {:.2} sigma from {}",
        summary.nice_count,
        dev / sigma,
        n * p_hat
    );
}

#[test]
fn simulation_is_byte_identical_over_five_runs() {
    let cfg = SimConfig::new(5, 2, 3, 1729);
    let reference = serde_json::to_string(&run_simulation(&cfg).unwrap().0).unwrap();
    for _ in 0..4 {
        let next = serde_json::to_string(&run_simulation(&cfg).unwrap().0).unwrap();
        assert_eq!(reference, next);
    }
}

proptest! {
    #[test]
    fn residue_reduction_is_ring_homomorphism(x in 0u128..4_000_000, y in 0u128..4_000_000, m2 in 1u32..4) {
        let md = Modulus::new(7, 4).unwrap();
        let a = ResidueInt::new(x, md);
        let b = ResidueInt::new(y, md);
        prop_assert_eq!((a + b).reduce(m2).unwrap(), a.reduce(m2).unwrap() + b.reduce(m2).unwrap());
        prop_assert_eq!((a * b).reduce(m2).unwrap(), a.reduce(m2).unwrap() * b.reduce(m2).unwrap());
    }

    #[test]
    fn crt_solution_is_unique_representative(a1 in 0i128..25, a2 in 0i128..49) {
        let x = crt_pair(a1, 25, a2, 49).unwrap();
        prop_assert!((0..25 * 49).contains(&x));
        prop_assert_eq!(x % 25, a1);
        prop_assert_eq!(x % 49, a2);
    }

    #[test]
    fn cup_invariant_is_bilinear(a in 0u64..5, b in 0u64..5, c in 0u64..5, d in 0u64..5, s in 1u64..5) {
        use glk_core::local::cup_invariant;
        let x = LocalClass::new(5, a, b, 0);
        let y = LocalClass::new(5, c, d, 1);
        let scaled_x = LocalClass::new(5, a * s % 5, b * s % 5, 0);
        let base = cup_invariant(&x, &y).unwrap();
        let scaled = cup_invariant(&scaled_x, &y).unwrap();
        let md = Modulus::new(5, 1).unwrap();
        prop_assert_eq!(scaled, base * ResidueInt::new(s as u128, md));
    }

    #[test]
    fn ledger_difference_additive_over_unions(
        entries in proptest::collection::vec((0u32..3, 0u32..3), 1..6),
        split in 0usize..6,
    ) {
        let build = |slice: &[(u32, u32)], offset: usize| {
            let mut ledger = Ledger::new();
            for (i, &(h0, h0d)) in slice.iter().enumerate() {
                let dim_l = (h0 + h0d).min(1);
                ledger
                    .push(PlaceEntry::tame(format!("v{}", offset + i), h0, h0d, dim_l).unwrap())
                    .unwrap();
            }
            ledger
        };
        let split = split.min(entries.len());
        let whole = build(&entries, 0);
        let left = build(&entries[..split], 0);
        let right = build(&entries[split..], split);
        prop_assert_eq!(
            whole.wiles_difference(),
            left.wiles_difference() + right.wiles_difference()
        );
    }

    #[test]
    fn charpoly_choice_respects_congruence(r_idx in 0usize..50, t in 0i128..25) {
        use glk_core::charpoly::{purity_window, TraceConstraint};
        let primes = glk_core::primes::prime_sieve(2000).unwrap();
        let candidates: Vec<u64> = primes.into_iter().filter(|&r| r >= 157).collect();
        let r = candidates[r_idx % candidates.len()];
        let choice = purity_window(r, 1, TraceConstraint::new(5, 2, t).unwrap()).unwrap();
        prop_assert!(choice.satisfies_constraints());
        prop_assert!(choice.a * choice.a < 4 * r as i128);
    }
}
