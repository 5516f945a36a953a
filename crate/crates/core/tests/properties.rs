mod common;

use common::{rat, trial_divisors, trial_mu};
use eulerprod::identities::{self, LocalWeight};
use eulerprod::selberg;
use eulerprod::zeta::partial_zeta;
use eulerprod::{
    factorize, verify, verify_range, DinevaForm, Exact, Identity, SParam, VerifyOptions,
};
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;

#[test]
fn every_identity_holds_on_a_dense_range() {
    let opts = VerifyOptions::default();
    for identity in Identity::registered() {
        for s in -1..=3 {
            if matches!(identity, Identity::SigmaPartial) && s <= 1 {
                continue;
            }
            let reports = verify_range(&identity, 1, 3000, &SParam::Int(s), &opts, 2).unwrap();
            let bad: Vec<u64> = reports.iter().filter(|r| !r.passed).map(|r| r.n).collect();
            assert!(bad.is_empty(), "{identity} at s = {s} fails for {bad:?}");
        }
    }
}

#[test]
fn full_enumeration_matches_squarefree_enumeration() {
    let squarefree = VerifyOptions::default();
    let full = VerifyOptions {
        full_enumeration: true,
        ..squarefree
    };
    for identity in Identity::registered()
        .into_iter()
        .filter(|i| i.is_squarefree_supported())
    {
        let s = SParam::Int(2);
        for n in [1u64, 12, 360, 720, 1024, 30030, 65536] {
            let a = verify(&identity, n, &s, &squarefree).unwrap();
            let b = verify(&identity, n, &s, &full).unwrap();
            assert!(a.passed && b.passed, "{identity} at n = {n}");
            assert_eq!(a.lhs, b.lhs, "{identity} at n = {n}");
        }
    }
}

#[test]
fn sigma_partial_rejects_divergent_exponents() {
    for s in [SParam::Int(1), SParam::Int(0), SParam::Real(0.99)] {
        assert!(verify(&Identity::SigmaPartial, 6, &s, &VerifyOptions::default()).is_err());
    }
}

fn large_n() -> impl Strategy<Value = u64> {
    prop_oneof![
        1u64..=1_000_000,
        1u64..=u64::MAX / 2,
        // products of two large primes exercise the rho path
        (1_000_003u64..=1_000_100, 999_983u64..=999_999).prop_map(|(a, b)| a * b),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generalized_forms_agree_exactly(n in large_n(), s in -3i64..=5) {
        let f = factorize(n, None).unwrap();
        let s = SParam::Int(s);
        let sum: Exact = identities::generalized_dineva(&f, &s, DinevaForm::DivisorSum).unwrap();
        for form in DinevaForm::PRODUCTS {
            prop_assert_eq!(&sum, &identities::generalized_dineva::<Exact>(&f, &s, form).unwrap());
        }
    }

    #[test]
    fn generalized_forms_agree_in_floating_point(n in 1u64..=1_000_000_000, s in -2.0f64..4.0) {
        let f = factorize(n, None).unwrap();
        let s = SParam::Real(s);
        let sum: f64 = identities::generalized_dineva(&f, &s, DinevaForm::DivisorSum).unwrap();
        for form in DinevaForm::PRODUCTS {
            let v: f64 = identities::generalized_dineva(&f, &s, form).unwrap();
            prop_assert!((v - sum).abs() <= 1e-12 * sum.abs().max(1.0), "{:?}: {} vs {}", form, v, sum);
        }
    }

    #[test]
    fn construction_principle_for_any_seed(n in large_n(), seed in any::<u64>()) {
        let f = factorize(n, None).unwrap();
        let g = LocalWeight::seeded_rational(seed);
        let (sum, product): (Exact, Exact) = identities::identity_pair(&f, &g, &SParam::Int(0)).unwrap();
        prop_assert_eq!(sum, product);
    }

    #[test]
    fn mobius_sum_inverts_partial_zeta(n in large_n(), s in 1i64..=4) {
        let f = factorize(n, None).unwrap();
        let s = SParam::Int(s);
        let m: Exact = identities::mobius_divisor_sum(&f, &s).unwrap();
        let z: Exact = partial_zeta(&f, &s).unwrap();
        prop_assert!((m * z).is_one());
    }

    #[test]
    fn weights_are_bounded_and_normalized(n in 1u64..=1_000_000_000_000, s in 0i64..=3) {
        let f = factorize(n, None).unwrap();
        let s = SParam::Int(s);
        let w = selberg::weight_table::<Exact>(&f, &s).unwrap();
        prop_assert_eq!(w.lambda(1), Some(&Exact::one()));
        let j: Exact = identities::generalized_dineva(&f, &s, DinevaForm::Product).unwrap();
        prop_assert_eq!(&w.j_n, &j);
        for e in &w.entries {
            prop_assert!(e.lambda <= Exact::one() && e.lambda >= -Exact::one());
        }
    }

    #[test]
    fn dineva_against_oracle(n in 1u64..=50_000) {
        let f = factorize(n, None).unwrap();
        let oracle: Exact = trial_divisors(n)
            .into_iter()
            .filter(|&d| trial_mu(d) != 0)
            .map(|d| rat(1, (1..=d).filter(|&j| j.gcd(&d) == 1).count() as u64))
            .sum();
        prop_assert_eq!(identities::dineva(&f), oracle);
    }
}
