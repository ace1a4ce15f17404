mod common;

use common::{det_expansion, hj_value, q, twig_matrix};
use dualgraph::verify::enumerate_admissible_twigs;
use dualgraph::{DualGraph, Twig};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = Twig> {
    prop::collection::vec(2i64..=9, 1..=8).prop_map(Twig::new)
}

fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

#[test]
fn determinant_matches_expansion_exhaustively() {
    for t in enumerate_admissible_twigs(5, 5) {
        assert_eq!(t.determinant(), det_expansion(&twig_matrix(&t)), "{t}");
    }
}

#[test]
fn chain_graph_d_matches_twig() {
    for t in enumerate_admissible_twigs(5, 5) {
        let g = DualGraph::from_twig(1, &t);
        assert_eq!(g.graph_d(), t.determinant(), "{t}");
    }
}

#[test]
fn inductance_is_ratio_of_continuant_values() {
    for t in enumerate_admissible_twigs(4, 6) {
        assert_eq!(t.inductance().unwrap(), hj_value(&t).recip(), "{t}");
    }
}

#[test]
fn from_inductance_hits_every_small_fraction_once() {
    // Every p/q in (0,1) with q <= 30 comes from exactly one admissible twig.
    let mut seen = std::collections::BTreeSet::new();
    for den in 2..=30i64 {
        for num in 1..den {
            if num.gcd(&den) != 1 {
                continue;
            }
            let t = Twig::from_inductance(&q(num, den)).unwrap();
            assert!(t.is_admissible());
            assert_eq!(t.determinant(), big(den));
            assert_eq!(t.inductance().unwrap(), q(num, den));
            assert!(seen.insert(t));
        }
    }
}

#[test]
fn from_inductance_rejects_outside_unit_interval() {
    for x in [q(0, 1), q(1, 1), q(3, 2), q(-1, 2)] {
        assert!(Twig::from_inductance(&x).is_err(), "{x}");
    }
}

proptest! {
    #[test]
    fn transposal_keeps_determinant(t in admissible()) {
        prop_assert_eq!(t.transposal().determinant(), t.determinant());
    }

    #[test]
    fn fujita_identities(t in admissible()) {
        let d = t.determinant();
        let over = t.overline().determinant();
        let under = t.underline().determinant();
        let inner = t.inner_determinant();
        prop_assert_eq!(&over * &under - &d * &inner, BigInt::one());
        prop_assert_eq!(over.gcd(&d), BigInt::one());
        prop_assert!(d > over && over >= BigInt::one());
    }

    #[test]
    fn inductance_round_trip(t in admissible()) {
        let e = t.inductance().unwrap();
        prop_assert_eq!(Twig::from_inductance(&e).unwrap(), t);
    }

    #[test]
    fn adjoint_is_an_involution_with_complementary_inductance(t in admissible()) {
        let star = t.adjoint().unwrap();
        prop_assert!(star.is_admissible());
        prop_assert_eq!(star.determinant(), t.determinant());
        prop_assert_eq!(star.adjoint().unwrap(), t.clone());
        let e_star = star.inductance().unwrap();
        let e_trans = t.transposal().inductance().unwrap();
        prop_assert_eq!(e_star + e_trans, BigRational::one());
    }

    #[test]
    fn adjoint_of_transposal_is_transposal_of_adjoint(t in admissible()) {
        prop_assert_eq!(
            t.transposal().adjoint().unwrap(),
            t.adjoint().unwrap().transposal()
        );
    }

    #[test]
    fn determinant_recurrence_on_append(t in admissible(), a in 2i64..=9) {
        let mut w = t.weights().to_vec();
        w.push(a);
        let longer = Twig::new(w);
        let d_prev = if t.len() == 1 {
            BigInt::one()
        } else {
            Twig::new(t.weights()[..t.len() - 1].to_vec()).determinant()
        };
        prop_assert_eq!(longer.determinant(), big(a) * t.determinant() - d_prev);
    }
}
