//! Exact arithmetic in `Q(q^{1/D})` with the bar involution `q -> q^{-1}`.

mod field;
mod laurent;
mod poly;

pub use field::{Exponent, FieldElement};
pub use laurent::LaurentElement;

use num_rational::{BigRational, Ratio};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum QError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("root order mismatch: q^(1/{left}) vs q^(1/{right})")]
    RootOrderMismatch { left: u32, right: u32 },
    #[error("exponent {exponent} is not a multiple of 1/{order}")]
    ExponentNotInRoot { exponent: Ratio<i64>, order: u32 },
    #[error("element has a pole at q = infinity")]
    NotRegularAtInfinity,
    #[error("malformed field element JSON: {0}")]
    Parse(String),
}

/// `[n]_{q^d} = (q^{dn} - q^{-dn}) / (q^d - q^{-d})`, as a Laurent polynomial.
pub fn quantum_integer(n: i64, d: u32, order: u32) -> FieldElement {
    let sign = n.signum();
    let n = n.abs();
    let step = d as i64 * order as i64;
    // q^{d(n-1)} + q^{d(n-3)} + ... + q^{-d(n-1)}
    let terms = (0..n).map(|k| (step * (n - 1 - 2 * k), BigRational::from_integer(sign.into())));
    FieldElement::from_laurent(LaurentElement::from_terms(terms), order)
}

/// `[n]_{q^d}!`
pub fn quantum_factorial(n: u32, d: u32, order: u32) -> FieldElement {
    (1..=n as i64).fold(FieldElement::one(order), |acc, k| acc * quantum_integer(k, d, order))
}

/// Quantum binomial `[n choose k]_{q^d}`; zero when `k > n`.
pub fn quantum_binomial(n: u32, k: u32, d: u32, order: u32) -> FieldElement {
    if k > n {
        return FieldElement::zero(order);
    }
    let num = quantum_factorial(n, d, order);
    let den = quantum_factorial(k, d, order) * quantum_factorial(n - k, d, order);
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    const D: u32 = 4;

    fn q(k: i64) -> FieldElement {
        FieldElement::q_int(k, D)
    }

    fn c(n: i64) -> FieldElement {
        FieldElement::from_int(n, D)
    }

    fn laurent(terms: &[(i64, i64)]) -> FieldElement {
        FieldElement::from_laurent(
            LaurentElement::from_terms(
                terms
                    .iter()
                    .map(|&(e, c)| (e * D as i64, BigRational::from_integer(BigInt::from(c)))),
            ),
            D,
        )
    }

    #[test]
    fn difference_of_squares() {
        let a = q(1) + q(-1);
        let b = q(1) - q(-1);
        assert_eq!(a * b, q(2) - q(-2));
    }

    #[test]
    fn half_powers_add() {
        let h = FieldElement::q_pow(Exponent::new(1, 2), D).unwrap();
        assert_eq!(&h * &h, q(1));
    }

    #[test]
    fn cancellation_matches_gcd_oracle() {
        // oracle: q^2 - 1 = (q - 1)(q + 1), so the ratio is q + 1
        let r = (q(2) - c(1)) / (q(1) - c(1));
        assert_eq!(r, q(1) + c(1));
        assert!(r.is_laurent());
    }

    #[test]
    fn bar_examples() {
        let e = FieldElement::q_pow(Exponent::new(3, 2), D).unwrap();
        assert_eq!(e.bar(), FieldElement::q_pow(Exponent::new(-3, 2), D).unwrap());
        assert!((q(1) + q(-1)).is_bar_invariant());
        let x = c(1) / (c(1) + q(1));
        let y = q(-1) / (c(1) + q(-1));
        assert_eq!(x.bar(), c(1) / (c(1) + q(-1)));
        // 1/(1+q) = q^{-1}/(1+q^{-1}) as field elements
        assert_eq!(x, y);
    }

    #[test]
    fn quantum_integer_examples() {
        assert_eq!(quantum_integer(2, 1, D), q(1) + q(-1));
        assert!(quantum_integer(0, 1, D).is_zero());
        assert_eq!(quantum_integer(-3, 2, D), -quantum_integer(3, 2, D));
        // oracle: expand [4][3]/([2][1]) by polynomial division
        let expected = laurent(&[(4, 1), (2, 1), (0, 2), (-2, 1), (-4, 1)]);
        assert_eq!(quantum_binomial(4, 2, 1, D), expected);
        let manual = quantum_integer(4, 1, D) * quantum_integer(3, 1, D) / quantum_integer(2, 1, D);
        assert_eq!(manual, expected);
    }

    #[test]
    fn regularity_at_infinity() {
        let a = c(1) / (q(1) + c(1));
        assert!(a.regular_at_infinity());
        assert_eq!(a.residue_at_infinity().unwrap(), BigRational::from_integer(0.into()));
        let b = q(1) + c(3) + q(-1);
        assert!(!b.regular_at_infinity());
        assert_eq!(b.residue_at_infinity(), Err(QError::NotRegularAtInfinity));
        // oracle: leading-coefficient ratio of (q^2 + 1)/(q^2 - q)
        let r = (q(2) + c(1)) / (q(2) - q(1));
        assert!(r.regular_at_infinity());
        assert_eq!(r.residue_at_infinity().unwrap(), BigRational::from_integer(1.into()));
    }

    #[test]
    fn errors_are_explicit() {
        assert_eq!(c(1).checked_div(&c(0)), Err(QError::DivisionByZero));
        let a = FieldElement::q_pow(Exponent::new(1, 2), 2).unwrap();
        let b = FieldElement::q_pow(Exponent::new(1, 3), 3).unwrap();
        assert!(matches!(a.checked_add(&b), Err(QError::RootOrderMismatch { .. })));
        assert!(FieldElement::q_pow(Exponent::new(1, 3), 4).is_err());
        // constants combine with any root order
        assert!(a.checked_mul(&FieldElement::from_int(3, 7)).is_ok());
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let x = (q(2) + FieldElement::q_pow(Exponent::new(-1, 2), D).unwrap()) / (q(1) - c(2));
        let v = x.to_json();
        let num = v["num"].as_array().unwrap();
        let exps: Vec<f64> = num
            .iter()
            .map(|t| t[0].as_i64().unwrap() as f64 / t[1].as_i64().unwrap() as f64)
            .collect();
        assert!(exps.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(FieldElement::from_json(&v, D).unwrap(), x);
    }

    fn arb_laurent() -> impl Strategy<Value = FieldElement> {
        prop::collection::vec((-3i64..=3, -4i64..=4), 0..4).prop_map(|ts| {
            FieldElement::from_laurent(
                LaurentElement::from_terms(
                    ts.into_iter()
                        .map(|(e, c)| (e * 2, BigRational::from_integer(c.into()))),
                ),
                D,
            )
        })
    }

    fn arb_field() -> impl Strategy<Value = FieldElement> {
        (arb_laurent(), arb_laurent()).prop_map(|(n, d)| if d.is_zero() { n } else { n / d })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn field_axioms(a in arb_field(), b in arb_field(), c in arb_field()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert!((&a - &a).is_zero());
            if !a.is_zero() {
                prop_assert!((&a / &a).is_one());
            }
        }

        #[test]
        fn bar_is_involutive_automorphism(a in arb_field(), b in arb_field()) {
            prop_assert_eq!((&a * &b).bar(), a.bar() * b.bar());
            prop_assert_eq!((&a + &b).bar(), a.bar() + b.bar());
            prop_assert_eq!(a.bar().bar(), a.clone());
        }

        #[test]
        fn canonicalization_idempotent(a in arb_field()) {
            let again = FieldElement::from_parts(a.numerator().clone(), a.denominator().clone(), D).unwrap();
            prop_assert_eq!(again.numerator(), a.numerator());
            prop_assert_eq!(again.denominator(), a.denominator());
        }

        #[test]
        fn quantum_integers_bar_invariant(n in -8i64..8, d in 1u32..4) {
            prop_assert!(quantum_integer(n, d, D).is_bar_invariant());
        }
    }
}
