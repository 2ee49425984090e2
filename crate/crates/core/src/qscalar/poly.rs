//! Dense univariate polynomials over Q, used only for gcd-based cancellation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Coefficient vector, index = degree. No trailing zeros; the zero polynomial is empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Poly(pub Vec<BigRational>);

impl Poly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn monic(self) -> Self {
        match self.0.last() {
            None => self,
            Some(lc) if lc.is_one() => self,
            Some(lc) => {
                let inv = lc.recip();
                Poly(self.0.into_iter().map(|c| c * &inv).collect())
            }
        }
    }

    /// Primitive integer multiple with positive leading coefficient; keeps Euclid coefficients small.
    fn primitive(self) -> Self {
        if self.is_zero() {
            return self;
        }
        let mut den_lcm = BigInt::one();
        for c in &self.0 {
            den_lcm = num_integer::Integer::lcm(&den_lcm, c.denom());
        }
        let ints: Vec<BigInt> = self
            .0
            .iter()
            .map(|c| c.numer() * (&den_lcm / c.denom()))
            .collect();
        let mut g = BigInt::zero();
        for c in &ints {
            g = num_integer::Integer::gcd(&g, c);
        }
        if ints.last().is_some_and(|c| c < &BigInt::zero()) {
            g = -g;
        }
        Poly(
            ints.into_iter()
                .map(|c| BigRational::from_integer(c / &g))
                .collect(),
        )
    }

    /// Remainder of `self` by `rhs` (rhs nonzero).
    fn rem(mut self, rhs: &Poly) -> Poly {
        let dr = rhs.degree();
        let lc_inv = rhs.0[dr].recip();
        while !self.is_zero() && self.degree() >= dr {
            let shift = self.degree() - dr;
            let factor = self.0[self.degree()].clone() * &lc_inv;
            for (k, c) in rhs.0.iter().enumerate() {
                let t = c * &factor;
                self.0[k + shift] -= t;
            }
            self = self.trim();
        }
        self
    }

    /// Exact quotient (panics in debug if the division leaves a remainder).
    pub fn div_exact(&self, rhs: &Poly) -> Poly {
        let dr = rhs.degree();
        if self.is_zero() {
            return Poly(vec![]);
        }
        let mut rem = self.0.clone();
        let lc_inv = rhs.0[dr].recip();
        let dq = self.degree() - dr;
        let mut quo = vec![BigRational::zero(); dq + 1];
        for k in (0..=dq).rev() {
            let factor = rem[k + dr].clone() * &lc_inv;
            if factor.is_zero() {
                continue;
            }
            for (j, c) in rhs.0.iter().enumerate() {
                let t = c * &factor;
                rem[k + j] -= t;
            }
            quo[k] = factor;
        }
        debug_assert!(rem.iter().all(Zero::is_zero), "inexact polynomial division");
        Poly(quo).trim()
    }

    /// Monic gcd.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut x, mut y) = if a.degree() >= b.degree() {
            (a.clone().primitive(), b.clone().primitive())
        } else {
            (b.clone().primitive(), a.clone().primitive())
        };
        while !y.is_zero() {
            let r = x.rem(&y).primitive();
            x = y;
            y = r;
        }
        x.monic()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Poly {
        Poly(c.iter().map(|&x| BigRational::from_integer(x.into())).collect()).trim()
    }

    #[test]
    fn gcd_of_shared_linear_factor() {
        // (t - 1)(t + 1) and (t - 1)(t + 2)
        let g = Poly::gcd(&p(&[-1, 0, 1]), &p(&[-2, 1, 1]));
        assert_eq!(g, p(&[-1, 1]));
    }

    #[test]
    fn coprime_gcd_is_one() {
        assert_eq!(Poly::gcd(&p(&[1, 1]), &p(&[2, 1])), p(&[1]));
    }

    #[test]
    fn exact_division() {
        assert_eq!(p(&[-1, 0, 1]).div_exact(&p(&[-1, 1])), p(&[1, 1]));
    }
}
