use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::Poly;

/// A Laurent polynomial in `t = q^{1/D}` with rational coefficients.
///
/// Exponents are stored in units of `1/D`; the root order `D` lives on the
/// owning [`FieldElement`](super::FieldElement). Terms are sorted by exponent
/// and never carry a zero coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct LaurentElement {
    terms: Vec<(i64, BigRational)>,
}

impl LaurentElement {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(0, BigRational::one())
    }

    pub fn monomial(exp: i64, coef: BigRational) -> Self {
        if coef.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(exp, coef)] }
        }
    }

    /// Builds from arbitrary (exponent, coefficient) pairs, merging duplicates.
    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(terms: I) -> Self {
        let mut acc: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (e, c) in terms {
            *acc.entry(e).or_insert_with(BigRational::zero) += c;
        }
        Self {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    pub fn terms(&self) -> &[(i64, BigRational)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// True when the only exponent present is zero (or the element is zero).
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(e, _)| *e == 0)
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn leading(&self) -> Option<&(i64, BigRational)> {
        self.terms.last()
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + rhs.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < rhs.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &rhs.terms[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Less => {
                    out.push((*ea, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((*eb, cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((*ea, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&rhs.terms[j..]);
        Self { terms: out }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        if rhs.is_monomial() {
            let (e, c) = &rhs.terms[0];
            return self.scale_shift(c, *e);
        }
        if self.is_monomial() {
            let (e, c) = &self.terms[0];
            return rhs.scale_shift(c, *e);
        }
        let mut acc: BTreeMap<i64, BigRational> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                *acc.entry(ea + eb).or_insert_with(BigRational::zero) += ca * cb;
            }
        }
        Self {
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// `coef * t^shift * self`.
    pub fn scale_shift(&self, coef: &BigRational, shift: i64) -> Self {
        if coef.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e + shift, c * coef))
                .collect(),
        }
    }

    /// Substitutes `t -> t^{-1}`.
    pub fn bar(&self) -> Self {
        Self {
            terms: self.terms.iter().rev().map(|(e, c)| (-e, c.clone())).collect(),
        }
    }

    /// Multiplies every exponent by `factor` (change of root order).
    pub fn stretch(&self, factor: i64) -> Self {
        Self {
            terms: self.terms.iter().map(|(e, c)| (e * factor, c.clone())).collect(),
        }
    }

    /// Shift to a polynomial with nonzero constant term, then compress exponents by `step`.
    fn to_poly(&self, step: i64) -> Poly {
        let min = self.min_exp().unwrap_or(0);
        let deg = ((self.max_exp().unwrap_or(0) - min) / step) as usize;
        let mut coeffs = vec![BigRational::zero(); deg + 1];
        for (e, c) in &self.terms {
            coeffs[((e - min) / step) as usize] = c.clone();
        }
        Poly(coeffs)
    }

    fn from_poly(p: &Poly, step: i64, offset: i64) -> Self {
        Self {
            terms: p
                .0
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| (offset + k as i64 * step, c.clone()))
                .collect(),
        }
    }

    /// Cancels the polynomial gcd of a nonzero pair `(num, den)`.
    /// Returns the reduced pair with the same ratio.
    pub(crate) fn cancel_gcd(num: &Self, den: &Self) -> (Self, Self) {
        let (nmin, dmin) = (num.min_exp().unwrap_or(0), den.min_exp().unwrap_or(0));
        let mut step = 0i64;
        for (e, _) in &num.terms {
            step = step.gcd(&(e - nmin));
        }
        for (e, _) in &den.terms {
            step = step.gcd(&(e - dmin));
        }
        if step == 0 {
            // both monomials
            let one = BigRational::one();
            return (num.scale_shift(&one, -dmin), den.scale_shift(&one, -dmin));
        }
        let pn = num.to_poly(step);
        let pd = den.to_poly(step);
        let g = Poly::gcd(&pn, &pd);
        let (pn, pd) = if g.degree() > 0 {
            (pn.div_exact(&g), pd.div_exact(&g))
        } else {
            (pn, pd)
        };
        (
            Self::from_poly(&pn, step, nmin - dmin),
            Self::from_poly(&pd, step, 0),
        )
    }
}
