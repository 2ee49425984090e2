use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use super::laurent::LaurentElement;
use super::QError;

/// Exponent of `q`: a rational number whose denominator divides the root order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(pub Ratio<i64>);

impl Exponent {
    pub fn new(num: i64, den: i64) -> Self {
        Exponent(Ratio::new(num, den))
    }

    pub fn integer(n: i64) -> Self {
        Exponent(Ratio::from_integer(n))
    }

    pub fn zero() -> Self {
        Self::integer(0)
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// Exponent in units of `1/order`, if representable.
    pub fn in_units(&self, order: u32) -> Option<i64> {
        let scaled = self.0 * Ratio::from_integer(order as i64);
        scaled.is_integer().then(|| scaled.to_integer())
    }
}

impl Add for Exponent {
    type Output = Exponent;
    fn add(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 + rhs.0)
    }
}

impl Sub for Exponent {
    type Output = Exponent;
    fn sub(self, rhs: Exponent) -> Exponent {
        Exponent(self.0 - rhs.0)
    }
}

impl Neg for Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(-self.0)
    }
}

impl Mul<i64> for Exponent {
    type Output = Exponent;
    fn mul(self, rhs: i64) -> Exponent {
        Exponent(self.0 * rhs)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An exact element of `Q(q^{1/D})`, kept as a reduced ratio of Laurent polynomials.
///
/// Canonical form: the denominator's top term is `1 * q^0`, and numerator and
/// denominator are coprime. Equality is comparison of canonical forms.
#[derive(Clone, Debug)]
pub struct FieldElement {
    num: LaurentElement,
    den: LaurentElement,
    order: u32,
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order || (self.is_constant() && other.is_constant()) {
            return self.num == other.num && self.den == other.den;
        }
        let l = (self.order as i64).lcm(&(other.order as i64));
        let sa = l / self.order as i64;
        let sb = l / other.order as i64;
        self.num.stretch(sa) == other.num.stretch(sb) && self.den.stretch(sa) == other.den.stretch(sb)
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    fn raw(num: LaurentElement, den: LaurentElement, order: u32) -> Self {
        Self { num, den, order }
    }

    /// Builds `num/den` and brings it to canonical form.
    pub fn from_parts(num: LaurentElement, den: LaurentElement, order: u32) -> Result<Self, QError> {
        if den.is_zero() {
            return Err(QError::DivisionByZero);
        }
        Ok(Self::canonical(num, den, order))
    }

    fn canonical(num: LaurentElement, den: LaurentElement, order: u32) -> Self {
        debug_assert!(!den.is_zero());
        if num.is_zero() {
            return Self::zero(order);
        }
        let (num, den) = if den.is_monomial() {
            (num, den)
        } else {
            LaurentElement::cancel_gcd(&num, &den)
        };
        let (e, c) = den.leading().cloned().expect("nonzero denominator");
        let inv = c.recip();
        Self::raw(num.scale_shift(&inv, -e), den.scale_shift(&inv, -e), order)
    }

    pub fn zero(order: u32) -> Self {
        Self::raw(LaurentElement::zero(), LaurentElement::one(), order)
    }

    pub fn one(order: u32) -> Self {
        Self::from_int(1, order)
    }

    pub fn from_int(n: i64, order: u32) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()), order)
    }

    pub fn from_rational(r: BigRational, order: u32) -> Self {
        Self::raw(LaurentElement::monomial(0, r), LaurentElement::one(), order)
    }

    pub fn from_laurent(l: LaurentElement, order: u32) -> Self {
        Self::raw(l, LaurentElement::one(), order)
    }

    /// `q^e`; fails if the exponent's denominator does not divide `order`.
    pub fn q_pow(e: Exponent, order: u32) -> Result<Self, QError> {
        let units = e.in_units(order).ok_or(QError::ExponentNotInRoot { exponent: e.0, order })?;
        Ok(Self::raw(
            LaurentElement::monomial(units, BigRational::one()),
            LaurentElement::one(),
            order,
        ))
    }

    /// `q^k` for integer `k`.
    pub fn q_int(k: i64, order: u32) -> Self {
        Self::q_pow(Exponent::integer(k), order).expect("integer exponents always representable")
    }

    /// `q^{1/D}` itself.
    pub fn root(order: u32) -> Self {
        Self::raw(LaurentElement::monomial(1, BigRational::one()), LaurentElement::one(), order)
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn numerator(&self) -> &LaurentElement {
        &self.num
    }

    pub fn denominator(&self) -> &LaurentElement {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True when the element is a rational constant (no `q` dependence).
    pub fn is_constant(&self) -> bool {
        self.den.is_one() && self.num.is_constant()
    }

    pub fn is_laurent(&self) -> bool {
        self.den.is_one()
    }

    /// The constant value, if the element is a rational constant.
    pub fn as_rational(&self) -> Option<BigRational> {
        if !self.is_constant() {
            return None;
        }
        Some(self.num.terms().first().map(|t| t.1.clone()).unwrap_or_else(BigRational::zero))
    }

    fn unify(&self, rhs: &Self) -> Result<u32, QError> {
        if self.order == rhs.order || rhs.is_constant() {
            Ok(self.order)
        } else if self.is_constant() {
            Ok(rhs.order)
        } else {
            Err(QError::RootOrderMismatch { left: self.order, right: rhs.order })
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, QError> {
        let order = self.unify(rhs)?;
        if rhs.is_zero() {
            return Ok(Self::raw(self.num.clone(), self.den.clone(), order));
        }
        if self.is_zero() {
            return Ok(Self::raw(rhs.num.clone(), rhs.den.clone(), order));
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Ok(Self::raw(self.num.add(&rhs.num), LaurentElement::one(), order));
        }
        if self.den == rhs.den {
            return Ok(Self::canonical(self.num.add(&rhs.num), self.den.clone(), order));
        }
        let num = self.num.mul(&rhs.den).add(&rhs.num.mul(&self.den));
        Ok(Self::canonical(num, self.den.mul(&rhs.den), order))
    }

    pub fn checked_sub(&self, rhs: &Self) -> Result<Self, QError> {
        self.checked_add(&rhs.neg_ref())
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, QError> {
        let order = self.unify(rhs)?;
        if self.is_zero() || rhs.is_zero() {
            return Ok(Self::zero(order));
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Ok(Self::raw(self.num.mul(&rhs.num), LaurentElement::one(), order));
        }
        // cross-cancel: both operands are already reduced
        let (n1, d2) = Self::reduce_pair(&self.num, &rhs.den);
        let (n2, d1) = Self::reduce_pair(&rhs.num, &self.den);
        Ok(Self::canonical(n1.mul(&n2), d1.mul(&d2), order))
    }

    fn reduce_pair(a: &LaurentElement, b: &LaurentElement) -> (LaurentElement, LaurentElement) {
        if b.is_monomial() || a.is_monomial() {
            (a.clone(), b.clone())
        } else {
            LaurentElement::cancel_gcd(a, b)
        }
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, QError> {
        self.checked_mul(&rhs.inv()?)
    }

    pub fn inv(&self) -> Result<Self, QError> {
        if self.is_zero() {
            return Err(QError::DivisionByZero);
        }
        Ok(Self::canonical(self.den.clone(), self.num.clone(), self.order))
    }

    fn neg_ref(&self) -> Self {
        Self::raw(self.num.neg(), self.den.clone(), self.order)
    }

    /// Integer power (negative powers invert).
    pub fn pow(&self, n: i64) -> Result<Self, QError> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let mut acc = Self::one(self.order);
        for _ in 0..n.unsigned_abs() {
            acc = acc.checked_mul(&base)?;
        }
        Ok(acc)
    }

    /// The field automorphism `q -> q^{-1}`.
    pub fn bar(&self) -> Self {
        if self.is_constant() {
            return self.clone();
        }
        Self::canonical(self.num.bar(), self.den.bar(), self.order)
    }

    pub fn is_bar_invariant(&self) -> bool {
        self.bar() == *self
    }

    /// Degree in `q` at infinity: `deg(num) - deg(den)`; `None` for zero.
    pub fn degree(&self) -> Option<Exponent> {
        let n = self.num.max_exp()?;
        let d = self.den.max_exp().unwrap_or(0);
        Some(Exponent(Ratio::new(n - d, self.order as i64)))
    }

    /// Valuation at `q = infinity` measured in `q^{-1}`: minus the degree.
    pub fn valuation_at_infinity(&self) -> Option<Exponent> {
        self.degree().map(|d| -d)
    }

    /// Coefficient of the top power of `q` in the expansion at infinity.
    pub fn leading_coefficient(&self) -> BigRational {
        match (self.num.leading(), self.den.leading()) {
            (Some((_, a)), Some((_, b))) => a / b,
            _ => BigRational::zero(),
        }
    }

    /// Whether the element, written in `q^{-1}`, has no pole at `q^{-1} = 0`.
    pub fn regular_at_infinity(&self) -> bool {
        self.degree().is_none_or(|d| d <= Exponent::zero())
    }

    /// Value at `q = infinity`; errors if the element has a pole there.
    pub fn residue_at_infinity(&self) -> Result<BigRational, QError> {
        match self.degree() {
            None => Ok(BigRational::zero()),
            Some(d) if d < Exponent::zero() => Ok(BigRational::zero()),
            Some(d) if d == Exponent::zero() => Ok(self.leading_coefficient()),
            Some(_) => Err(QError::NotRegularAtInfinity),
        }
    }

    /// Evaluation at `q = 1` when defined; used only for sanity checks.
    pub fn at_one(&self) -> Option<BigRational> {
        let sum = |l: &LaurentElement| l.terms().iter().fold(BigRational::zero(), |a, (_, c)| a + c);
        let d = sum(&self.den);
        (!d.is_zero()).then(|| sum(&self.num) / d)
    }

    /// JSON form `{num: [[expNum, expDen, coefNum, coefDen], ...], den: [...]}`,
    /// terms by ascending exponent.
    pub fn to_json(&self) -> Value {
        let side = |l: &LaurentElement| -> Value {
            Value::Array(
                l.terms()
                    .iter()
                    .map(|(e, c)| {
                        let r = Ratio::new(*e, self.order as i64);
                        json!([r.numer(), r.denom(), bigint_json(c.numer()), bigint_json(c.denom())])
                    })
                    .collect(),
            )
        };
        json!({ "num": side(&self.num), "den": side(&self.den) })
    }

    pub fn from_json(v: &Value, order: u32) -> Result<Self, QError> {
        let side = |key: &str| -> Result<LaurentElement, QError> {
            let arr = v.get(key).and_then(Value::as_array).ok_or(QError::Parse(key.into()))?;
            let mut terms = Vec::new();
            for t in arr {
                let t = t.as_array().filter(|t| t.len() == 4).ok_or(QError::Parse("term".into()))?;
                let en = t[0].as_i64().ok_or(QError::Parse("exponent".into()))?;
                let ed = t[1].as_i64().ok_or(QError::Parse("exponent".into()))?;
                let e = Exponent::new(en, ed)
                    .in_units(order)
                    .ok_or(QError::ExponentNotInRoot { exponent: Ratio::new(en, ed), order })?;
                let c = BigRational::new(json_bigint(&t[2])?, json_bigint(&t[3])?);
                terms.push((e, c));
            }
            Ok(LaurentElement::from_terms(terms))
        };
        Self::from_parts(side("num")?, side("den")?, order)
    }
}

fn bigint_json(n: &BigInt) -> Value {
    match n.to_i64() {
        Some(v) => json!(v),
        None => Value::String(n.to_string()),
    }
}

fn json_bigint(v: &Value) -> Result<BigInt, QError> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or(QError::Parse("coefficient".into())),
        Value::String(s) => s.parse().map_err(|_| QError::Parse("coefficient".into())),
        _ => Err(QError::Parse("coefficient".into())),
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&FieldElement> for FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: &FieldElement) -> FieldElement {
                (&self).$method(rhs)
            }
        }
        impl $trait<FieldElement> for &FieldElement {
            type Output = FieldElement;
            fn $method(self, rhs: FieldElement) -> FieldElement {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);
forward_binop!(Div, div, checked_div);

impl Neg for &FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

impl Neg for FieldElement {
    type Output = FieldElement;
    fn neg(self) -> FieldElement {
        self.neg_ref()
    }
}

fn fmt_laurent(l: &LaurentElement, order: u32, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if l.is_zero() {
        return write!(f, "0");
    }
    for (k, (e, c)) in l.terms().iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        let exp = Ratio::new(*e, order as i64);
        if exp.is_zero() {
            write!(f, "{abs}")?;
            continue;
        }
        if !abs.is_one() {
            write!(f, "{abs}*")?;
        }
        if exp.is_one() {
            write!(f, "q")?;
        } else if exp.is_integer() {
            write!(f, "q^{}", exp.to_integer())?;
        } else {
            write!(f, "q^({exp})")?;
        }
    }
    Ok(())
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return fmt_laurent(&self.num, self.order, f);
        }
        write!(f, "(")?;
        fmt_laurent(&self.num, self.order, f)?;
        write!(f, ")/(")?;
        fmt_laurent(&self.den, self.order, f)?;
        write!(f, ")")
    }
}
