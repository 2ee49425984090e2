//! Cartan data, the weight lattice, the invariant form, and the longest Weyl element.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::qscalar::Exponent;

type Q = Ratio<i64>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum CartanError {
    #[error("unknown Cartan type label `{0}`")]
    UnknownType(String),
    #[error("not a generalized Cartan matrix: {0}")]
    NotGcm(String),
    #[error("Cartan matrix is not symmetrizable")]
    NotSymmetrizable,
    #[error("operation requires a finite-type Cartan datum")]
    NotFiniteType,
    #[error("Cartan matrix is singular; the invariant form on weights is not determined")]
    Singular,
}

/// An integral weight in fundamental-weight coordinates: `coords[i] = <H_i, weight>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Weight(pub Vec<i64>);

impl Weight {
    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut v = vec![0; rank];
        v[i] = 1;
        Weight(v)
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&c| c >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|c| c * k).collect())
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A symmetrizable generalized Cartan matrix with its derived data.
///
/// Nodes are 0-indexed internally; JSON and the CLI use 1-indexed nodes.
#[derive(Clone, Debug)]
pub struct CartanDatum {
    label: String,
    matrix: Vec<Vec<i64>>,
    symmetrizers: Vec<i64>,
    finite: bool,
    root_order: u32,
    /// `(omega_i, omega_j)`, present when the matrix is invertible.
    gram: Option<Vec<Vec<Q>>>,
    inverse: Option<Vec<Vec<Q>>>,
    theta: Option<Vec<usize>>,
    w0_word: Option<Vec<usize>>,
}

impl PartialEq for CartanDatum {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl Eq for CartanDatum {}

impl CartanDatum {
    /// Builds a datum from a type label such as `A2`, `B_2`, `G2`.
    pub fn from_type(label: &str) -> Result<Self, CartanError> {
        let clean: String = label.chars().filter(|c| *c != '_').collect();
        let unknown = || CartanError::UnknownType(label.to_string());
        let mut chars = clean.chars();
        let family = chars.next().ok_or_else(unknown)?.to_ascii_uppercase();
        let n: usize = chars.as_str().parse().map_err(|_| unknown())?;
        let mut a = vec![vec![0i64; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 2;
        }
        let chain = |a: &mut Vec<Vec<i64>>, upto: usize| {
            for i in 0..upto.saturating_sub(1) {
                a[i][i + 1] = -1;
                a[i + 1][i] = -1;
            }
        };
        match family {
            'A' if n >= 1 => chain(&mut a, n),
            'B' if n >= 2 => {
                chain(&mut a, n);
                // node n-1 long, node n short
                a[n - 1][n - 2] = -2;
            }
            'C' if n >= 2 => {
                chain(&mut a, n);
                a[n - 2][n - 1] = -2;
            }
            'D' if n >= 4 => {
                chain(&mut a, n - 1);
                a[n - 3][n - 1] = -1;
                a[n - 1][n - 3] = -1;
            }
            'G' if n == 2 => {
                a[0][1] = -3;
                a[1][0] = -1;
            }
            _ => return Err(unknown()),
        }
        Self::from_matrix(&format!("{family}{n}"), a)
    }

    /// Validates a raw generalized Cartan matrix, `matrix[i][j] = <H_i, alpha_j>`.
    pub fn from_matrix(label: &str, matrix: Vec<Vec<i64>>) -> Result<Self, CartanError> {
        let n = matrix.len();
        if n == 0 || matrix.iter().any(|r| r.len() != n) {
            return Err(CartanError::NotGcm("matrix must be square and nonempty".into()));
        }
        for i in 0..n {
            if matrix[i][i] != 2 {
                return Err(CartanError::NotGcm(format!("a_{i}{i} != 2")));
            }
            for j in 0..n {
                if i != j {
                    if matrix[i][j] > 0 {
                        return Err(CartanError::NotGcm(format!("a_{i}{j} > 0")));
                    }
                    if (matrix[i][j] == 0) != (matrix[j][i] == 0) {
                        return Err(CartanError::NotGcm(format!("a_{i}{j} = 0 but a_{j}{i} != 0")));
                    }
                }
            }
        }
        let symmetrizers = symmetrize(&matrix)?;
        let sym: Vec<Vec<Q>> = (0..n)
            .map(|i| (0..n).map(|j| Q::from_integer(symmetrizers[i] * matrix[i][j])).collect())
            .collect();
        let finite = (1..=n).all(|k| {
            let minor: Vec<Vec<Q>> = sym[..k].iter().map(|r| r[..k].to_vec()).collect();
            determinant(minor) > Q::zero()
        });
        let qmatrix: Vec<Vec<Q>> = matrix
            .iter()
            .map(|r| r.iter().map(|&x| Q::from_integer(x)).collect())
            .collect();
        let inverse = invert(qmatrix);
        let gram = inverse.as_ref().map(|inv| {
            (0..n)
                .map(|i| (0..n).map(|j| Q::from_integer(symmetrizers[j]) * inv[j][i]).collect())
                .collect::<Vec<Vec<Q>>>()
        });
        let root_order = match &gram {
            Some(g) => 2 * g.iter().flatten().fold(1i64, |acc, x| acc.lcm(x.denom())) as u32,
            None => 2,
        };
        let mut datum = CartanDatum {
            label: label.to_string(),
            matrix,
            symmetrizers,
            finite,
            root_order,
            gram,
            inverse,
            theta: None,
            w0_word: None,
        };
        if finite {
            let word = datum.compute_w0_word();
            datum.w0_word = Some(word);
            let theta = (0..n)
                .map(|i| {
                    let img = datum.apply_word(datum.w0_word.as_ref().unwrap(), &datum.simple_root(i));
                    (0..n)
                        .find(|&j| img == -&datum.simple_root(j))
                        .expect("w0 maps simple roots to negative simple roots")
                })
                .collect();
            datum.theta = Some(theta);
        }
        Ok(datum)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn rank(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    /// `a_ij = <H_i, alpha_j>`.
    pub fn a(&self, i: usize, j: usize) -> i64 {
        self.matrix[i][j]
    }

    /// `d_i = (alpha_i, alpha_i)/2`.
    pub fn d(&self, i: usize) -> i64 {
        self.symmetrizers[i]
    }

    pub fn symmetrizers(&self) -> &[i64] {
        &self.symmetrizers
    }

    pub fn is_finite(&self) -> bool {
        self.finite
    }

    /// The order `D` of the adjoined root `q^{1/D}`.
    pub fn root_order(&self) -> u32 {
        self.root_order
    }

    /// `alpha_j` as a weight: coordinates `(a_ij)_i`.
    pub fn simple_root(&self, j: usize) -> Weight {
        Weight((0..self.rank()).map(|i| self.matrix[i][j]).collect())
    }

    /// `<H_i, lambda>`.
    pub fn pairing(&self, i: usize, w: &Weight) -> i64 {
        w.0[i]
    }

    /// `rho = sum of fundamental weights`; only produced in finite type.
    pub fn rho(&self) -> Result<Weight, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        Ok(Weight(vec![1; self.rank()]))
    }

    /// The invariant form `(mu, nu)`.
    pub fn form(&self, mu: &Weight, nu: &Weight) -> Result<Exponent, CartanError> {
        let g = self.gram.as_ref().ok_or(CartanError::Singular)?;
        let mut acc = Q::zero();
        for (i, &a) in mu.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in nu.0.iter().enumerate() {
                if b != 0 {
                    acc += g[i][j] * Q::from_integer(a * b);
                }
            }
        }
        Ok(Exponent(acc))
    }

    /// `(mu, mu)/2 + (mu, rho)`: the exponent of `J` on the `mu` weight space.
    pub fn j_exponent(&self, mu: &Weight) -> Result<Exponent, CartanError> {
        let rho = self.rho()?;
        let mm = self.form(mu, mu)?;
        Ok(Exponent(mm.0 / Q::from_integer(2)) + self.form(mu, &rho)?)
    }

    /// `-(mu, mu)/2 + (mu, rho)`: the eigenexponent of `Theta` on global-basis elements of weight `mu`.
    pub fn theta_exponent(&self, mu: &Weight) -> Result<Exponent, CartanError> {
        let rho = self.rho()?;
        let mm = self.form(mu, mu)?;
        Ok(Exponent(-mm.0 / Q::from_integer(2)) + self.form(mu, &rho)?)
    }

    /// Expansion of a weight over the simple roots (rational coefficients).
    pub fn root_coordinates(&self, w: &Weight) -> Result<Vec<Q>, CartanError> {
        let inv = self.inverse.as_ref().ok_or(CartanError::Singular)?;
        Ok((0..self.rank())
            .map(|j| {
                (0..self.rank()).fold(Q::zero(), |acc, i| acc + inv[j][i] * Q::from_integer(w.0[i]))
            })
            .collect())
    }

    /// `mu <= nu` in the dominance order: `nu - mu` is a nonnegative integral
    /// combination of simple roots.
    pub fn dominance_leq(&self, mu: &Weight, nu: &Weight) -> bool {
        match self.root_coordinates(&(nu - mu)) {
            Ok(c) => c.iter().all(|x| x.is_integer() && !x.is_negative()),
            Err(_) => false,
        }
    }

    pub fn dominance_lt(&self, mu: &Weight, nu: &Weight) -> bool {
        mu != nu && self.dominance_leq(mu, nu)
    }

    /// Simple reflection `s_i(mu) = mu - <H_i, mu> alpha_i`.
    pub fn reflect(&self, i: usize, mu: &Weight) -> Weight {
        let k = mu.0[i];
        &self.simple_root(i).scale(-k) + mu
    }

    /// Applies `s_{w[0]} s_{w[1]} ... s_{w[k-1]}` to `mu`.
    pub fn apply_word(&self, word: &[usize], mu: &Weight) -> Weight {
        word.iter().rev().fold(mu.clone(), |acc, &i| self.reflect(i, &acc))
    }

    /// Lexicographically least reduced word of the longest element.
    pub fn w0_word(&self) -> Result<&[usize], CartanError> {
        self.w0_word.as_deref().ok_or(CartanError::NotFiniteType)
    }

    pub fn w0_apply(&self, mu: &Weight) -> Result<Weight, CartanError> {
        Ok(self.apply_word(self.w0_word()?, mu))
    }

    /// The diagram automorphism with `w0(alpha_i) = -alpha_theta(i)`.
    pub fn theta(&self, i: usize) -> Result<usize, CartanError> {
        self.theta.as_ref().map(|t| t[i]).ok_or(CartanError::NotFiniteType)
    }

    fn compute_w0_word(&self) -> Vec<usize> {
        // greedy smallest left descent, tracking mu = w(rho) from w = w0 (mu = -rho)
        let n = self.rank();
        let mut mu = Weight(vec![-1; n]);
        let mut word = Vec::new();
        while let Some(i) = (0..n).find(|&i| mu.0[i] < 0) {
            word.push(i);
            mu = self.reflect(i, &mu);
        }
        word
    }

    /// Positive roots in simple-root coordinates, by reflection closure.
    pub fn positive_roots(&self) -> Result<Vec<Vec<i64>>, CartanError> {
        if !self.finite {
            return Err(CartanError::NotFiniteType);
        }
        let n = self.rank();
        let to_root = |w: &Weight| -> Vec<i64> {
            self.root_coordinates(w).unwrap().iter().map(|x| x.to_integer()).collect()
        };
        let mut seen: Vec<Weight> = (0..n).map(|i| self.simple_root(i)).collect();
        let mut frontier = seen.clone();
        while let Some(r) = frontier.pop() {
            for i in 0..n {
                let s = self.reflect(i, &r);
                let coords = to_root(&s);
                if coords.iter().all(|&c| c >= 0) && !seen.contains(&s) {
                    seen.push(s.clone());
                    frontier.push(s);
                }
            }
        }
        let mut roots: Vec<Vec<i64>> = seen.iter().map(to_root).collect();
        roots.sort();
        Ok(roots)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": self.label,
            "cartan": self.matrix,
            "d": self.symmetrizers,
            "D": self.root_order,
            "theta": self.theta.as_ref().map(|t| t.iter().map(|i| i + 1).collect::<Vec<_>>()),
            "w0": self.w0_word.as_ref().map(|w| w.iter().map(|i| i + 1).collect::<Vec<_>>()),
        })
    }
}

fn symmetrize(a: &[Vec<i64>]) -> Result<Vec<i64>, CartanError> {
    let n = a.len();
    let mut d: Vec<Option<Q>> = vec![None; n];
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Q::one());
        let mut component = vec![start];
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || a[i][j] == 0 {
                    continue;
                }
                let dj = d[i].unwrap() * Q::new(a[i][j], a[j][i]);
                match d[j] {
                    None => {
                        d[j] = Some(dj);
                        component.push(j);
                        stack.push(j);
                    }
                    Some(existing) if existing != dj => return Err(CartanError::NotSymmetrizable),
                    Some(_) => {}
                }
            }
        }
        // scale the component to minimal positive integers
        let l = component.iter().fold(1i64, |acc, &i| acc.lcm(d[i].unwrap().denom()));
        let ints: Vec<i64> = component.iter().map(|&i| (d[i].unwrap() * l).to_integer()).collect();
        let g = ints.iter().fold(0i64, |acc, x| acc.gcd(x));
        for (&i, v) in component.iter().zip(ints) {
            d[i] = Some(Q::from_integer(v / g));
        }
    }
    Ok(d.into_iter().map(|x| x.unwrap().to_integer()).collect())
}

fn determinant(mut m: Vec<Vec<Q>>) -> Q {
    let n = m.len();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                let t = m[c][k] * f;
                m[r][k] -= t;
            }
        }
    }
    det
}

fn invert(m: Vec<Vec<Q>>) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Q>> = m
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !aug[r][c].is_zero())?;
        aug.swap(p, c);
        let piv = aug[c][c];
        for x in aug[c].iter_mut() {
            *x /= piv;
        }
        for r in 0..n {
            if r != c && !aug[r][c].is_zero() {
                let f = aug[r][c];
                for k in 0..2 * n {
                    let t = aug[c][k] * f;
                    aug[r][k] -= t;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    #[test]
    fn a1_datum() {
        let c = CartanDatum::from_type("A1").unwrap();
        assert_eq!(c.symmetrizers(), &[1]);
        assert_eq!(c.w0_word().unwrap(), &[0]);
        assert_eq!(c.theta(0).unwrap(), 0);
        // oracle: (omega, omega) = 1/2, lcm of denominators 2
        assert_eq!(c.root_order(), 4);
        assert_eq!(c.form(&w(&[1]), &w(&[1])).unwrap(), Exponent::new(1, 2));
    }

    #[test]
    fn a2_datum() {
        let c = CartanDatum::from_type("A2").unwrap();
        assert_eq!(c.w0_word().unwrap(), &[0, 1, 0]);
        assert_eq!((c.theta(0).unwrap(), c.theta(1).unwrap()), (1, 0));
        assert_eq!(c.form(&w(&[1, 0]), &w(&[1, 0])).unwrap(), Exponent::new(2, 3));
        assert_eq!(c.form(&w(&[1, 0]), &w(&[0, 1])).unwrap(), Exponent::new(1, 3));
        assert_eq!(c.pairing(0, &c.simple_root(1)), -1);
        assert_eq!(c.root_order(), 6);
    }

    #[test]
    fn b2_datum() {
        let c = CartanDatum::from_type("B2").unwrap();
        assert_eq!(c.symmetrizers(), &[2, 1]);
        assert_eq!(c.w0_word().unwrap().len(), 4);
        assert_eq!((c.theta(0).unwrap(), c.theta(1).unwrap()), (0, 1));
        assert_eq!(c.positive_roots().unwrap().len(), 4);
    }

    #[test]
    fn other_types_build() {
        for (t, roots) in [("A3", 6), ("B3", 9), ("C3", 9), ("D4", 12), ("G2", 6)] {
            let c = CartanDatum::from_type(t).unwrap();
            assert!(c.is_finite());
            assert_eq!(c.positive_roots().unwrap().len(), roots, "{t}");
            assert_eq!(c.w0_word().unwrap().len(), roots, "{t}");
        }
        assert_eq!(CartanDatum::from_type("G2").unwrap().symmetrizers(), &[1, 3]);
    }

    #[test]
    fn rho_pairs_to_d() {
        for t in ["A1", "A2", "B2", "G2", "C3"] {
            let c = CartanDatum::from_type(t).unwrap();
            let rho = c.rho().unwrap();
            for i in 0..c.rank() {
                assert_eq!(c.pairing(i, &rho), 1);
                assert_eq!(c.form(&c.simple_root(i), &rho).unwrap(), Exponent::integer(c.d(i)));
            }
        }
    }

    #[test]
    fn dominance_examples() {
        let a1 = CartanDatum::from_type("A1").unwrap();
        assert!(a1.dominance_leq(&w(&[0]), &w(&[2])));
        assert!(!a1.dominance_leq(&w(&[0]), &w(&[1])));
        let a2 = CartanDatum::from_type("A2").unwrap();
        assert!(!a2.dominance_leq(&w(&[1, 0]), &w(&[0, 1])));
        assert!(!a2.dominance_leq(&w(&[0, 1]), &w(&[1, 0])));
        assert!(a2.dominance_leq(&w(&[1, 1]), &w(&[1, 1])));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            CartanDatum::from_matrix("x", vec![vec![2, -1], vec![0, 2]]),
            Err(CartanError::NotGcm(_))
        ));
        // a 3-cycle with inconsistent ratios
        let bad = vec![vec![2, -1, -1], vec![-2, 2, -1], vec![-1, -1, 2]];
        assert_eq!(CartanDatum::from_matrix("x", bad), Err(CartanError::NotSymmetrizable));
        let affine = CartanDatum::from_matrix("A1~", vec![vec![2, -2], vec![-2, 2]]).unwrap();
        assert!(!affine.is_finite());
        assert_eq!(affine.w0_word(), Err(CartanError::NotFiniteType));
        assert_eq!(affine.rho(), Err(CartanError::NotFiniteType));
        assert!(CartanDatum::from_type("E9").is_err());
    }

    #[test]
    fn json_shape() {
        let v = CartanDatum::from_type("A2").unwrap().to_json();
        assert_eq!(v["theta"], json!([2, 1]));
        assert_eq!(v["w0"], json!([1, 2, 1]));
        assert_eq!(v["cartan"], json!([[2, -1], [-1, 2]]));
    }

    fn arb_weight(rank: usize) -> impl Strategy<Value = Weight> {
        prop::collection::vec(-4i64..=4, rank).prop_map(Weight)
    }

    proptest! {
        #[test]
        fn form_symmetric_and_compatible(mu in arb_weight(2), nu in arb_weight(2)) {
            for t in ["A2", "B2", "G2"] {
                let c = CartanDatum::from_type(t).unwrap();
                prop_assert_eq!(c.form(&mu, &nu).unwrap(), c.form(&nu, &mu).unwrap());
                for i in 0..2 {
                    prop_assert_eq!(
                        c.form(&mu, &c.simple_root(i)).unwrap(),
                        Exponent::integer(c.d(i) * mu.0[i])
                    );
                }
            }
        }

        #[test]
        fn w0_and_theta_involutive(i in 0usize..2) {
            for t in ["A2", "B2", "G2"] {
                let c = CartanDatum::from_type(t).unwrap();
                let a = c.simple_root(i);
                prop_assert_eq!(c.w0_apply(&c.w0_apply(&a).unwrap()).unwrap(), a);
                prop_assert_eq!(c.theta(c.theta(i).unwrap()).unwrap(), i);
            }
        }

        #[test]
        fn dominance_is_partial_order(a in arb_weight(2), b in arb_weight(2), c in arb_weight(2)) {
            let cd = CartanDatum::from_type("A2").unwrap();
            prop_assert!(cd.dominance_leq(&a, &a));
            if cd.dominance_leq(&a, &b) && cd.dominance_leq(&b, &a) {
                prop_assert_eq!(&a, &b);
            }
            if cd.dominance_leq(&a, &b) && cd.dominance_leq(&b, &c) {
                prop_assert!(cd.dominance_leq(&a, &c));
            }
        }
    }
}
