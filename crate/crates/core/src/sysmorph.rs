//! Module maps compatible with an algebra (auto)morphism and a pinned value:
//! bar, Theta, Gamma, J, T_{w0}, and the rank-one braid operators.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan::{CartanError, Weight};
use crate::linalg::{IncrementalBasis, SparseMatrix, SparseVector};
use crate::qscalar::{FieldElement, QError};
use crate::uqmod::{ModError, Module, ModuleVector};

type F = FieldElement;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MorphError {
    #[error("pinned vectors do not generate the module ({spanned} of {dim} dimensions)")]
    NotGenerated { spanned: usize, dim: usize },
    #[error("transported map is incompatible with {spec}: {failures} failing generator/vector pairs")]
    Incompatible { spec: String, failures: usize },
    #[error("maps of different linearity cannot be tensored")]
    MixedLinearity,
    #[error("map is not invertible")]
    Singular,
    #[error("no braid operator variant is compatible with the T_w0 morphism")]
    Calibration,
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Field(#[from] QError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linearity {
    QLinear,
    BarLinear,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Multiplicativity {
    Automorphism,
    AntiAutomorphism,
}

/// How the morphism interacts with the coproduct; decides whether a commutor needs `Flip`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coalgebra {
    Automorphism,
    AntiAutomorphism,
    Neither,
}

/// One factor of an operator word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    E(usize),
    F(usize),
    /// `K_i^{power}`
    K(usize, i64),
}

/// `sign * X_1 X_2 ... X_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpWord {
    pub sign: i64,
    pub factors: Vec<Factor>,
}

impl OpWord {
    fn new(sign: i64, factors: Vec<Factor>) -> Self {
        OpWord { sign, factors }
    }

    pub fn evaluate(&self, m: &Module) -> SparseMatrix {
        let order = m.order();
        let mut acc = SparseMatrix::identity(m.dim(), order);
        for f in self.factors.iter().rev() {
            let x = match *f {
                Factor::E(i) => m.e(i).clone(),
                Factor::F(i) => m.f(i).clone(),
                Factor::K(i, p) => m.k(i, p),
            };
            acc = x.mul(&acc);
        }
        if self.sign == 1 {
            acc
        } else {
            acc.scale(&F::from_int(self.sign, order))
        }
    }
}

/// Images of the generators under an algebra morphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorphismSpec {
    pub name: String,
    pub e: Vec<OpWord>,
    pub f: Vec<OpWord>,
    /// image of `K_i`
    pub k: Vec<OpWord>,
    pub linearity: Linearity,
    pub multiplicativity: Multiplicativity,
    pub coalgebra: Coalgebra,
}

impl MorphismSpec {
    fn build(
        name: &str,
        rank: usize,
        linearity: Linearity,
        coalgebra: Coalgebra,
        img: impl Fn(usize) -> (OpWord, OpWord, OpWord),
    ) -> Self {
        let (mut e, mut f, mut k) = (Vec::new(), Vec::new(), Vec::new());
        for i in 0..rank {
            let (a, b, c) = img(i);
            e.push(a);
            f.push(b);
            k.push(c);
        }
        MorphismSpec {
            name: name.into(),
            e,
            f,
            k,
            linearity,
            multiplicativity: Multiplicativity::Automorphism,
            coalgebra,
        }
    }

    pub fn identity(rank: usize) -> Self {
        use Factor::*;
        Self::build("identity", rank, Linearity::QLinear, Coalgebra::Automorphism, |i| {
            (OpWord::new(1, vec![E(i)]), OpWord::new(1, vec![F(i)]), OpWord::new(1, vec![K(i, 1)]))
        })
    }

    /// `E_i -> E_i`, `F_i -> F_i`, `K_i -> K_i^{-1}`, `q -> q^{-1}`.
    pub fn bar(rank: usize) -> Self {
        use Factor::*;
        Self::build("C_bar", rank, Linearity::BarLinear, Coalgebra::Neither, |i| {
            (OpWord::new(1, vec![E(i)]), OpWord::new(1, vec![F(i)]), OpWord::new(1, vec![K(i, -1)]))
        })
    }

    /// `E_i -> E_i K_i^{-1}`, `F_i -> K_i F_i`, `K_i -> K_i^{-1}`, bar-linear.
    pub fn theta(rank: usize) -> Self {
        use Factor::*;
        Self::build("C_Theta", rank, Linearity::BarLinear, Coalgebra::AntiAutomorphism, |i| {
            (
                OpWord::new(1, vec![E(i), K(i, -1)]),
                OpWord::new(1, vec![K(i, 1), F(i)]),
                OpWord::new(1, vec![K(i, -1)]),
            )
        })
    }

    /// `E_i -> -K_t F_t`, `F_i -> -E_t K_t^{-1}`, `K_i -> K_t` with `t = theta(i)`, bar-linear.
    pub fn gamma(theta: &[usize]) -> Self {
        use Factor::*;
        Self::build("C_Gamma", theta.len(), Linearity::BarLinear, Coalgebra::Automorphism, |i| {
            let t = theta[i];
            (
                OpWord::new(-1, vec![K(t, 1), F(t)]),
                OpWord::new(-1, vec![E(t), K(t, -1)]),
                OpWord::new(1, vec![K(t, 1)]),
            )
        })
    }

    /// `E_i -> -F_t K_t`, `F_i -> -K_t^{-1} E_t`, `K_i -> K_t^{-1}`.
    pub fn tw0(theta: &[usize]) -> Self {
        use Factor::*;
        Self::build("C_Tw0", theta.len(), Linearity::QLinear, Coalgebra::AntiAutomorphism, |i| {
            let t = theta[i];
            (
                OpWord::new(-1, vec![F(t), K(t, 1)]),
                OpWord::new(-1, vec![K(t, -1), E(t)]),
                OpWord::new(1, vec![K(t, -1)]),
            )
        })
    }

    /// `E_i -> K_i E_i`, `F_i -> F_i K_i^{-1}`, `K_i -> K_i`.
    pub fn j(rank: usize) -> Self {
        use Factor::*;
        Self::build("C_J", rank, Linearity::QLinear, Coalgebra::Neither, |i| {
            (
                OpWord::new(1, vec![K(i, 1), E(i)]),
                OpWord::new(1, vec![F(i), K(i, -1)]),
                OpWord::new(1, vec![K(i, 1)]),
            )
        })
    }

    fn image(&self, g: Generator) -> &OpWord {
        match g {
            Generator::E(i) => &self.e[i],
            Generator::F(i) => &self.f[i],
            Generator::K(i) => &self.k[i],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    E(usize),
    F(usize),
    K(usize),
}

impl Generator {
    fn matrix(self, m: &Module) -> SparseMatrix {
        match self {
            Generator::E(i) => m.e(i).clone(),
            Generator::F(i) => m.f(i).clone(),
            Generator::K(i) => m.k(i, 1),
        }
    }

    fn label(self) -> String {
        match self {
            Generator::E(i) => format!("E_{}", i + 1),
            Generator::F(i) => format!("F_{}", i + 1),
            Generator::K(i) => format!("K_{}", i + 1),
        }
    }
}

/// Which generators are applied to the pinned vectors to span the module.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Lowering,
    Raising,
}

/// A module endomorphism `v -> M v` (q-linear) or `v -> M bar(v)` (bar-linear).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportedMap {
    pub matrix: SparseMatrix,
    pub linearity: Linearity,
    pub provenance: String,
}

impl TransportedMap {
    pub fn linear(matrix: SparseMatrix, provenance: &str) -> Self {
        TransportedMap { matrix, linearity: Linearity::QLinear, provenance: provenance.into() }
    }

    pub fn identity(dim: usize, order: u32) -> Self {
        Self::linear(SparseMatrix::identity(dim, order), "identity")
    }

    pub fn apply(&self, v: &ModuleVector) -> ModuleVector {
        match self.linearity {
            Linearity::QLinear => self.matrix.apply(v),
            Linearity::BarLinear => self.matrix.apply(&v.bar()),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &TransportedMap) -> TransportedMap {
        use Linearity::*;
        let (matrix, linearity) = match (self.linearity, other.linearity) {
            (QLinear, QLinear) => (self.matrix.mul(&other.matrix), QLinear),
            (QLinear, BarLinear) => (self.matrix.mul(&other.matrix), BarLinear),
            (BarLinear, QLinear) => (self.matrix.mul(&other.matrix.bar()), BarLinear),
            (BarLinear, BarLinear) => (self.matrix.mul(&other.matrix.bar()), QLinear),
        };
        TransportedMap { matrix, linearity, provenance: format!("({}) ∘ ({})", self.provenance, other.provenance) }
    }

    pub fn inverse(&self) -> Result<TransportedMap, MorphError> {
        let inv = self.matrix.inverse().ok_or(MorphError::Singular)?;
        let matrix = match self.linearity {
            Linearity::QLinear => inv,
            Linearity::BarLinear => inv.bar(),
        };
        Ok(TransportedMap { matrix, linearity: self.linearity, provenance: format!("({})^-1", self.provenance) })
    }

    /// `self ⊗ other` on a left-major tensor product.
    pub fn kron(&self, other: &TransportedMap) -> Result<TransportedMap, MorphError> {
        if self.linearity != other.linearity {
            return Err(MorphError::MixedLinearity);
        }
        Ok(TransportedMap {
            matrix: self.matrix.kron(&other.matrix),
            linearity: self.linearity,
            provenance: format!("({}) ⊗ ({})", self.provenance, other.provenance),
        })
    }

    pub fn scale(&self, c: &F) -> TransportedMap {
        TransportedMap { matrix: self.matrix.scale(c), ..self.clone() }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "linearity": match self.linearity { Linearity::QLinear => "q-linear", Linearity::BarLinear => "bar-linear" },
            "provenance": self.provenance,
            "entries": self.matrix.to_json(),
        })
    }
}

/// One failing `(generator, basis vector)` pair of a compatibility square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompatibilityFailure {
    pub generator: String,
    pub basis_index: usize,
    pub lhs: ModuleVector,
    pub rhs: ModuleVector,
}

/// Checks `T(X v) = C(X) T(v)` for every generator `X` and basis vector `v`.
pub fn verify_compatibility(m: &Module, t: &TransportedMap, spec: &MorphismSpec) -> Vec<CompatibilityFailure> {
    let mut failures = Vec::new();
    let gens = (0..m.rank()).flat_map(|i| [Generator::E(i), Generator::F(i), Generator::K(i)]);
    for g in gens {
        let x = g.matrix(m);
        let lhs = match t.linearity {
            Linearity::QLinear => t.matrix.mul(&x),
            Linearity::BarLinear => t.matrix.mul(&x.bar()),
        };
        let rhs = spec.image(g).evaluate(m).mul(&t.matrix);
        if lhs == rhs {
            continue;
        }
        let (lc, rc) = (lhs.columns(), rhs.columns());
        for (k, (a, b)) in lc.into_iter().zip(rc).enumerate() {
            if a != b {
                failures.push(CompatibilityFailure { generator: g.label(), basis_index: k, lhs: a, rhs: b });
            }
        }
    }
    failures
}

fn weight_of(m: &Module, v: &ModuleVector) -> Weight {
    m.weight(v.entries()[0].0).clone()
}

/// The unique map with `T(u v0) = C(u) w0` for generator monomials `u` in the
/// chosen family, one `(v0, w0)` pin per generating vector.
pub fn transport(
    m: &Module,
    spec: &MorphismSpec,
    pins: &[(ModuleVector, ModuleVector)],
    family: Family,
) -> Result<TransportedMap, MorphError> {
    let order = m.order();
    let images: Vec<SparseMatrix> = (0..m.rank())
        .map(|i| match family {
            Family::Lowering => spec.f[i].evaluate(m),
            Family::Raising => spec.e[i].evaluate(m),
        })
        .collect();
    let gens: Vec<&SparseMatrix> = (0..m.rank())
        .map(|i| match family {
            Family::Lowering => m.f(i),
            Family::Raising => m.e(i),
        })
        .collect();
    let mut spans: BTreeMap<Weight, IncrementalBasis> = BTreeMap::new();
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut frontier: Vec<(ModuleVector, ModuleVector)> = Vec::new();
    for (v0, w0) in pins {
        if v0.is_zero() {
            continue;
        }
        if spans.entry(weight_of(m, v0)).or_insert_with(|| IncrementalBasis::new(order)).insert(v0) {
            sources.push(v0.clone());
            targets.push(w0.clone());
            frontier.push((v0.clone(), w0.clone()));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for i in 0..m.rank() {
            for (x, y) in &frontier {
                let nx = gens[i].apply(x);
                if nx.is_zero() {
                    continue;
                }
                if spans.entry(weight_of(m, &nx)).or_insert_with(|| IncrementalBasis::new(order)).insert(&nx) {
                    let ny = images[i].apply(y);
                    sources.push(nx.clone());
                    targets.push(ny.clone());
                    next.push((nx, ny));
                }
            }
        }
        frontier = next;
    }
    if sources.len() != m.dim() {
        return Err(MorphError::NotGenerated { spanned: sources.len(), dim: m.dim() });
    }
    let s = SparseMatrix::from_columns(m.dim(), order, &sources);
    let img = SparseMatrix::from_columns(m.dim(), order, &targets);
    let s = match spec.linearity {
        Linearity::QLinear => s,
        Linearity::BarLinear => s.bar(),
    };
    let inv = s.inverse().ok_or(MorphError::Singular)?;
    let t = TransportedMap { matrix: img.mul(&inv), linearity: spec.linearity, provenance: spec.name.clone() };
    let failures = verify_compatibility(m, &t, spec);
    if !failures.is_empty() {
        return Err(MorphError::Incompatible { spec: spec.name.clone(), failures: failures.len() });
    }
    Ok(t)
}

/// The bar involution of a based module fixing each listed highest-weight vector.
pub fn make_bar(m: &Module, hws: &[ModuleVector]) -> Result<TransportedMap, MorphError> {
    let pins: Vec<_> = hws.iter().map(|h| (h.clone(), h.clone())).collect();
    transport(m, &MorphismSpec::bar(m.rank()), &pins, Family::Lowering)
}

/// `Theta` pinned by `h -> q^{-(nu,nu)/2 + (nu,rho)} h` on each component highest-weight vector.
pub fn make_theta(m: &Module, hws: &[ModuleVector]) -> Result<TransportedMap, MorphError> {
    let order = m.order();
    let mut pins = Vec::new();
    for h in hws {
        let nu = weight_of(m, h);
        let c = F::q_pow(m.cartan().theta_exponent(&nu)?, order)?;
        pins.push((h.clone(), h.scale(&c)));
    }
    transport(m, &MorphismSpec::theta(m.rank()), &pins, Family::Lowering)
}

/// `Theta` pinned with an arbitrary eigenvalue rule (used for negative controls).
pub fn make_theta_with(
    m: &Module,
    hws: &[ModuleVector],
    eigen: impl Fn(&Weight) -> Result<F, MorphError>,
) -> Result<TransportedMap, MorphError> {
    let mut pins = Vec::new();
    for h in hws {
        pins.push((h.clone(), h.scale(&eigen(&weight_of(m, h))?)));
    }
    transport(m, &MorphismSpec::theta(m.rank()), &pins, Family::Lowering)
}

/// `J`: the weight-diagonal map `q^{(mu,mu)/2 + (mu,rho)}`.
pub fn make_j(m: &Module) -> Result<TransportedMap, MorphError> {
    let c = m.cartan().clone();
    c.rho()?;
    let d = m.weight_diagonal(|w| c.j_exponent(w).expect("finite type"));
    Ok(TransportedMap::linear(d?, "J"))
}

/// `J` obtained by transport of `C_J` pinned at each component highest-weight vector.
pub fn make_j_transport(m: &Module, hws: &[ModuleVector]) -> Result<TransportedMap, MorphError> {
    let order = m.order();
    let mut pins = Vec::new();
    for h in hws {
        let nu = weight_of(m, h);
        let c = F::q_pow(m.cartan().j_exponent(&nu)?, order)?;
        pins.push((h.clone(), h.scale(&c)));
    }
    transport(m, &MorphismSpec::j(m.rank()), &pins, Family::Lowering)
}

/// `K_{2H_rho}`: the weight-diagonal map `q^{2(rho, mu)}`.
pub fn make_k2rho(m: &Module) -> Result<TransportedMap, MorphError> {
    let c = m.cartan().clone();
    let rho = c.rho()?;
    let d = m.weight_diagonal(|w| c.form(&rho, w).expect("finite type") * 2)?;
    Ok(TransportedMap::linear(d, "K_2Hrho"))
}

/// The extremal lowest-weight vector `F_{j1}^{(a1)} ... F_{jN}^{(aN)} h` along the
/// reduced word of `w0`; the lowest global-basis element when `h` is the highest one.
pub fn extremal_lowest(m: &Module, h: &ModuleVector) -> Result<ModuleVector, MorphError> {
    let c = m.cartan().clone();
    let word = c.w0_word()?.to_vec();
    let mut mu = weight_of(m, h);
    let mut v = h.clone();
    for &j in word.iter().rev() {
        let a = mu.0[j];
        debug_assert!(a >= 0);
        v = m.f_divided(j, a as u32).apply(&v);
        mu = c.reflect(j, &mu);
    }
    Ok(v)
}

/// `Gamma` pinned by `h -> b_low(h)` on each component.
pub fn make_gamma(m: &Module, pins: &[(ModuleVector, ModuleVector)]) -> Result<TransportedMap, MorphError> {
    let theta: Vec<usize> = (0..m.rank()).map(|i| m.cartan().theta(i)).collect::<Result<_, _>>()?;
    transport(m, &MorphismSpec::gamma(&theta), pins, Family::Lowering)
}

/// `T_{w0}` by transport of `C_{T_w0}` pinned at `b_low(h) -> h`, spanning with `E`-monomials.
pub fn make_tw0_transport(m: &Module, pins: &[(ModuleVector, ModuleVector)]) -> Result<TransportedMap, MorphError> {
    let theta: Vec<usize> = (0..m.rank()).map(|i| m.cartan().theta(i)).collect::<Result<_, _>>()?;
    let flipped: Vec<_> = pins.iter().map(|(h, low)| (low.clone(), h.clone())).collect();
    transport(m, &MorphismSpec::tw0(&theta), &flipped, Family::Raising)
}

/// The four rank-one braid operator variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BraidVariant {
    /// `sum (-1)^b q_i^{e(b-ac)} F^(a) E^(b) F^(c)` over `a - b + c = m`
    Prime(i8),
    /// `sum (-1)^b q_i^{e(b-ac)} E^(a) F^(b) E^(c)` over `-a + b - c = m`
    DoublePrime(i8),
}

impl BraidVariant {
    pub const ALL: [BraidVariant; 4] =
        [BraidVariant::Prime(1), BraidVariant::Prime(-1), BraidVariant::DoublePrime(1), BraidVariant::DoublePrime(-1)];
}

/// The rank-one symmetry `T_i` of the chosen variant, as a matrix.
pub fn braid_operator(m: &Module, i: usize, variant: BraidVariant) -> SparseMatrix {
    let order = m.order();
    let di = m.cartan().d(i);
    let top = m.weights().iter().map(|w| w.0[i].abs()).max().unwrap_or(0) as u32;
    let n = 2 * top + 1;
    let fd: Vec<SparseMatrix> = (0..=n).map(|k| m.f_divided(i, k)).collect();
    let ed: Vec<SparseMatrix> = (0..=n).map(|k| m.e_divided(i, k)).collect();
    let (outer, inner, e) = match variant {
        BraidVariant::Prime(e) => (&fd, &ed, e as i64),
        BraidVariant::DoublePrime(e) => (&ed, &fd, e as i64),
    };
    let sign_m: i64 = match variant {
        BraidVariant::Prime(_) => 1,
        BraidVariant::DoublePrime(_) => -1,
    };
    let mut cols = Vec::with_capacity(m.dim());
    for k in 0..m.dim() {
        let mw = m.weight(k).0[i] * sign_m;
        let v = SparseVector::unit(k, order);
        let mut acc = SparseVector::new();
        for c in 0..=n {
            let x = outer[c as usize].apply(&v);
            if x.is_zero() {
                continue;
            }
            for b in 0..=n {
                let y = inner[b as usize].apply(&x);
                if y.is_zero() {
                    continue;
                }
                let a = mw + b as i64 - c as i64;
                if a < 0 || a > n as i64 {
                    continue;
                }
                let z = outer[a as usize].apply(&y);
                if z.is_zero() {
                    continue;
                }
                let exp = e * di * (b as i64 - a * c as i64);
                let mut coef = F::q_int(exp, order);
                if b % 2 == 1 {
                    coef = -coef;
                }
                acc = acc.axpy(&coef, &z);
            }
        }
        cols.push(acc);
    }
    SparseMatrix::from_columns(m.dim(), order, &cols)
}

/// Product of braid operators along the reduced word of `w0`.
pub fn braid_product(m: &Module, variant: BraidVariant) -> Result<SparseMatrix, MorphError> {
    let word = m.cartan().w0_word()?.to_vec();
    let mut acc = SparseMatrix::identity(m.dim(), m.order());
    for &j in &word {
        acc = acc.mul(&braid_operator(m, j, variant));
    }
    Ok(acc)
}

/// `T_{w0}` as a braid product in a calibrated variant.
pub fn make_tw0_braid(m: &Module, variant: BraidVariant) -> Result<TransportedMap, MorphError> {
    Ok(TransportedMap::linear(braid_product(m, variant)?, "T_w0 (braid product)"))
}

/// Chooses the braid variant whose `w0` product is compatible with `C_{T_w0}` and
/// sends the extremal lowest vector to the highest-weight vector on every
/// fundamental module. `fundamentals` are `(module, hw)` pairs.
pub fn calibrate_braid_variant(fundamentals: &[(&Module, ModuleVector)]) -> Result<BraidVariant, MorphError> {
    'variants: for v in BraidVariant::ALL {
        for (m, h) in fundamentals {
            let theta: Vec<usize> = (0..m.rank()).map(|i| m.cartan().theta(i)).collect::<Result<_, _>>()?;
            let t = make_tw0_braid(m, v)?;
            if !verify_compatibility(m, &t, &MorphismSpec::tw0(&theta)).is_empty() {
                continue 'variants;
            }
            if t.apply(&extremal_lowest(m, h)?) != *h {
                continue 'variants;
            }
        }
        return Ok(v);
    }
    Err(MorphError::Calibration)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cartan::CartanDatum;
    use crate::uqmod::make_irreducible;
    use std::sync::Arc;

    fn module(t: &str, hw: &[i64]) -> Module {
        make_irreducible(&Arc::new(CartanDatum::from_type(t).unwrap()), &Weight(hw.to_vec())).unwrap()
    }

    fn hw(m: &Module) -> ModuleVector {
        SparseVector::unit(0, m.order())
    }

    #[test]
    fn identity_spec_gives_identity() {
        let m = module("A2", &[1, 1]);
        let t = transport(&m, &MorphismSpec::identity(2), &[(hw(&m), hw(&m))], Family::Lowering).unwrap();
        assert!(t.matrix.is_identity());
    }

    #[test]
    fn theta_on_a1_fundamental() {
        let m = module("A1", &[1]);
        let t = make_theta(&m, &[hw(&m)]).unwrap();
        let o = m.order();
        // exponent -(w,w)/2 + (w,rho) = -1/4 + 1/2 and at -w: -1/4 - 1/2
        assert_eq!(t.apply(&hw(&m)), hw(&m).scale(&F::q_pow(crate::qscalar::Exponent::new(1, 4), o).unwrap()));
        let low = SparseVector::unit(1, o);
        assert_eq!(t.apply(&low), low.scale(&F::q_pow(crate::qscalar::Exponent::new(-3, 4), o).unwrap()));
        assert!(t.compose(&t).matrix.is_identity());
    }

    #[test]
    fn j_on_a1_fundamental() {
        let m = module("A1", &[1]);
        let j = make_j(&m).unwrap();
        let o = m.order();
        let expected = SparseMatrix::diagonal(
            vec![
                F::q_pow(crate::qscalar::Exponent::new(3, 4), o).unwrap(),
                F::q_pow(crate::qscalar::Exponent::new(-1, 4), o).unwrap(),
            ],
            o,
        );
        assert_eq!(j.matrix, expected);
        assert_eq!(make_j_transport(&m, &[hw(&m)]).unwrap(), TransportedMap { provenance: "C_J".into(), ..j });
    }

    #[test]
    fn gamma_pins_lowest() {
        let m = module("A1", &[1]);
        let low = extremal_lowest(&m, &hw(&m)).unwrap();
        assert_eq!(low, SparseVector::unit(1, m.order()));
        let g = make_gamma(&m, &[(hw(&m), low.clone())]).unwrap();
        assert_eq!(g.apply(&hw(&m)), low);
    }

    #[test]
    fn wrong_pin_is_rejected() {
        let m = module("A1", &[2]);
        let t = make_theta(&m, &[hw(&m)]).unwrap();
        let bad = t.scale(&F::q_int(1, m.order()));
        assert!(verify_compatibility(&m, &bad, &MorphismSpec::theta(1)).is_empty());
        // a map that is not C_Theta-compatible: scale only the top weight space by q
        let mut d: Vec<F> = (0..m.dim()).map(|_| F::one(m.order())).collect();
        d[0] = F::q_int(1, m.order());
        let skew = TransportedMap {
            matrix: SparseMatrix::diagonal(d, m.order()).mul(&t.matrix),
            ..t.clone()
        };
        assert!(!verify_compatibility(&m, &skew, &MorphismSpec::theta(1)).is_empty());
    }

    #[test]
    fn braid_relation_a2() {
        let m = module("A2", &[1, 0]);
        for v in BraidVariant::ALL {
            let t1 = braid_operator(&m, 0, v);
            let t2 = braid_operator(&m, 1, v);
            assert_eq!(t1.mul(&t2).mul(&t1), t2.mul(&t1).mul(&t2));
        }
    }

    #[test]
    fn composition_rules() {
        let m = module("A1", &[1]);
        let b = make_bar(&m, &[hw(&m)]).unwrap();
        let bb = b.compose(&b);
        assert_eq!(bb.linearity, Linearity::QLinear);
        assert!(bb.matrix.is_identity());
        let j = make_j(&m).unwrap();
        assert_eq!(j.compose(&b).linearity, Linearity::BarLinear);
        assert_eq!(b.compose(&j).linearity, Linearity::BarLinear);
        assert_eq!(b.kron(&j), Err(MorphError::MixedLinearity));
        let binv = b.inverse().unwrap();
        assert!(binv.compose(&b).matrix.is_identity());
    }

    #[test]
    fn braid_variant_calibrates_on_fundamentals() {
        for (t, r) in [("A1", 1), ("A2", 2), ("B2", 2), ("G2", 2)] {
            let ms: Vec<Module> =
                (0..r).map(|i| module(t, &Weight::fundamental(r, i).0)).collect();
            let pairs: Vec<(&Module, ModuleVector)> = ms.iter().map(|m| (m, hw(m))).collect();
            assert_eq!(calibrate_braid_variant(&pairs).unwrap(), BraidVariant::DoublePrime(1), "{t}");
        }
    }

    #[test]
    fn tw0_transport_matches_braid_product() {
        for (t, w) in [("A1", vec![2]), ("A2", vec![1, 1]), ("B2", vec![0, 1])] {
            let m = module(t, &w);
            let low = extremal_lowest(&m, &hw(&m)).unwrap();
            let tr = make_tw0_transport(&m, &[(hw(&m), low)]).unwrap();
            let hits: Vec<_> = BraidVariant::ALL
                .iter()
                .filter(|v| make_tw0_braid(&m, **v).unwrap().matrix == tr.matrix)
                .collect();
            assert_eq!(hits, [&BraidVariant::DoublePrime(1)], "{t} {w:?}");
        }
    }
}
