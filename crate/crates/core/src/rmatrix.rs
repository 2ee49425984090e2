//! Tensor-product pinning, the three R-matrix constructions, commutors and
//! the braided-category checks.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use thiserror::Error;

use crate::bases::{
    calibrate_tensor_convention, compute_global_basis, highest_weight_set, BasesError, GlobalBasis, TensorConvention,
};
use crate::cartan::{CartanDatum, CartanError, Weight};
use crate::exec::Exec;
use crate::linalg::{solve_sparse, SolveOutcome, SparseMatrix, SparseVector};
use crate::qscalar::{FieldElement, QError};
use crate::sysmorph::{
    extremal_lowest, make_bar, make_gamma, make_theta, make_theta_with, make_tw0_braid, make_tw0_transport, BraidVariant,
    MorphError, TransportedMap,
};
use crate::uqmod::{flip, make_irreducible, tensor, tensor_vectors, ModError, Module, ModuleVector};

type F = FieldElement;

/// Braid operator variant whose `w0` product realizes `T_{w0}`.
pub const BRAID_VARIANT: BraidVariant = BraidVariant::DoublePrime(1);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RError {
    #[error("pin for {nu}: {detail}")]
    Pinning { nu: Weight, detail: String },
    #[error("triangular R solve: {0}")]
    Oracle(String),
    #[error("commutor is not a module map: {0}")]
    NotIntertwiner(String),
    #[error(transparent)]
    Bases(#[from] BasesError),
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Field(#[from] QError),
}

/// An irreducible module with a pinned highest-weight vector and its global basis.
#[derive(Clone, Debug)]
pub struct Irrep {
    pub highest: Weight,
    pub module: Arc<Module>,
    pub basis: GlobalBasis,
}

impl Irrep {
    pub fn new(cartan: &Arc<CartanDatum>, lambda: &Weight) -> Result<Self, RError> {
        let module = Arc::new(make_irreducible(cartan, lambda)?);
        let hw = SparseVector::unit(0, module.order());
        Self::with_hw(module, &hw)
    }

    /// Same module with a different (e.g. rescaled) highest-weight pin.
    pub fn with_hw(module: Arc<Module>, hw: &ModuleVector) -> Result<Self, RError> {
        let basis = compute_global_basis(&module, hw)?;
        let highest = module.weight(hw.entries()[0].0).clone();
        Ok(Irrep { highest, module, basis })
    }

    pub fn hw(&self) -> &ModuleVector {
        &self.basis.hw
    }

    pub fn based(&self) -> BasedModule {
        BasedModule {
            module: self.module.clone(),
            pins: vec![Pin { nu: self.highest.clone(), h: self.hw().clone() }],
        }
    }
}

/// A highest-weight vector of the canonically based module, one per irreducible summand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pin {
    pub nu: Weight,
    pub h: ModuleVector,
}

/// A completely reducible module with the highest-weight elements of its global basis.
#[derive(Clone, Debug)]
pub struct BasedModule {
    pub module: Arc<Module>,
    pub pins: Vec<Pin>,
}

impl BasedModule {
    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    pub fn order(&self) -> u32 {
        self.module.order()
    }

    fn hws(&self) -> Vec<ModuleVector> {
        self.pins.iter().map(|p| p.h.clone()).collect()
    }

    /// `A ⊗ W`: pins are the isotypic projections of `h ⊗ G(b)` for each pin `h`
    /// of `A` and each `b ∈ S^ν` of `W`.
    pub fn tensor(left: &BasedModule, right: &Irrep, conv: TensorConvention) -> Result<BasedModule, RError> {
        let module = Arc::new(tensor(&left.module, &right.module)?);
        let dec = module.decomposition()?;
        let mults = dec.multiplicities();
        let dim_w = right.module.dim();
        let mut pins = Vec::new();
        for nu in mults.keys().rev() {
            for p in &left.pins {
                for b in highest_weight_set(&p.nu, &right.basis.crystal, nu, conv) {
                    let v = tensor_vectors(&p.h, &right.basis.elements[b], dim_w);
                    let h = dec.project(&v, nu);
                    if h.is_zero() {
                        return Err(RError::Pinning { nu: nu.clone(), detail: format!("projection of vertex {b} vanishes") });
                    }
                    if !module.is_highest_weight_vector(&h) {
                        return Err(RError::Pinning { nu: nu.clone(), detail: "projection is not highest weight".into() });
                    }
                    pins.push(Pin { nu: nu.clone(), h });
                }
            }
            let found = pins.iter().filter(|p| &p.nu == nu).count();
            if found != mults[nu] {
                return Err(RError::Pinning { nu: nu.clone(), detail: format!("{found} pins for multiplicity {}", mults[nu]) });
            }
        }
        Ok(BasedModule { module, pins })
    }

    pub fn theta(&self) -> Result<TransportedMap, RError> {
        Ok(make_theta(&self.module, &self.hws())?)
    }

    /// `Θ` pinned with `q^{+(ν,ν)/2 − (ν,ρ)}`, the sign-flipped exponent.
    pub fn theta_flipped(&self) -> Result<TransportedMap, RError> {
        let c = self.module.cartan().clone();
        let order = self.order();
        Ok(make_theta_with(&self.module, &self.hws(), |nu| {
            Ok(F::q_pow(-c.theta_exponent(nu)?, order)?)
        })?)
    }

    pub fn bar(&self) -> Result<TransportedMap, RError> {
        Ok(make_bar(&self.module, &self.hws())?)
    }

    fn lowest_pins(&self) -> Result<Vec<(ModuleVector, ModuleVector)>, RError> {
        self.pins.iter().map(|p| Ok((p.h.clone(), extremal_lowest(&self.module, &p.h)?))).collect()
    }

    pub fn gamma(&self) -> Result<TransportedMap, RError> {
        Ok(make_gamma(&self.module, &self.lowest_pins()?)?)
    }

    pub fn tw0_transport(&self) -> Result<TransportedMap, RError> {
        Ok(make_tw0_transport(&self.module, &self.lowest_pins()?)?)
    }

    pub fn tw0_braid(&self) -> Result<TransportedMap, RError> {
        Ok(make_tw0_braid(&self.module, BRAID_VARIANT)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Theta,
    Krls,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Theta => "theta",
            Method::Krls => "krls",
            Method::Oracle => "oracle",
        }
    }
}

/// An R-matrix on `V_λ ⊗ V_μ` in the left-major product basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RMatrixResult {
    pub method: Method,
    pub cartan: String,
    pub lambda: Weight,
    pub mu: Weight,
    pub order: u32,
    pub dims: (usize, usize),
    pub matrix: SparseMatrix,
}

impl RMatrixResult {
    pub fn to_json(&self) -> Value {
        let basis_order: Vec<[usize; 2]> =
            (0..self.dims.0).flat_map(|a| (0..self.dims.1).map(move |b| [a, b])).collect();
        json!({
            "method": self.method.name(),
            "cartan": self.cartan,
            "lambda": self.lambda.0,
            "mu": self.mu.0,
            "D": self.order,
            "basis_order": basis_order,
            "entries": self.matrix.to_json(),
        })
    }
}

/// `R = (Θ_A⁻¹ ⊗ Θ_B⁻¹) ∘ Θ_{A⊗B}`.
pub fn theta_r(a: &BasedModule, b: &BasedModule, ab: &BasedModule) -> Result<SparseMatrix, RError> {
    let (ta, (tb, tab)) = Exec::default().join(|| a.theta(), || Exec::default().join(|| b.theta(), || ab.theta()));
    let outer = ta?.inverse()?.kron(&tb?.inverse()?)?;
    let r = outer.compose(&tab?);
    debug_assert_eq!(r.linearity, crate::sysmorph::Linearity::QLinear);
    Ok(r.matrix)
}

/// The weight-diagonal operator `v ⊗ w -> q^{(wt v, wt w)} v ⊗ w`.
pub fn weight_prefactor(v: &Module, w: &Module) -> Result<SparseMatrix, RError> {
    let c = v.cartan();
    let order = v.order();
    let mut d = Vec::with_capacity(v.dim() * w.dim());
    for a in v.weights() {
        for b in w.weights() {
            d.push(F::q_pow(c.form(a, b)?, order)?);
        }
    }
    Ok(SparseMatrix::diagonal(d, order))
}

/// `R = q^{(wt,wt)} ∘ (T_{w0}⁻¹ ⊗ T_{w0}⁻¹) ∘ T_{w0, V⊗W}` with braid-product `T_{w0}`.
pub fn krls_r(v: &Module, w: &Module, vw: &Module) -> Result<SparseMatrix, RError> {
    let tv = make_tw0_braid(v, BRAID_VARIANT)?.inverse()?;
    let tw = make_tw0_braid(w, BRAID_VARIANT)?.inverse()?;
    let tvw = make_tw0_braid(vw, BRAID_VARIANT)?;
    Ok(weight_prefactor(v, w)?.mul(&tv.kron(&tw)?.compose(&tvw).matrix))
}

/// The unique `R` with `R Δ(X) = Δ^op(X) R` for all generators, diagonal
/// `q^{(wt v, wt w)}`, and off-diagonal entries only from basis tensors whose
/// left-factor weight is strictly higher.
pub fn oracle_r(v: &Module, w: &Module, vw: &Module, wv: &Module) -> Result<SparseMatrix, RError> {
    let order = v.order();
    let c = v.cartan();
    let (dv, dw) = (v.dim(), w.dim());
    let n = dv * dw;
    let left = |r: usize| v.weight(r / dw);
    let mut unknown: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for idx in vw.weight_spaces().values() {
        for &r in idx {
            for &k in idx {
                if c.dominance_lt(left(k), left(r)) {
                    let id = unknown.len();
                    unknown.insert((r, k), id);
                }
            }
        }
    }
    let diag = weight_prefactor(v, w)?;
    let p = flip(dv, dw, order);
    let pinv = flip(dw, dv, order);
    let mut equations = Vec::new();
    for i in 0..v.rank() {
        for (x, xop) in [(vw.e(i), pinv.mul(wv.e(i)).mul(&p)), (vw.f(i), pinv.mul(wv.f(i)).mul(&p))] {
            let xop_t = xop.transpose();
            let rhs = xop.mul(&diag).sub(&diag.mul(x));
            let mut eqs: BTreeMap<(usize, usize), BTreeMap<usize, F>> = BTreeMap::new();
            for (&(r, k), &u) in &unknown {
                // N[r,k] X[k,c] contributes to (r, c)
                for (col, val) in x.row(k).entries() {
                    let e = eqs.entry((r, *col)).or_default().entry(u).or_insert_with(|| F::zero(order));
                    *e = &*e + val;
                }
                // -Xop[r', r] N[r,k] contributes to (r', k)
                for (row, val) in xop_t.row(r).entries() {
                    let e = eqs.entry((*row, k)).or_default().entry(u).or_insert_with(|| F::zero(order));
                    *e = &*e - val;
                }
            }
            for (r, col, val) in rhs.triplets() {
                eqs.entry((r, col)).or_default();
                let _ = val;
            }
            for ((r, col), lhs) in eqs {
                let lhs = SparseVector::from_entries(lhs);
                equations.push((lhs, rhs.get(r, col)));
            }
        }
    }
    match solve_sparse(unknown.len(), equations, order) {
        SolveOutcome::Unique(x) => {
            let off = unknown.iter().map(|(&(r, k), &u)| (r, k, x[u].clone()));
            Ok(diag.add(&SparseMatrix::from_triplets(n, n, order, off)))
        }
        SolveOutcome::Inconsistent => Err(RError::Oracle("no solution".into())),
        SolveOutcome::Underdetermined { free } => Err(RError::Oracle(format!("{free} free parameters"))),
    }
}

/// One pair `(V_λ, V_μ)` with everything needed by the three methods.
#[derive(Clone, Debug)]
pub struct Pair {
    pub v: Arc<Irrep>,
    pub w: Arc<Irrep>,
    pub product: BasedModule,
    /// `V_μ ⊗ V_λ`, needed for `Δ^op` and braidings back
    pub reversed: Arc<Module>,
}

impl Pair {
    pub fn new(v: Arc<Irrep>, w: Arc<Irrep>, conv: TensorConvention) -> Result<Self, RError> {
        let product = BasedModule::tensor(&v.based(), &w, conv)?;
        let reversed = Arc::new(tensor(&w.module, &v.module)?);
        Ok(Pair { v, w, product, reversed })
    }

    fn result(&self, method: Method, matrix: SparseMatrix) -> RMatrixResult {
        RMatrixResult {
            method,
            cartan: self.v.module.cartan().label().to_string(),
            lambda: self.v.highest.clone(),
            mu: self.w.highest.clone(),
            order: self.v.module.order(),
            dims: (self.v.module.dim(), self.w.module.dim()),
            matrix,
        }
    }

    pub fn r_theta(&self) -> Result<RMatrixResult, RError> {
        Ok(self.result(Method::Theta, theta_r(&self.v.based(), &self.w.based(), &self.product)?))
    }

    pub fn r_krls(&self) -> Result<RMatrixResult, RError> {
        Ok(self.result(Method::Krls, krls_r(&self.v.module, &self.w.module, &self.product.module)?))
    }

    pub fn r_oracle(&self) -> Result<RMatrixResult, RError> {
        Ok(self.result(Method::Oracle, oracle_r(&self.v.module, &self.w.module, &self.product.module, &self.reversed)?))
    }

    pub fn r(&self, method: Method) -> Result<RMatrixResult, RError> {
        match method {
            Method::Theta => self.r_theta(),
            Method::Krls => self.r_krls(),
            Method::Oracle => self.r_oracle(),
        }
    }

    /// The braiding `σ = Flip ∘ R : V ⊗ W -> W ⊗ V`.
    pub fn braiding(&self) -> Result<SparseMatrix, RError> {
        let r = self.r_theta()?;
        Ok(flip(self.v.module.dim(), self.w.module.dim(), self.v.module.order()).mul(&r.matrix))
    }
}

/// Caches irreducibles and pairs for one Cartan datum.
pub struct Session {
    pub cartan: Arc<CartanDatum>,
    convention: OnceLock<TensorConvention>,
    irreps: Mutex<BTreeMap<Weight, Arc<Irrep>>>,
    pairs: Mutex<BTreeMap<(Weight, Weight), Arc<Pair>>>,
}

impl Session {
    pub fn new(cartan: CartanDatum) -> Self {
        Session {
            cartan: Arc::new(cartan),
            convention: OnceLock::new(),
            irreps: Mutex::new(BTreeMap::new()),
            pairs: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn from_type(label: &str) -> Result<Self, RError> {
        Ok(Self::new(CartanDatum::from_type(label)?))
    }

    pub fn convention(&self) -> Result<TensorConvention, RError> {
        if let Some(c) = self.convention.get() {
            return Ok(*c);
        }
        let c = calibrate_tensor_convention(&self.cartan)?;
        Ok(*self.convention.get_or_init(|| c))
    }

    pub fn irrep(&self, lambda: &Weight) -> Result<Arc<Irrep>, RError> {
        if let Some(x) = self.irreps.lock().expect("irrep cache").get(lambda) {
            return Ok(x.clone());
        }
        let x = Arc::new(Irrep::new(&self.cartan, lambda)?);
        Ok(self.irreps.lock().expect("irrep cache").entry(lambda.clone()).or_insert(x).clone())
    }

    pub fn pair(&self, lambda: &Weight, mu: &Weight) -> Result<Arc<Pair>, RError> {
        let key = (lambda.clone(), mu.clone());
        if let Some(x) = self.pairs.lock().expect("pair cache").get(&key) {
            return Ok(x.clone());
        }
        let p = Arc::new(Pair::new(self.irrep(lambda)?, self.irrep(mu)?, self.convention()?)?);
        Ok(self.pairs.lock().expect("pair cache").entry(key).or_insert(p).clone())
    }
}

/// One failing instance of a check, with both sides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub input: String,
    pub lhs: ModuleVector,
    pub rhs: ModuleVector,
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub name: String,
    pub pass: bool,
    pub counterexamples: Vec<Counterexample>,
    pub elapsed: Duration,
}

impl CheckReport {
    fn new(name: &str, counterexamples: Vec<Counterexample>, start: Instant) -> Self {
        CheckReport { name: name.into(), pass: counterexamples.is_empty(), counterexamples, elapsed: start.elapsed() }
    }

    /// Merges sub-reports; passes iff all pass.
    pub fn all(name: &str, parts: Vec<CheckReport>) -> Self {
        let elapsed = parts.iter().map(|p| p.elapsed).sum();
        let counterexamples: Vec<Counterexample> = parts
            .into_iter()
            .flat_map(|p| {
                let n = p.name;
                p.counterexamples.into_iter().map(move |mut c| {
                    c.input = format!("{n}: {}", c.input);
                    c
                })
            })
            .collect();
        CheckReport { name: name.into(), pass: counterexamples.is_empty(), counterexamples, elapsed }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "pass": self.pass,
            "counterexamples": self.counterexamples.iter().map(|c| json!({
                "input": c.input,
                "lhs": c.lhs.to_json(),
                "rhs": c.rhs.to_json(),
            })).collect::<Vec<_>>(),
        })
    }
}

const MAX_COUNTEREXAMPLES: usize = 3;

fn matrix_diffs(lhs: &SparseMatrix, rhs: &SparseMatrix, label: &str) -> Vec<Counterexample> {
    if lhs == rhs {
        return Vec::new();
    }
    let (lc, rc) = (lhs.transpose(), rhs.transpose());
    (0..lhs.ncols().max(rhs.ncols()))
        .filter(|&j| lc.row(j) != rc.row(j))
        .take(MAX_COUNTEREXAMPLES)
        .map(|j| Counterexample { input: format!("{label} on basis vector {j}"), lhs: lc.row(j).clone(), rhs: rc.row(j).clone() })
        .collect()
}

/// Exact matrix equality as a report.
pub fn compare(name: &str, lhs: &SparseMatrix, rhs: &SparseMatrix) -> CheckReport {
    let start = Instant::now();
    CheckReport::new(name, matrix_diffs(lhs, rhs, "matrix"), start)
}

/// `σ X_source = X_target σ` for every `E_i`, `F_i`, `K_i`.
pub fn check_intertwiner(name: &str, sigma: &SparseMatrix, source: &Module, target: &Module) -> CheckReport {
    let start = Instant::now();
    let mut ce = Vec::new();
    for i in 0..source.rank() {
        let gens = [
            ("E", source.e(i).clone(), target.e(i).clone()),
            ("F", source.f(i).clone(), target.f(i).clone()),
            ("K", source.k(i, 1), target.k(i, 1)),
        ];
        for (g, xs, xt) in gens {
            ce.extend(matrix_diffs(&sigma.mul(&xs), &xt.mul(sigma), &format!("{g}_{}", i + 1)));
        }
    }
    CheckReport::new(name, ce, start)
}

/// `Flip ∘ (ξ_A⁻¹ ⊗ ξ_B⁻¹) ∘ ξ_{A⊗B}` for coalgebra anti-automorphisms, and
/// `(ξ_A ⊗ ξ_B) ∘ ξ_{A⊗B}⁻¹` for coalgebra automorphisms; must be a module map.
#[allow(clippy::too_many_arguments)]
pub fn build_commutor(
    xa: &TransportedMap,
    xb: &TransportedMap,
    xab: &TransportedMap,
    a: &Module,
    b: &Module,
    ab: &Module,
    ba: &Module,
    anti: bool,
) -> Result<SparseMatrix, RError> {
    let order = a.order();
    if anti {
        let inner = xa.inverse()?.kron(&xb.inverse()?)?.compose(xab);
        let m = flip(a.dim(), b.dim(), order).mul(&inner.matrix);
        let m = match inner.linearity {
            crate::sysmorph::Linearity::QLinear => m,
            crate::sysmorph::Linearity::BarLinear => return Err(RError::NotIntertwiner("composite is bar-linear".into())),
        };
        let rep = check_intertwiner("commutor", &m, ab, ba);
        if !rep.pass {
            return Err(RError::NotIntertwiner(rep.counterexamples[0].input.clone()));
        }
        Ok(m)
    } else {
        let m = xa.kron(xb)?.compose(&xab.inverse()?);
        let rep = check_intertwiner("commutor", &m.matrix, ab, ab);
        if !rep.pass {
            return Err(RError::NotIntertwiner(rep.counterexamples[0].input.clone()));
        }
        Ok(m.matrix)
    }
}

/// All three R-matrices agree, `Flip ∘ R` intertwines, `R` preserves total
/// weight, and `R(b_λ ⊗ b_μ) = q^{(λ,μ)} b_λ ⊗ b_μ`.
pub fn check_method_agreement(pair: &Pair) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let (t, (k, o)) = Exec::default().join(|| pair.r_theta(), || Exec::default().join(|| pair.r_krls(), || pair.r_oracle()));
    let (t, k, o) = (t?, k?, o?);
    let mut parts = vec![compare("theta = krls", &t.matrix, &k.matrix), compare("theta = oracle", &t.matrix, &o.matrix)];
    let sigma = flip(t.dims.0, t.dims.1, t.order).mul(&t.matrix);
    parts.push(check_intertwiner("Flip∘R intertwines", &sigma, &pair.product.module, &pair.reversed));
    let mut ce = Vec::new();
    for (r, c, _) in t.matrix.triplets() {
        if pair.product.module.weight(r) != pair.product.module.weight(c) {
            ce.push(Counterexample {
                input: format!("entry ({r},{c}) joins different weights"),
                lhs: SparseVector::unit(r, t.order),
                rhs: SparseVector::unit(c, t.order),
            });
            break;
        }
    }
    parts.push(CheckReport::new("R preserves weight", ce, start));
    let mut rep = CheckReport::all("method agreement", parts);
    rep.elapsed = start.elapsed();
    Ok(rep)
}

/// `R(b_λ ⊗ G(c)) = q^{(λ, wt c)} b_λ ⊗ G(c)` for every global-basis element `c` of `W`.
pub fn check_normalization(pair: &Pair, r: &SparseMatrix) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let c = pair.v.module.cartan();
    let order = pair.v.module.order();
    let dim_w = pair.w.module.dim();
    let mut ce = Vec::new();
    for (b, g) in pair.w.basis.elements.iter().enumerate() {
        let x = tensor_vectors(pair.v.hw(), g, dim_w);
        let wt = &pair.w.basis.crystal.vertices[b].weight;
        let expected = x.scale(&F::q_pow(c.form(&pair.v.highest, wt)?, order)?);
        let got = r.apply(&x);
        if got != expected {
            ce.push(Counterexample { input: format!("b_λ ⊗ G(b{b})"), lhs: got, rhs: expected });
        }
    }
    Ok(CheckReport::new("normalization on b_λ ⊗ c", ce, start))
}

/// r_theta is unchanged when the highest-weight pins of both factors are rescaled.
pub fn check_scaling_independence(pair: &Pair, conv: TensorConvention) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let order = pair.v.module.order();
    let base = pair.r_theta()?.to_json().to_string();
    let scalars = [
        F::q_int(1, order),
        F::one(order) + F::q_int(1, order),
        F::from_int(2, order) - F::q_int(-1, order),
    ];
    let mut ce = Vec::new();
    for (k, z) in scalars.iter().enumerate() {
        let zw = &scalars[(k + 1) % scalars.len()];
        let v = Arc::new(Irrep::with_hw(pair.v.module.clone(), &pair.v.hw().scale(z))?);
        let w = Arc::new(Irrep::with_hw(pair.w.module.clone(), &pair.w.hw().scale(zw))?);
        let scaled = Pair::new(v.clone(), w, conv)?;
        let r = scaled.r_theta()?;
        if r.to_json() != base {
            let diffs = matrix_diffs(&r.matrix, &pair.r_theta()?.matrix, &format!("scaling {z}"));
            ce.extend(diffs);
        }
        // the factor map itself scales by z / bar(z)
        let t0 = pair.v.based().theta()?;
        let t1 = v.based().theta()?;
        let ratio = z / &z.bar();
        ce.extend(matrix_diffs(&t1.matrix, &t0.matrix.scale(&ratio), &format!("Θ_V under scaling {z}")));
    }
    Ok(CheckReport::new("scaling independence", ce, start))
}

/// `σ_{W,V} σ_{V,W}` acts on every isotypic component of `V ⊗ W` by one scalar;
/// returns the report and the scalar per highest weight.
pub fn check_double_braiding(pair: &Pair, back: &Pair) -> Result<(CheckReport, BTreeMap<Weight, F>), RError> {
    let start = Instant::now();
    let s2 = back.braiding()?.mul(&pair.braiding()?);
    let mut scalars: BTreeMap<Weight, F> = BTreeMap::new();
    let mut ce = Vec::new();
    let dec = pair.product.module.decomposition()?;
    for comp in &dec.components {
        let img = s2.apply(&comp.hw);
        let (k, x) = &comp.hw.entries()[0];
        let c = img.get(*k).cloned().unwrap_or_else(|| F::zero(pair.v.module.order())) / x;
        let expected = comp.hw.scale(&c);
        let known = scalars.entry(comp.highest.clone()).or_insert_with(|| c.clone());
        if img != expected || *known != c {
            ce.push(Counterexample { input: format!("component of weight {}", comp.highest), lhs: img, rhs: expected });
        }
    }
    Ok((CheckReport::new("double braiding is scalar on components", ce, start), scalars))
}

/// A braiding perturbation used by the negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    None,
    /// scale the top isotypic block of `V ⊗ W` by `q` before braiding
    ScaleBlock,
    /// `R ∘ Flip` instead of `Flip ∘ R` (only square when both factors agree)
    WrongFlip,
    /// `Θ` pinned with the sign-flipped exponent
    ThetaSign,
}

fn braid_with_fault(
    a: &BasedModule,
    b: &BasedModule,
    ab: &BasedModule,
    fault: Fault,
) -> Result<SparseMatrix, RError> {
    let order = a.order();
    let r = if fault == Fault::ThetaSign {
        let outer = a.theta_flipped()?.inverse()?.kron(&b.theta_flipped()?.inverse()?)?;
        outer.compose(&ab.theta_flipped()?).matrix
    } else {
        theta_r(a, b, ab)?
    };
    let p = flip(a.dim(), b.dim(), order);
    Ok(match fault {
        Fault::WrongFlip => r.mul(&flip(b.dim(), a.dim(), order)),
        Fault::ScaleBlock => {
            let dec = ab.module.decomposition()?;
            let top = dec.components[0].highest.clone();
            let q = F::q_int(1, order);
            let cols: Vec<ModuleVector> = (0..ab.dim())
                .map(|k| {
                    let e = SparseVector::unit(k, order);
                    let blk = dec.project(&e, &top);
                    e.add(&blk.scale(&(&q - &F::one(order))))
                })
                .collect();
            p.mul(&r).mul(&SparseMatrix::from_columns(ab.dim(), order, &cols))
        }
        _ => p.mul(&r),
    })
}

/// The modules for one hexagon triple.
pub struct Triple {
    pub u: BasedModule,
    pub v: BasedModule,
    pub w: BasedModule,
    pub uv: BasedModule,
    pub uw: BasedModule,
    pub vw: BasedModule,
    pub uvw: BasedModule,
}

impl Triple {
    pub fn new(u: &Irrep, v: &Irrep, w: &Irrep, conv: TensorConvention) -> Result<Self, RError> {
        let uv = BasedModule::tensor(&u.based(), v, conv)?;
        let uw = BasedModule::tensor(&u.based(), w, conv)?;
        let vw = BasedModule::tensor(&v.based(), w, conv)?;
        let uvw = BasedModule::tensor(&uv, w, conv)?;
        Ok(Triple { u: u.based(), v: v.based(), w: w.based(), uv, uw, vw, uvw })
    }
}

/// Both hexagon equalities
/// `(σ_{U,W} ⊗ 1)(1 ⊗ σ_{V,W}) = σ_{U⊗V,W}` and `(1 ⊗ σ_{U,W})(σ_{U,V} ⊗ 1) = σ_{U,V⊗W}`,
/// with the fault applied to the two-factor braidings.
pub fn check_hexagon(t: &Triple, fault: Fault) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let order = t.u.order();
    let (du, dv, dw) = (t.u.dim(), t.v.dim(), t.w.dim());
    let id = |n| SparseMatrix::identity(n, order);
    let s_uw = braid_with_fault(&t.u, &t.w, &t.uw, fault)?;
    let s_vw = braid_with_fault(&t.v, &t.w, &t.vw, fault)?;
    let s_uv = braid_with_fault(&t.u, &t.v, &t.uv, fault)?;
    // the triple product is the same module whichever way it is bracketed
    let s_uv_w = flip(du * dv, dw, order).mul(&theta_r(&t.uv, &t.w, &t.uvw)?);
    let s_u_vw = flip(du, dv * dw, order).mul(&theta_r(&t.u, &t.vw, &t.uvw)?);
    let lhs1 = s_uw.kron(&id(dv)).mul(&id(du).kron(&s_vw));
    let lhs2 = id(dv).kron(&s_uw).mul(&s_uv.kron(&id(dw)));
    let parts = vec![compare("first hexagon", &lhs1, &s_uv_w), compare("second hexagon", &lhs2, &s_u_vw)];
    let mut rep = CheckReport::all("hexagon", parts);
    rep.elapsed = start.elapsed();
    Ok(rep)
}

/// Braid relation on `V ⊗ V ⊗ V` together with the module-map property of `σ`.
pub fn check_ybe(v: &Irrep, pair: &BasedModule, fault: Fault) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let order = v.module.order();
    let vb = v.based();
    let s = braid_with_fault(&vb, &vb, pair, fault)?;
    let id = SparseMatrix::identity(v.module.dim(), order);
    let s12 = s.kron(&id);
    let s23 = id.kron(&s);
    let lhs = s12.mul(&s23).mul(&s12);
    let rhs = s23.mul(&s12).mul(&s23);
    let parts = vec![
        compare("braid relation", &lhs, &rhs),
        check_intertwiner("σ intertwines", &s, &pair.module, &pair.module),
    ];
    let mut rep = CheckReport::all("Yang-Baxter", parts);
    rep.elapsed = start.elapsed();
    Ok(rep)
}

/// The operator identities on an irreducible:
/// `Γ = bar ∘ T_{w0}⁻¹`, `Θ = K_{2Hρ} ∘ bar ∘ J`, `J` diagonal formula, `Θ`
/// diagonal on the global basis, `Γ⁻¹ Θ = J T_{w0}`, `Θ ∘ Θ = 1`, and braid
/// product = transported `T_{w0}`.
pub fn check_operator_identities(v: &Irrep) -> Result<CheckReport, RError> {
    use crate::sysmorph::{make_j, make_j_transport, make_k2rho};
    let start = Instant::now();
    let m = &v.module;
    let b = v.based();
    let (theta, gamma, bar) = (b.theta()?, b.gamma()?, b.bar()?);
    let (tb, tt) = (b.tw0_braid()?, b.tw0_transport()?);
    let j = make_j(m)?;
    let k2 = make_k2rho(m)?;
    let mut parts = Vec::new();
    parts.push(compare("T_w0 braid = transport", &tb.matrix, &tt.matrix));
    let g1 = bar.compose(&tb.inverse()?);
    parts.push(compare("Γ = bar∘T⁻¹", &gamma.matrix, &g1.matrix));
    let t2 = k2.compose(&bar).compose(&j);
    parts.push(compare("Θ = K∘bar∘J", &theta.matrix, &t2.matrix));
    parts.push(compare("J transport = diagonal", &make_j_transport(m, &b.hws())?.matrix, &j.matrix));
    let mut ce = Vec::new();
    let c = m.cartan();
    for (k, g) in v.basis.elements.iter().enumerate() {
        let wt = &v.basis.crystal.vertices[k].weight;
        let _ = wt;
        let img = theta.apply(g);
        let (idx, x) = &g.entries()[0];
        let s = img.get(*idx).cloned().unwrap_or_else(|| F::zero(m.order())) / x;
        if img != g.scale(&s) {
            ce.push(Counterexample { input: format!("Θ on G(b{k})"), lhs: img, rhs: g.scale(&s) });
        }
    }
    let _ = c;
    parts.push(CheckReport::new("Θ diagonal on global basis", ce, start));
    let l5 = gamma.inverse()?.compose(&theta);
    let r5 = j.compose(&tb);
    parts.push(compare("Γ⁻¹Θ = J T", &l5.matrix, &r5.matrix));
    let tt2 = theta.compose(&theta);
    parts.push(compare("Θ∘Θ = 1", &tt2.matrix, &SparseMatrix::identity(m.dim(), m.order())));
    let mut rep = CheckReport::all(&format!("operator identities on V{}", v.highest), parts);
    rep.elapsed = start.elapsed();
    Ok(rep)
}

/// `(Γ_V ⊗ Γ_W) ∘ Γ_{V⊗W}⁻¹ = 1` and `Θ_{V⊗W} ∘ Θ_{V⊗W} = 1`.
pub fn check_pair_identities(pair: &Pair) -> Result<CheckReport, RError> {
    let start = Instant::now();
    let (gv, gw, gvw) = (pair.v.based().gamma()?, pair.w.based().gamma()?, pair.product.gamma()?);
    let lemma = gv.kron(&gw)?.compose(&gvw.inverse()?);
    let id = SparseMatrix::identity(pair.product.dim(), pair.product.order());
    let th = pair.product.theta()?;
    let parts = vec![
        compare("Γ-lemma", &lemma.matrix, &id),
        compare("Θ∘Θ = 1 on V⊗W", &th.compose(&th).matrix, &id),
        compare(
            "T_w0 braid = transport on V⊗W",
            &pair.product.tw0_braid()?.matrix,
            &pair.product.tw0_transport()?.matrix,
        ),
    ];
    let mut rep = CheckReport::all("pair identities", parts);
    rep.elapsed = start.elapsed();
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(x: &[i64]) -> Weight {
        Weight(x.to_vec())
    }

    #[test]
    fn a1_fundamental_r_matrix() {
        let s = Session::from_type("A1").unwrap();
        let p = s.pair(&w(&[1]), &w(&[1])).unwrap();
        let o = p.r_oracle().unwrap().matrix;
        let order = o.order();
        let qh = |n: i64| F::q_pow(crate::qscalar::Exponent::new(n, 2), order).unwrap();
        // diagonal q^{1/2}, q^{-1/2}, q^{-1/2}, q^{1/2}
        assert_eq!(o.get(0, 0), qh(1));
        assert_eq!(o.get(1, 1), qh(-1));
        assert_eq!(o.get(2, 2), qh(-1));
        assert_eq!(o.get(3, 3), qh(1));
        assert_eq!(o.nnz(), 5);
        // R(v- ⊗ v+) = q^{-1/2} v- ⊗ v+ + (q^{1/2} - q^{-3/2}) v+ ⊗ v-
        assert_eq!(o.get(1, 2), qh(1) - qh(-3));
        assert_eq!(p.r_theta().unwrap().matrix, o);
        assert_eq!(p.r_krls().unwrap().matrix, o);
    }

    #[test]
    fn a1_pins() {
        let s = Session::from_type("A1").unwrap();
        let p = s.pair(&w(&[1]), &w(&[1])).unwrap();
        assert_eq!(p.product.pins.len(), 2);
        assert_eq!(p.product.pins[0].h, SparseVector::unit(0, p.product.order()));
        let h0 = &p.product.pins[1].h;
        assert_eq!(p.product.pins[1].nu, w(&[0]));
        let ratio = h0.get(1).unwrap() / h0.get(2).unwrap();
        let order = p.product.order();
        assert!(ratio == -F::q_int(1, order) || ratio == -F::q_int(-1, order), "{ratio}");
    }

    #[test]
    fn a2_pin_count() {
        let s = Session::from_type("A2").unwrap();
        assert_eq!(s.pair(&w(&[1, 0]), &w(&[1, 0])).unwrap().product.pins.len(), 2);
    }

    #[test]
    fn agreement_and_checks_small() {
        let s = Session::from_type("A1").unwrap();
        let p = s.pair(&w(&[1]), &w(&[2])).unwrap();
        assert!(check_method_agreement(&p).unwrap().pass);
        let r = p.r_theta().unwrap().matrix;
        assert!(check_normalization(&p, &r).unwrap().pass);
        assert!(check_pair_identities(&p).unwrap().pass);
        assert!(check_operator_identities(&p.v).unwrap().pass);
        assert!(check_scaling_independence(&p, s.convention().unwrap()).unwrap().pass);
        let back = s.pair(&w(&[2]), &w(&[1])).unwrap();
        let (rep, scalars) = check_double_braiding(&p, &back).unwrap();
        assert!(rep.pass);
        assert_eq!(scalars.len(), 2);
    }

    #[test]
    fn hexagon_and_ybe_a1() {
        let s = Session::from_type("A1").unwrap();
        let v = s.irrep(&w(&[1])).unwrap();
        let conv = s.convention().unwrap();
        let t = Triple::new(&v, &v, &v, conv).unwrap();
        assert!(check_hexagon(&t, Fault::None).unwrap().pass);
        assert!(!check_hexagon(&t, Fault::ScaleBlock).unwrap().pass);
        let p = s.pair(&w(&[1]), &w(&[1])).unwrap();
        assert!(check_ybe(&v, &p.product, Fault::None).unwrap().pass);
        assert!(!check_ybe(&v, &p.product, Fault::WrongFlip).unwrap().pass);
    }

    #[test]
    fn theta_sign_fault_detected() {
        let s = Session::from_type("A1").unwrap();
        let p = s.pair(&w(&[1]), &w(&[1])).unwrap();
        let bad = braid_with_fault(&p.v.based(), &p.w.based(), &p.product, Fault::ThetaSign).unwrap();
        assert_ne!(bad, p.braiding().unwrap());
    }

    #[test]
    fn identity_commutor_is_not_a_module_map() {
        let s = Session::from_type("A1").unwrap();
        let p = s.pair(&w(&[1]), &w(&[2])).unwrap();
        let order = p.v.module.order();
        let id = |n| TransportedMap::identity(n, order);
        let res = build_commutor(
            &id(p.v.module.dim()),
            &id(p.w.module.dim()),
            &id(p.product.dim()),
            &p.v.module,
            &p.w.module,
            &p.product.module,
            &p.reversed,
            true,
        );
        assert!(matches!(res, Err(RError::NotIntertwiner(_))));
        let (tv, tw, tvw) = (p.v.based().theta().unwrap(), p.w.based().theta().unwrap(), p.product.theta().unwrap());
        let sigma = build_commutor(&tv, &tw, &tvw, &p.v.module, &p.w.module, &p.product.module, &p.reversed, true).unwrap();
        assert_eq!(sigma, p.braiding().unwrap());
    }
}
