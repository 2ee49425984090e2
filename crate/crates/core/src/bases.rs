//! Kashiwara operators, crystal bases at q = ∞, global bases of irreducible
//! modules, tensor-product crystals and the sets S^ν_{λ,μ}.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cartan::{CartanDatum, CartanError, Weight};
use crate::exec::Exec;
use crate::linalg::{dense, IncrementalBasis, SparseMatrix, SparseVector};
use crate::qscalar::{Exponent, FieldElement, QError};
use crate::sysmorph::{make_bar, MorphError, TransportedMap};
use crate::uqmod::{generate_submodule, tensor, ModError, Module, ModuleVector};

type F = FieldElement;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum BasesError {
    #[error("node {node} string decomposition at weight {weight} has {found} vectors, expected {expected}")]
    StringRank { node: usize, weight: Weight, found: usize, expected: usize },
    #[error("vector is not a highest-weight vector")]
    NotHighestWeight,
    #[error("highest-weight vector generates {spanned} of {dim} dimensions")]
    NotGenerating { spanned: usize, dim: usize },
    #[error("crystal lattice at weight {weight}: {detail}")]
    Lattice { weight: Weight, detail: String },
    #[error("crystal: {0}")]
    Crystal(String),
    #[error("triangularization at weight {weight} produced {found} of {expected} basis elements")]
    Triangularization { weight: Weight, found: usize, expected: usize },
    #[error("global basis element for vertex {vertex} is not bar-invariant")]
    NotBarInvariant { vertex: usize },
    #[error("global basis elements are linearly dependent")]
    NotABasis,
    #[error("{operator}_{node} at vertex {vertex} does not reduce to the crystal edge")]
    ResidueEdge { node: usize, vertex: usize, operator: &'static str },
    #[error("neither tensor signature convention matches the Kashiwara operator residues")]
    Calibration,
    #[error("vertex {vertex} of S^nu projects to zero on the {nu} component")]
    HighestWeightSet { vertex: usize, nu: Weight },
    #[error(transparent)]
    Morph(#[from] MorphError),
    #[error(transparent)]
    Module(#[from] ModError),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Field(#[from] QError),
}

/// `(Ẽ_i, F̃_i)` on all of `m`, built from the divided-power i-string decomposition.
pub fn kashiwara_operators(m: &Module, i: usize) -> Result<(SparseMatrix, SparseMatrix), BasesError> {
    let order = m.order();
    let c = m.cartan();
    let et = m.e(i).transpose();
    let alpha = c.simple_root(i);
    let top = m.weights().iter().map(|w| c.pairing(i, w).abs()).max().unwrap_or(0) as u32;
    let fd: Vec<SparseMatrix> = (0..=top + 1).map(|k| m.f_divided(i, k)).collect();
    let mut basis = Vec::with_capacity(m.dim());
    let mut up = Vec::with_capacity(m.dim());
    let mut down = Vec::with_capacity(m.dim());
    for (mu, idx) in m.weight_spaces() {
        let target = mu + &alpha;
        let kernel: Vec<SparseVector> = if m.weight_spaces().contains_key(&target) {
            let tidx = m.weight_space(&target);
            let pos: BTreeMap<usize, usize> = tidx.iter().enumerate().map(|(a, &b)| (b, a)).collect();
            let mut rows = vec![vec![F::zero(order); idx.len()]; tidx.len()];
            for (col, &g) in idx.iter().enumerate() {
                for (r, v) in et.row(g).entries() {
                    rows[pos[r]][col] = v.clone();
                }
            }
            dense::null_space(&rows, idx.len(), order)
                .into_iter()
                .map(|v| SparseVector::from_entries(idx.iter().copied().zip(v)))
                .collect()
        } else {
            idx.iter().map(|&g| SparseVector::unit(g, order)).collect()
        };
        let n = c.pairing(i, mu);
        if n < 0 && !kernel.is_empty() {
            return Err(BasesError::StringRank { node: i, weight: mu.clone(), found: kernel.len(), expected: 0 });
        }
        for u in kernel {
            let string: Vec<SparseVector> = (0..=n as usize).map(|k| fd[k].apply(&u)).collect();
            for k in 0..string.len() {
                basis.push(string[k].clone());
                up.push(string.get(k + 1).cloned().unwrap_or_default());
                down.push(if k == 0 { SparseVector::new() } else { string[k - 1].clone() });
            }
        }
    }
    if basis.len() != m.dim() {
        return Err(BasesError::StringRank { node: i, weight: Weight::zero(m.rank()), found: basis.len(), expected: m.dim() });
    }
    let p = SparseMatrix::from_columns(m.dim(), order, &basis);
    let pinv = p.inverse().ok_or(BasesError::StringRank {
        node: i,
        weight: Weight::zero(m.rank()),
        found: basis.len(),
        expected: m.dim(),
    })?;
    let e = SparseMatrix::from_columns(m.dim(), order, &down).mul(&pinv);
    let f = SparseMatrix::from_columns(m.dim(), order, &up).mul(&pinv);
    Ok((e, f))
}

/// Kashiwara operators for every node, computed concurrently when parallel.
pub fn all_kashiwara_operators(m: &Module) -> Result<Vec<(SparseMatrix, SparseMatrix)>, BasesError> {
    Exec::default().map_range(m.rank(), |i| kashiwara_operators(m, i)).into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystalVertex {
    pub weight: Weight,
    pub epsilon: Vec<i64>,
    pub phi: Vec<i64>,
    pub label: String,
}

/// A crystal with `f_i` and `e_i` as partial maps on vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystalGraph {
    pub vertices: Vec<CrystalVertex>,
    /// `f[i][b]`
    pub f: Vec<Vec<Option<usize>>>,
    /// `e[i][b]`
    pub e: Vec<Vec<Option<usize>>>,
    pub highest: Option<usize>,
}

impl CrystalGraph {
    /// Builds the graph from weights and `f` edges; `e`, `ε` and `φ` are derived.
    pub fn from_edges(
        weights: Vec<Weight>,
        labels: Vec<String>,
        f: Vec<Vec<Option<usize>>>,
        highest: Option<usize>,
    ) -> Result<Self, BasesError> {
        let n = weights.len();
        let rank = f.len();
        let mut e = vec![vec![None; n]; rank];
        for i in 0..rank {
            for (b, t) in f[i].iter().enumerate() {
                if let Some(t) = *t {
                    if e[i][t].replace(b).is_some() {
                        return Err(BasesError::Crystal(format!("two f_{} edges into vertex {t}", i + 1)));
                    }
                }
            }
        }
        let chain = |edges: &Vec<Option<usize>>, b: usize| {
            let mut k = 0;
            let mut cur = b;
            while let Some(nx) = edges[cur] {
                k += 1;
                cur = nx;
                if k > n as i64 {
                    break;
                }
            }
            k
        };
        let vertices = (0..n)
            .map(|b| CrystalVertex {
                weight: weights[b].clone(),
                epsilon: (0..rank).map(|i| chain(&e[i], b)).collect(),
                phi: (0..rank).map(|i| chain(&f[i], b)).collect(),
                label: labels[b].clone(),
            })
            .collect();
        Ok(CrystalGraph { vertices, f, e, highest })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.f.len()
    }

    /// Edge inverse pairs, weight shifts and `φ - ε = ⟨H_i, wt⟩`.
    pub fn check_axioms(&self, c: &CartanDatum) -> Result<(), BasesError> {
        for i in 0..self.rank() {
            let alpha = c.simple_root(i);
            for (b, v) in self.vertices.iter().enumerate() {
                if let Some(t) = self.f[i][b] {
                    if self.e[i][t] != Some(b) {
                        return Err(BasesError::Crystal(format!("e_{0} f_{0} differs from identity at {1}", i + 1, v.label)));
                    }
                    if self.vertices[t].weight != &v.weight - &alpha {
                        return Err(BasesError::Crystal(format!("f_{} shifts the weight of {} wrongly", i + 1, v.label)));
                    }
                }
                if let Some(t) = self.e[i][b] {
                    if self.f[i][t] != Some(b) {
                        return Err(BasesError::Crystal(format!("f_{0} e_{0} differs from identity at {1}", i + 1, v.label)));
                    }
                }
                if v.phi[i] - v.epsilon[i] != c.pairing(i, &v.weight) {
                    return Err(BasesError::Crystal(format!("phi_{0} - eps_{0} is not the weight pairing at {1}", i + 1, v.label)));
                }
            }
        }
        Ok(())
    }

    pub fn highest_weight_vertices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&b| self.vertices[b].epsilon.iter().all(|&x| x == 0)).collect()
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph crystal {\n");
        for (b, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "  v{b} [label=\"{}\"];", v.weight);
        }
        for b in 0..self.len() {
            for i in 0..self.rank() {
                if let Some(t) = self.f[i][b] {
                    let _ = writeln!(s, "  v{b} -> v{t} [label=\"{}\"];", i + 1);
                }
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|v| json!({
                "label": v.label,
                "weight": v.weight.0,
                "epsilon": v.epsilon,
                "phi": v.phi,
            })).collect::<Vec<_>>(),
            "f": self.f,
            "highest": self.highest,
        })
    }
}

/// Orientation of the signature rule for `f_i(a ⊗ b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TensorConvention {
    /// `f_i a ⊗ b` if `φ_i(a) > ε_i(b)`, else `a ⊗ f_i b`
    Kashiwara,
    /// `f_i a ⊗ b` if `φ_i(b) ≤ ε_i(a)`, else `a ⊗ f_i b`
    AntiKashiwara,
}

impl TensorConvention {
    /// Whether `f_i` acts on the left factor.
    fn f_left(self, a: &CrystalVertex, b: &CrystalVertex, i: usize) -> bool {
        match self {
            TensorConvention::Kashiwara => a.phi[i] > b.epsilon[i],
            TensorConvention::AntiKashiwara => b.phi[i] <= a.epsilon[i],
        }
    }

    /// `ε_i(a ⊗ b)` from the factor data.
    pub fn epsilon(self, a: (i64, i64), b: (i64, i64)) -> i64 {
        let ((ea, pa), (eb, pb)) = (a, b);
        match self {
            TensorConvention::Kashiwara => ea.max(ea + eb - pa),
            TensorConvention::AntiKashiwara => eb.max(eb + ea - pb),
        }
    }
}

/// Product crystal with vertex `(a, b)` at index `a * |B| + b`.
pub fn tensor_crystal(a: &CrystalGraph, b: &CrystalGraph, conv: TensorConvention) -> Result<CrystalGraph, BasesError> {
    let (na, nb) = (a.len(), b.len());
    let rank = a.rank();
    let mut weights = Vec::with_capacity(na * nb);
    let mut labels = Vec::with_capacity(na * nb);
    let mut f = vec![vec![None; na * nb]; rank];
    for x in 0..na {
        for y in 0..nb {
            let (va, vb) = (&a.vertices[x], &b.vertices[y]);
            weights.push(&va.weight + &vb.weight);
            labels.push(format!("{}⊗{}", va.label, vb.label));
            for i in 0..rank {
                f[i][x * nb + y] = if conv.f_left(va, vb, i) {
                    a.f[i][x].map(|t| t * nb + y)
                } else {
                    b.f[i][y].map(|t| x * nb + t)
                };
            }
        }
    }
    let highest = match (a.highest, b.highest) {
        (Some(x), Some(y)) => Some(x * nb + y),
        _ => None,
    };
    CrystalGraph::from_edges(weights, labels, f, highest)
}

/// Checks that in the basis `basis` every `F̃_i` and `Ẽ_i` is regular at ∞ with
/// residues reproducing the edges of `crystal`.
pub fn check_residue_edges(
    m: &Module,
    basis: &[ModuleVector],
    crystal: &CrystalGraph,
    ops: &[(SparseMatrix, SparseMatrix)],
) -> Result<(), BasesError> {
    let order = m.order();
    let g = SparseMatrix::from_columns(m.dim(), order, basis);
    let ginv = g.inverse().ok_or(BasesError::NotABasis)?;
    let checks = Exec::default().map_range(2 * ops.len(), |k| {
        let (i, is_f) = (k / 2, k % 2 == 0);
        let (op, edges, name) = if is_f { (&ops[i].1, &crystal.f[i], "F") } else { (&ops[i].0, &crystal.e[i], "E") };
        let coords = ginv.mul(&op.mul(&g)).transpose();
        for b in 0..crystal.len() {
            let mut residue = Vec::new();
            for (j, c) in coords.row(b).entries() {
                match c.degree() {
                    Some(d) if d > Exponent::zero() => {
                        return Err(BasesError::ResidueEdge { node: i, vertex: b, operator: name })
                    }
                    Some(d) if d == Exponent::zero() => residue.push((*j, c.leading_coefficient())),
                    _ => {}
                }
            }
            let ok = match edges[b] {
                Some(t) => residue.len() == 1 && residue[0].0 == t && residue[0].1.is_one(),
                None => residue.is_empty(),
            };
            if !ok {
                return Err(BasesError::ResidueEdge { node: i, vertex: b, operator: name });
            }
        }
        Ok(())
    });
    checks.into_iter().collect()
}

/// The global basis of an irreducible module together with its crystal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalBasis {
    pub crystal: CrystalGraph,
    /// `elements[b]` is the element for crystal vertex `b`
    pub elements: Vec<ModuleVector>,
    pub hw: ModuleVector,
    pub lowest: usize,
    pub bar: TransportedMap,
    pub kashiwara: Vec<(SparseMatrix, SparseMatrix)>,
}

impl GlobalBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn lowest_element(&self) -> &ModuleVector {
        &self.elements[self.lowest]
    }

    /// Change of basis with the elements as columns.
    pub fn matrix(&self, dim: usize, order: u32) -> SparseMatrix {
        SparseMatrix::from_columns(dim, order, &self.elements)
    }

    /// Bar-fixedness, basis property, crystal axioms and residue-edge agreement.
    pub fn certify(&self, m: &Module) -> Result<(), BasesError> {
        for (b, g) in self.elements.iter().enumerate() {
            if self.bar.apply(g) != *g {
                return Err(BasesError::NotBarInvariant { vertex: b });
            }
        }
        self.crystal.check_axioms(m.cartan())?;
        check_residue_edges(m, &self.elements, &self.crystal, &self.kashiwara)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim": self.elements.len(),
            "highest": self.crystal.highest,
            "lowest": self.lowest,
            "elements": self.elements.iter().zip(&self.crystal.vertices).map(|(g, v)| json!({
                "label": v.label,
                "weight": v.weight.0,
                "vector": g.to_json(),
            })).collect::<Vec<_>>(),
            "crystal": self.crystal.to_json(),
        })
    }
}

/// A-infinity basis and coordinate map of the crystal lattice on one weight space.
struct LatticeBlock {
    indices: Vec<usize>,
    basis: Vec<ModuleVector>,
    inverse: Vec<Vec<F>>,
}

impl LatticeBlock {
    fn coords(&self, v: &ModuleVector, order: u32) -> Vec<F> {
        let local: Vec<F> = self.indices.iter().map(|&g| v.get(g).cloned().unwrap_or_else(|| F::zero(order))).collect();
        self.inverse
            .iter()
            .map(|row| row.iter().zip(&local).fold(F::zero(order), |acc, (a, b)| if b.is_zero() { acc } else { acc + a * b }))
            .collect()
    }

    fn vector(&self, coords: &[F]) -> ModuleVector {
        coords.iter().zip(&self.basis).fold(SparseVector::new(), |acc, (c, b)| if c.is_zero() { acc } else { acc.axpy(c, b) })
    }
}

/// Top degree of a coordinate vector and the coefficients in that degree.
fn lead(coords: &[F]) -> Option<(Exponent, Vec<BigRational>)> {
    let deg = coords.iter().filter_map(|c| c.degree()).max()?;
    let lead = coords
        .iter()
        .map(|c| if c.degree() == Some(deg) { c.leading_coefficient() } else { BigRational::zero() })
        .collect();
    Some((deg, lead))
}

fn residue(coords: &[F]) -> Result<Vec<BigRational>, Exponent> {
    match lead(coords) {
        None => Ok(vec![BigRational::zero(); coords.len()]),
        Some((d, _)) if d > Exponent::zero() => Err(d),
        Some((d, l)) if d == Exponent::zero() => Ok(l),
        Some(_) => Ok(vec![BigRational::zero(); coords.len()]),
    }
}

fn constant_vector(v: &[BigRational], order: u32) -> SparseVector {
    SparseVector::from_entries(v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, F::from_rational(x.clone(), order))))
}

/// Reduces bar-invariant candidates of one weight space (in lattice
/// coordinates) to bar-invariant lattice vectors with independent residues,
/// subtracting `Σ a_k (q^s + q^-s) y_k` to cancel top-degree parts.
type Reduced = (Vec<F>, Vec<BigRational>);

fn triangularize(candidates: Vec<Vec<F>>, order: u32) -> Result<Vec<Reduced>, Exponent> {
    struct Stored {
        coords: Vec<F>,
        deg: Exponent,
        lead: Vec<BigRational>,
    }
    let mut cands: Vec<(Exponent, Vec<F>)> = candidates.into_iter().filter_map(|c| lead(&c).map(|(d, _)| (d, c))).collect();
    cands.sort_by_key(|a| a.0);
    let mut queue: VecDeque<Vec<F>> = cands.into_iter().map(|(_, c)| c).collect();
    let mut stored: Vec<Stored> = Vec::new();
    while let Some(mut x) = queue.pop_front() {
        while let Some((m, l)) = lead(&x) {
            if m < Exponent::zero() {
                return Err(m);
            }
            let mut span = IncrementalBasis::new(order);
            let mut used = Vec::new();
            for (k, s) in stored.iter().enumerate() {
                if s.deg <= m && span.insert(&constant_vector(&s.lead, order)) {
                    used.push(k);
                }
            }
            match span.coordinates(&constant_vector(&l, order)) {
                Some(a) => {
                    for (pos, coef) in a.entries() {
                        let s = &stored[used[*pos]];
                        let shift = m - s.deg;
                        let mult = if shift == Exponent::zero() {
                            coef.clone()
                        } else {
                            coef * &(F::q_pow(shift, order).expect("root order") + F::q_pow(-shift, order).expect("root order"))
                        };
                        for (xj, yj) in x.iter_mut().zip(&s.coords) {
                            if !yj.is_zero() {
                                *xj = &*xj - &(&mult * yj);
                            }
                        }
                    }
                }
                None => {
                    let mut k = 0;
                    while k < stored.len() {
                        if stored[k].deg > m {
                            queue.push_back(stored.remove(k).coords);
                        } else {
                            k += 1;
                        }
                    }
                    stored.push(Stored { coords: x, deg: m, lead: l });
                    break;
                }
            }
        }
    }
    Ok(stored.into_iter().filter(|s| s.deg == Exponent::zero()).map(|s| (s.coords, s.lead)).collect())
}

/// Distinct nonzero divided-power monomials `F_{i1}^{(a1)}...F_{ik}^{(ak)} hw`
/// with consecutive nodes distinct, grouped by weight.
fn monomial_span(m: &Module, hw: &ModuleVector) -> BTreeMap<Weight, Vec<ModuleVector>> {
    let mut out: BTreeMap<Weight, Vec<ModuleVector>> = BTreeMap::new();
    let cap = m.weights().iter().flat_map(|w| w.0.iter().map(|x| x.unsigned_abs())).max().unwrap_or(0) as u32 * 2 + 1;
    let fd: Vec<Vec<SparseMatrix>> = (0..m.rank()).map(|i| (0..=cap).map(|k| m.f_divided(i, k)).collect()).collect();
    let mut queue = VecDeque::from([(hw.clone(), usize::MAX)]);
    out.entry(m.weight(hw.entries()[0].0).clone()).or_default().push(hw.clone());
    while let Some((v, last)) = queue.pop_front() {
        for i in (0..m.rank()).filter(|&i| i != last) {
            for a in 1..=cap {
                let w = fd[i][a as usize].apply(&v);
                if w.is_zero() {
                    break;
                }
                let bucket = out.entry(m.weight(w.entries()[0].0).clone()).or_default();
                if !bucket.contains(&w) {
                    bucket.push(w.clone());
                    queue.push_back((w, i));
                }
            }
        }
    }
    out
}

/// Global basis of the irreducible module `m` generated by `hw`, with its crystal.
/// Every invariant is certified before returning.
pub fn compute_global_basis(m: &Module, hw: &ModuleVector) -> Result<GlobalBasis, BasesError> {
    let order = m.order();
    let c = m.cartan().clone();
    if hw.is_zero() || !m.is_highest_weight_vector(hw) {
        return Err(BasesError::NotHighestWeight);
    }
    let spanned = generate_submodule(m, hw).len();
    if spanned != m.dim() {
        return Err(BasesError::NotGenerating { spanned, dim: m.dim() });
    }
    let lambda = m.weight(hw.entries()[0].0).clone();
    let bar = make_bar(m, std::slice::from_ref(hw))?;
    let ops = all_kashiwara_operators(m)?;

    // weights in order of depth below lambda
    let mut depth_order = vec![lambda.clone()];
    let mut seen = std::collections::BTreeSet::from([lambda.clone()]);
    let mut k = 0;
    while k < depth_order.len() {
        let mu = depth_order[k].clone();
        for i in 0..m.rank() {
            let nu = &mu - &c.simple_root(i);
            if m.weight_spaces().contains_key(&nu) && seen.insert(nu.clone()) {
                depth_order.push(nu);
            }
        }
        k += 1;
    }

    let mut lattice: BTreeMap<Weight, LatticeBlock> = BTreeMap::new();
    for mu in &depth_order {
        let idx = m.weight_space(mu).to_vec();
        let mut gens: Vec<ModuleVector> = if *mu == lambda {
            vec![hw.clone()]
        } else {
            let mut g = Vec::new();
            for i in 0..m.rank() {
                if let Some(up) = lattice.get(&(mu + &c.simple_root(i))) {
                    g.extend(up.basis.iter().map(|b| ops[i].1.apply(b)).filter(|v| !v.is_zero()));
                }
            }
            g
        };
        let basis = lattice_basis(&mut gens, &idx);
        if basis.len() != idx.len() {
            return Err(BasesError::Lattice { weight: mu.clone(), detail: format!("rank {} of {}", basis.len(), idx.len()) });
        }
        let rows: Vec<Vec<F>> = idx
            .iter()
            .map(|&r| basis.iter().map(|b| b.get(r).cloned().unwrap_or_else(|| F::zero(order))).collect())
            .collect();
        let inverse = dense::inverse(&rows, order)
            .ok_or_else(|| BasesError::Lattice { weight: mu.clone(), detail: "singular lattice basis".into() })?;
        lattice.insert(mu.clone(), LatticeBlock { indices: idx, basis, inverse });
    }

    // crystal from residues of F̃ images
    let mut lifts: Vec<ModuleVector> = vec![hw.clone()];
    let mut weights = vec![lambda.clone()];
    let mut residues: Vec<Vec<BigRational>> = vec![residue(&lattice[&lambda].coords(hw, order)).expect("hw is a lattice generator")];
    let mut f_edges: Vec<Vec<Option<usize>>> = vec![Vec::new(); m.rank()];
    let mut b = 0;
    while b < lifts.len() {
        for i in 0..m.rank() {
            let y = ops[i].1.apply(&lifts[b]);
            let mut target = None;
            if !y.is_zero() {
                let nu = &weights[b] - &c.simple_root(i);
                let r = residue(&lattice[&nu].coords(&y, order))
                    .map_err(|d| BasesError::Crystal(format!("F_{} image leaves the lattice (degree {d:?})", i + 1)))?;
                if r.iter().any(|x| !x.is_zero()) {
                    target = Some(match (0..lifts.len()).find(|&t| weights[t] == nu && residues[t] == r) {
                        Some(t) => t,
                        None => {
                            lifts.push(y);
                            weights.push(nu);
                            residues.push(r);
                            lifts.len() - 1
                        }
                    });
                }
            }
            f_edges[i].push(target);
        }
        b += 1;
    }
    if lifts.len() != m.dim() {
        return Err(BasesError::Crystal(format!("{} vertices for a module of dimension {}", lifts.len(), m.dim())));
    }
    let labels = (0..lifts.len()).map(|b| format!("b{b}")).collect();
    let crystal = CrystalGraph::from_edges(weights.clone(), labels, f_edges, Some(0))?;

    // bar-invariant lifts by triangularizing the monomial spanning set
    let spans = monomial_span(m, hw);
    let blocks: Vec<(&Weight, &LatticeBlock)> = lattice.iter().collect();
    let reduced = Exec::default().map(&blocks, |(mu, block)| {
        let cands: Vec<Vec<F>> = spans.get(*mu).map(|v| v.iter().map(|x| block.coords(x, order)).collect()).unwrap_or_default();
        let out = triangularize(cands, order).map_err(|_| BasesError::Triangularization {
            weight: (*mu).clone(),
            found: 0,
            expected: block.indices.len(),
        })?;
        if out.len() != block.indices.len() {
            return Err(BasesError::Triangularization { weight: (*mu).clone(), found: out.len(), expected: block.indices.len() });
        }
        Ok(out)
    });
    let mut elements = vec![SparseVector::new(); lifts.len()];
    for ((mu, block), red) in blocks.iter().zip(reduced) {
        let red = red?;
        let mut span = IncrementalBasis::new(order);
        for (_, l) in &red {
            span.insert(&constant_vector(l, order));
        }
        for b in (0..lifts.len()).filter(|&b| weights[b] == **mu) {
            let a = span
                .coordinates(&constant_vector(&residues[b], order))
                .ok_or(BasesError::Triangularization { weight: (*mu).clone(), found: red.len(), expected: block.indices.len() })?;
            let mut coords = vec![F::zero(order); block.indices.len()];
            for (k, coef) in a.entries() {
                for (cj, yj) in coords.iter_mut().zip(&red[*k].0) {
                    *cj = &*cj + &(coef * yj);
                }
            }
            elements[b] = block.vector(&coords);
        }
    }
    let lowest_weight = c.w0_apply(&lambda)?;
    let lowest = (0..lifts.len()).find(|&b| weights[b] == lowest_weight).ok_or(BasesError::Crystal("no lowest vertex".into()))?;
    let gb = GlobalBasis { crystal, elements, hw: hw.clone(), lowest, bar, kashiwara: ops };
    gb.certify(m)?;
    Ok(gb)
}

/// A-infinity basis of the span of `gens` (restricted to `idx`), by eliminating
/// on the entry of largest degree at each step.
fn lattice_basis(gens: &mut Vec<ModuleVector>, idx: &[usize]) -> Vec<ModuleVector> {
    let mut basis = Vec::new();
    let mut coords: Vec<usize> = idx.to_vec();
    loop {
        gens.retain(|g| !g.is_zero());
        let mut best: Option<(Exponent, usize, usize)> = None;
        for (gi, g) in gens.iter().enumerate() {
            for (ci, &r) in coords.iter().enumerate() {
                if let Some(d) = g.get(r).and_then(|x| x.degree()) {
                    if best.as_ref().is_none_or(|(bd, _, _)| d > *bd) {
                        best = Some((d, gi, ci));
                    }
                }
            }
        }
        let Some((_, gi, ci)) = best else { break };
        let p = gens.remove(gi);
        let r = coords.remove(ci);
        let pr = p.get(r).expect("pivot entry").clone();
        for g in gens.iter_mut() {
            if let Some(x) = g.get(r) {
                let ratio = x / &pr;
                *g = g.axpy(&-ratio, &p);
            }
        }
        basis.push(p);
    }
    basis
}

/// The global bases and crystals of two irreducibles and the product crystal
/// checked against Kashiwara operator residues on their tensor product.
pub fn verify_tensor_crystal(
    v: &std::sync::Arc<Module>,
    gv: &GlobalBasis,
    w: &std::sync::Arc<Module>,
    gw: &GlobalBasis,
    t: &Module,
    conv: TensorConvention,
) -> Result<CrystalGraph, BasesError> {
    let crystal = tensor_crystal(&gv.crystal, &gw.crystal, conv)?;
    crystal.check_axioms(t.cartan())?;
    let basis: Vec<ModuleVector> = gv
        .elements
        .iter()
        .flat_map(|a| gw.elements.iter().map(move |b| crate::uqmod::tensor_vectors(a, b, w.dim())))
        .collect();
    debug_assert_eq!(basis.len(), v.dim() * w.dim());
    let ops = all_kashiwara_operators(t)?;
    check_residue_edges(t, &basis, &crystal, &ops)?;
    Ok(crystal)
}

/// Finds the signature convention that matches the algebra on products of
/// fundamental modules.
pub fn calibrate_tensor_convention(c: &std::sync::Arc<CartanDatum>) -> Result<TensorConvention, BasesError> {
    let r = c.rank();
    let mods: Vec<std::sync::Arc<Module>> = (0..r)
        .map(|i| crate::uqmod::make_irreducible(c, &Weight::fundamental(r, i)).map(std::sync::Arc::new))
        .collect::<Result<_, _>>()?;
    let bases: Vec<GlobalBasis> =
        mods.iter().map(|m| compute_global_basis(m, &SparseVector::unit(0, m.order()))).collect::<Result<_, _>>()?;
    let products: Vec<(usize, usize, Module)> =
        (0..r).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| tensor(&mods[i], &mods[j]).map(|t| (i, j, t))).collect::<Result<_, _>>()?;
    for conv in [TensorConvention::Kashiwara, TensorConvention::AntiKashiwara] {
        if products.iter().all(|(i, j, t)| verify_tensor_crystal(&mods[*i], &bases[*i], &mods[*j], &bases[*j], t, conv).is_ok()) {
            return Ok(conv);
        }
    }
    Err(BasesError::Calibration)
}

/// `S^ν_{λ,μ}`: vertices `b` of `B(μ)` with `wt b = ν − λ` such that `b_λ ⊗ b` is
/// highest weight in the product crystal.
pub fn highest_weight_set(lambda: &Weight, b_mu: &CrystalGraph, nu: &Weight, conv: TensorConvention) -> Vec<usize> {
    let target = nu - lambda;
    (0..b_mu.len())
        .filter(|&b| {
            let v = &b_mu.vertices[b];
            v.weight == target && (0..b_mu.rank()).all(|i| conv.epsilon((0, lambda.0[i]), (v.epsilon[i], v.phi[i])) == 0)
        })
        .collect()
}

/// Cross-checks `S^ν` against the module: each `b_λ ⊗ G(b)` must project
/// nontrivially onto the ν-isotypic component of `t = V_λ ⊗ V_μ`.
pub fn check_highest_weight_set(
    t: &Module,
    b_lambda: &ModuleVector,
    gw: &GlobalBasis,
    dim_w: usize,
    nu: &Weight,
    set: &[usize],
) -> Result<(), BasesError> {
    let dec = t.decomposition()?;
    for &b in set {
        let v = crate::uqmod::tensor_vectors(b_lambda, &gw.elements[b], dim_w);
        if dec.project(&v, nu).is_zero() {
            return Err(BasesError::HighestWeightSet { vertex: b, nu: nu.clone() });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uqmod::make_irreducible;
    use std::sync::Arc;

    fn cartan(t: &str) -> Arc<CartanDatum> {
        Arc::new(CartanDatum::from_type(t).unwrap())
    }

    fn module(t: &str, hw: &[i64]) -> Arc<Module> {
        Arc::new(make_irreducible(&cartan(t), &Weight(hw.to_vec())).unwrap())
    }

    fn hw(m: &Module) -> ModuleVector {
        SparseVector::unit(0, m.order())
    }

    #[test]
    fn a1_kashiwara_operators_on_string() {
        let m = module("A1", &[2]);
        let (e, f) = kashiwara_operators(&m, 0).unwrap();
        let o = m.order();
        let v1 = m.f_divided(0, 1).apply(&hw(&m));
        let v2 = m.f_divided(0, 2).apply(&hw(&m));
        assert_eq!(f.apply(&hw(&m)), v1);
        assert_eq!(f.apply(&v1), v2);
        assert!(f.apply(&v2).is_zero());
        assert!(e.apply(&hw(&m)).is_zero());
        assert_eq!(e.apply(&v2), v1);
        let _ = o;
    }

    #[test]
    fn a1_tensor_weight_zero_ftilde_rank_one() {
        let v = module("A1", &[1]);
        let t = tensor(&v, &v).unwrap();
        let (_, f) = kashiwara_operators(&t, 0).unwrap();
        let zero = t.weight_space(&Weight(vec![0])).to_vec();
        let images: Vec<_> = zero.iter().map(|&k| f.apply(&SparseVector::unit(k, t.order()))).collect();
        let mut span = IncrementalBasis::new(t.order());
        let rank = images.iter().filter(|x| span.insert(x)).count();
        assert_eq!(rank, 1);
    }

    #[test]
    fn a1_global_basis_is_divided_powers() {
        for n in 1..=3 {
            let m = module("A1", &[n]);
            let g = compute_global_basis(&m, &hw(&m)).unwrap();
            for k in 0..=n as u32 {
                assert_eq!(g.elements[k as usize], m.f_divided(0, k).apply(&hw(&m)));
            }
            assert_eq!(g.lowest, n as usize);
        }
    }

    #[test]
    fn a2_fundamental_is_monomial() {
        let m = module("A2", &[1, 0]);
        let g = compute_global_basis(&m, &hw(&m)).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.elements[0], hw(&m));
        assert_eq!(g.elements[1], m.f(0).apply(&hw(&m)));
        assert_eq!(g.elements[2], m.f(1).apply(&m.f(0).apply(&hw(&m))));
    }

    #[test]
    fn global_bases_certify() {
        for (t, w) in [("A2", vec![1, 1]), ("B2", vec![1, 0]), ("B2", vec![0, 1]), ("G2", vec![1, 0]), ("A2", vec![2, 0])] {
            let m = module(t, &w);
            let g = compute_global_basis(&m, &hw(&m)).unwrap();
            assert_eq!(g.len(), m.dim());
            assert_eq!(g.crystal.highest_weight_vertices(), vec![0]);
        }
    }

    #[test]
    fn scaling_hw_scales_basis() {
        let m = module("A2", &[1, 1]);
        let g = compute_global_basis(&m, &hw(&m)).unwrap();
        let o = m.order();
        let z = F::from_int(1, o) + F::q_int(1, o);
        let gz = compute_global_basis(&m, &hw(&m).scale(&z)).unwrap();
        for (a, b) in g.elements.iter().zip(&gz.elements) {
            assert_eq!(a.scale(&z), *b);
        }
    }

    #[test]
    fn non_generating_vector_rejected() {
        let v = module("A1", &[1]);
        let t = tensor(&v, &v).unwrap();
        let h = t.highest_weight_vectors(&Weight(vec![0]))[0].clone();
        assert!(matches!(compute_global_basis(&t, &h), Err(BasesError::NotGenerating { .. })));
    }

    #[test]
    fn tensor_conventions() {
        assert_eq!(calibrate_tensor_convention(&cartan("A1")).unwrap(), TensorConvention::Kashiwara);
        assert_eq!(calibrate_tensor_convention(&cartan("A2")).unwrap(), TensorConvention::Kashiwara);
    }

    #[test]
    fn a1_tensor_crystal_highest_vertices() {
        let v = module("A1", &[1]);
        let g = compute_global_basis(&v, &hw(&v)).unwrap();
        let t = tensor_crystal(&g.crystal, &g.crystal, TensorConvention::Kashiwara).unwrap();
        // b+⊗b+ and b+⊗b-
        assert_eq!(t.highest_weight_vertices(), vec![0, 1]);
        assert_eq!(highest_weight_set(&Weight(vec![1]), &g.crystal, &Weight(vec![2]), TensorConvention::Kashiwara), vec![0]);
        assert_eq!(highest_weight_set(&Weight(vec![1]), &g.crystal, &Weight(vec![0]), TensorConvention::Kashiwara), vec![1]);
        assert!(highest_weight_set(&Weight(vec![1]), &g.crystal, &Weight(vec![1]), TensorConvention::Kashiwara).is_empty());
    }

    #[test]
    fn a2_tensor_crystal_splits_six_plus_three() {
        let v = module("A2", &[1, 0]);
        let g = compute_global_basis(&v, &hw(&v)).unwrap();
        let t = tensor_crystal(&g.crystal, &g.crystal, TensorConvention::Kashiwara).unwrap();
        assert_eq!(t.len(), 9);
        let hws: Vec<Weight> = t.highest_weight_vertices().iter().map(|&b| t.vertices[b].weight.clone()).collect();
        assert_eq!(hws, vec![Weight(vec![2, 0]), Weight(vec![0, 1])]);
        for (a, b) in (0..t.len()).map(|k| (k / 3, k % 3)) {
            assert_eq!(t.vertices[a * 3 + b].weight, &g.crystal.vertices[a].weight + &g.crystal.vertices[b].weight);
        }
    }

    #[test]
    fn highest_weight_set_matches_multiplicities() {
        let v = module("B2", &[0, 1]);
        let w = module("B2", &[1, 0]);
        let gv = compute_global_basis(&v, &hw(&v)).unwrap();
        let gw = compute_global_basis(&w, &hw(&w)).unwrap();
        let t = tensor(&v, &w).unwrap();
        let crystal = verify_tensor_crystal(&v, &gv, &w, &gw, &t, TensorConvention::Kashiwara).unwrap();
        assert_eq!(crystal.len(), 20);
        for (nu, mult) in t.decomposition().unwrap().multiplicities() {
            let s = highest_weight_set(&Weight(vec![0, 1]), &gw.crystal, &nu, TensorConvention::Kashiwara);
            assert_eq!(s.len(), mult, "{nu}");
            check_highest_weight_set(&t, &gv.hw, &gw, w.dim(), &nu, &s).unwrap();
        }
    }

    #[test]
    fn dot_output_is_deterministic() {
        let m = module("A1", &[1]);
        let g = compute_global_basis(&m, &hw(&m)).unwrap();
        assert_eq!(g.crystal.to_dot(), "digraph crystal {\n  v0 [label=\"(1)\"];\n  v1 [label=\"(-1)\"];\n  v0 -> v1 [label=\"1\"];\n}\n");
    }
}
