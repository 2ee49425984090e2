//! Integrable highest-weight modules, tensor products, and isotypic decomposition.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cartan::{CartanDatum, CartanError, Weight};
use crate::linalg::{dense, IncrementalBasis, SparseMatrix, SparseVector};
use crate::qscalar::{quantum_factorial, quantum_integer, Exponent, FieldElement, QError};

type F = FieldElement;

/// A vector in a module's standard basis.
pub type ModuleVector = SparseVector;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModError {
    #[error("weight not dominant: {0}")]
    NotDominant(Weight),
    #[error("modules are defined over different Cartan data")]
    CartanMismatch,
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error(transparent)]
    Cartan(#[from] CartanError),
    #[error(transparent)]
    Field(#[from] QError),
}

/// How a module was built.
#[derive(Clone, Debug)]
pub enum Provenance {
    /// `V_lambda` with its highest-weight vector pinned at basis index 0.
    Irreducible { highest: Weight },
    /// Left-major tensor product of two modules.
    Tensor(Arc<Module>, Arc<Module>),
}

/// A weight-graded module with sparse actions of `E_i` and `F_i`.
/// `K_H` acts diagonally by `q^{<H, wt>}`.
#[derive(Debug)]
pub struct Module {
    cartan: Arc<CartanDatum>,
    weights: Vec<Weight>,
    spaces: BTreeMap<Weight, Vec<usize>>,
    e: Vec<SparseMatrix>,
    f: Vec<SparseMatrix>,
    provenance: Provenance,
    decomposition: OnceLock<Result<Arc<IsotypicDecomposition>, ModError>>,
}

impl Module {
    fn assemble(
        cartan: Arc<CartanDatum>,
        weights: Vec<Weight>,
        e: Vec<SparseMatrix>,
        f: Vec<SparseMatrix>,
        provenance: Provenance,
    ) -> Self {
        let mut spaces: BTreeMap<Weight, Vec<usize>> = BTreeMap::new();
        for (k, w) in weights.iter().enumerate() {
            spaces.entry(w.clone()).or_default().push(k);
        }
        Module { cartan, weights, spaces, e, f, provenance, decomposition: OnceLock::new() }
    }

    pub fn cartan(&self) -> &Arc<CartanDatum> {
        &self.cartan
    }

    pub fn order(&self) -> u32 {
        self.cartan.root_order()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weight(&self, k: usize) -> &Weight {
        &self.weights[k]
    }

    /// Basis indices of the `mu` weight space (empty if absent).
    pub fn weight_space(&self, mu: &Weight) -> &[usize] {
        self.spaces.get(mu).map_or(&[], Vec::as_slice)
    }

    pub fn weight_spaces(&self) -> &BTreeMap<Weight, Vec<usize>> {
        &self.spaces
    }

    pub fn e(&self, i: usize) -> &SparseMatrix {
        &self.e[i]
    }

    pub fn f(&self, i: usize) -> &SparseMatrix {
        &self.f[i]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// The tensor factors, if this module is a tensor product.
    pub fn factors(&self) -> Option<(&Arc<Module>, &Arc<Module>)> {
        match &self.provenance {
            Provenance::Tensor(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// Highest weight of an irreducible module.
    pub fn highest_weight(&self) -> Option<&Weight> {
        match &self.provenance {
            Provenance::Irreducible { highest } => Some(highest),
            _ => None,
        }
    }

    /// The weight-diagonal operator `q^{g(wt)}`.
    pub fn weight_diagonal(&self, g: impl Fn(&Weight) -> Exponent) -> Result<SparseMatrix, ModError> {
        let order = self.order();
        let d = self
            .weights
            .iter()
            .map(|w| F::q_pow(g(w), order))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SparseMatrix::diagonal(d, order))
    }

    /// `K_i^{power}`: diagonal `q^{power * d_i <H_i, wt>}`.
    pub fn k(&self, i: usize, power: i64) -> SparseMatrix {
        let di = self.cartan.d(i);
        let order = self.order();
        SparseMatrix::diagonal(self.weights.iter().map(|w| F::q_int(power * di * w.0[i], order)).collect(), order)
    }

    /// Divided power `E_i^{(n)}`.
    pub fn e_divided(&self, i: usize, n: u32) -> SparseMatrix {
        divided_power(&self.e[i], n, self.cartan.d(i) as u32)
    }

    /// Divided power `F_i^{(n)}`.
    pub fn f_divided(&self, i: usize, n: u32) -> SparseMatrix {
        divided_power(&self.f[i], n, self.cartan.d(i) as u32)
    }

    /// Basis of the joint kernel of all `E_i` on the `nu` weight space.
    pub fn highest_weight_vectors(&self, nu: &Weight) -> Vec<ModuleVector> {
        let cols = self.weight_space(nu);
        if cols.is_empty() {
            return Vec::new();
        }
        let order = self.order();
        let mut rows: Vec<Vec<F>> = Vec::new();
        for i in 0..self.rank() {
            let target = &self.cartan.simple_root(i) + nu;
            for &r in self.weight_space(&target) {
                rows.push(cols.iter().map(|&c| self.e[i].get(r, c)).collect());
            }
        }
        if rows.is_empty() {
            return cols.iter().map(|&c| SparseVector::unit(c, order)).collect();
        }
        dense::null_space(&rows, cols.len(), order)
            .into_iter()
            .map(|x| SparseVector::from_entries(cols.iter().zip(x).map(|(&c, v)| (c, v))))
            .collect()
    }

    /// Whether `v` is annihilated by every `E_i`.
    pub fn is_highest_weight_vector(&self, v: &ModuleVector) -> bool {
        (0..self.rank()).all(|i| self.e[i].apply(v).is_zero())
    }

    /// The isotypic decomposition, computed once and cached.
    pub fn decomposition(&self) -> Result<Arc<IsotypicDecomposition>, ModError> {
        self.decomposition.get_or_init(|| IsotypicDecomposition::compute(self).map(Arc::new)).clone()
    }

    /// Checks grading, commutators, `K` conjugation, Serre relations and
    /// local nilpotency as exact matrix identities.
    pub fn check_relations(&self) -> Result<(), ModError> {
        let n = self.rank();
        let order = self.order();
        let fail = |m: String| Err(ModError::Consistency(m));
        for i in 0..n {
            let a = self.cartan.simple_root(i);
            for (r, c, _) in self.e[i].triplets() {
                if self.weights[r] != &self.weights[c] + &a {
                    return fail(format!("E_{} does not raise weight by alpha_{}", i + 1, i + 1));
                }
            }
            for (r, c, _) in self.f[i].triplets() {
                if self.weights[r] != &self.weights[c] - &a {
                    return fail(format!("F_{} does not lower weight by alpha_{}", i + 1, i + 1));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let comm = self.e[i].mul(&self.f[j]).sub(&self.f[j].mul(&self.e[i]));
                let expected = if i == j {
                    let d = self.cartan.d(i) as u32;
                    SparseMatrix::diagonal(self.weights.iter().map(|w| quantum_integer(w.0[i], d, order)).collect(), order)
                } else {
                    SparseMatrix::zeros(self.dim(), self.dim(), order)
                };
                if comm != expected {
                    return fail(format!("[E_{}, F_{}] relation fails", i + 1, j + 1));
                }
            }
        }
        for j in 0..n {
            let (kj, kj_inv) = (self.k(j, 1), self.k(j, -1));
            for i in 0..n {
                let s = F::q_int(self.cartan.d(j) * self.cartan.a(j, i), order);
                if kj.mul(&self.e[i]).mul(&kj_inv) != self.e[i].scale(&s) {
                    return fail(format!("K_{} E_{} K_{}^-1 relation fails", j + 1, i + 1, j + 1));
                }
                if kj.mul(&self.f[i]).mul(&kj_inv) != self.f[i].scale(&s.inv()?) {
                    return fail(format!("K_{} F_{} K_{}^-1 relation fails", j + 1, i + 1, j + 1));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = (1 - self.cartan.a(i, j)) as u32;
                for (gens, name) in [(&self.e, "E"), (&self.f, "F")] {
                    let d = self.cartan.d(i) as u32;
                    let mut acc = SparseMatrix::zeros(self.dim(), self.dim(), order);
                    for k in 0..=m {
                        let term = divided_power(&gens[i], m - k, d)
                            .mul(&gens[j])
                            .mul(&divided_power(&gens[i], k, d));
                        acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
                    }
                    if !acc.is_zero() {
                        return fail(format!("Serre relation for {name}_{}, {name}_{} fails", i + 1, j + 1));
                    }
                }
            }
        }
        for i in 0..n {
            for (x, name) in [(&self.e[i], "E"), (&self.f[i], "F")] {
                for k in 0..self.dim() {
                    let mut v = SparseVector::unit(k, order);
                    let mut steps = 0;
                    while !v.is_zero() {
                        v = x.apply(&v);
                        steps += 1;
                        if steps > self.dim() {
                            return fail(format!("{name}_{} is not locally nilpotent", i + 1));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// JSON dump `{cartan, dim, weights, E: {i: triplets}, F: {...}}`.
    pub fn to_json(&self) -> Value {
        let gens = |ms: &[SparseMatrix]| -> Value {
            let mut m = Map::new();
            for (i, x) in ms.iter().enumerate() {
                m.insert((i + 1).to_string(), x.to_json());
            }
            Value::Object(m)
        };
        json!({
            "cartan": self.cartan.to_json(),
            "dim": self.dim(),
            "weights": self.weights.iter().map(|w| w.0.clone()).collect::<Vec<_>>(),
            "E": gens(&self.e),
            "F": gens(&self.f),
        })
    }
}

/// `X^n / [n]_{q^d}!`.
pub fn divided_power(x: &SparseMatrix, n: u32, d: u32) -> SparseMatrix {
    let order = x.order();
    let mut acc = SparseMatrix::identity(x.nrows(), order);
    for _ in 0..n {
        acc = x.mul(&acc);
    }
    if n > 1 {
        acc = acc.scale(&quantum_factorial(n, d, order).inv().expect("nonzero factorial"));
    }
    acc
}

/// Builds `V_lambda` with highest-weight vector at basis index 0.
pub fn make_irreducible(cartan: &Arc<CartanDatum>, lambda: &Weight) -> Result<Module, ModError> {
    if !cartan.is_finite() {
        return Err(CartanError::NotFiniteType.into());
    }
    build_irreducible(cartan, lambda, usize::MAX)
}

/// Depth-truncated exploration for any symmetrizable datum; no correctness
/// claim is made at the truncation boundary.
pub fn make_irreducible_truncated(cartan: &Arc<CartanDatum>, lambda: &Weight, max_depth: usize) -> Result<Module, ModError> {
    build_irreducible(cartan, lambda, max_depth)
}

fn build_irreducible(cartan: &Arc<CartanDatum>, lambda: &Weight, max_depth: usize) -> Result<Module, ModError> {
    if lambda.rank() != cartan.rank() || !lambda.is_dominant() {
        return Err(ModError::NotDominant(lambda.clone()));
    }
    let n = cartan.rank();
    let order = cartan.root_order();
    let mut weights = vec![lambda.clone()];
    // e_img[k][j] = E_j applied to basis vector k; f_img[k][i] likewise for F_i
    let mut e_img: Vec<Vec<SparseVector>> = vec![vec![SparseVector::new(); n]];
    let mut f_img: Vec<Vec<SparseVector>> = Vec::new();
    // last F-letter used to reach each basis vector and its run length;
    // candidates are divided powers along runs of the same letter
    let mut runs: Vec<(usize, u32)> = vec![(usize::MAX, 0)];
    let mut level: Vec<usize> = vec![0];
    let mut depth = 0;
    while !level.is_empty() {
        if depth == max_depth {
            f_img.extend(level.iter().map(|_| vec![SparseVector::new(); n]));
            break;
        }
        depth += 1;
        let mut bases: BTreeMap<Weight, (IncrementalBasis, Vec<usize>)> = BTreeMap::new();
        let mut candidates = Vec::new();
        let mut new_level = Vec::new();
        for i in 0..n {
            let di = cartan.d(i) as u32;
            for &b in &level {
                let wt = &weights[b] - &cartan.simple_root(i);
                let run = if runs[b].0 == i { runs[b].1 + 1 } else { 1 };
                let scale = quantum_integer(run as i64, di, order).inv()?;
                let mut images = Vec::with_capacity(n);
                for j in 0..n {
                    let mut img = SparseVector::new();
                    for (k, c) in e_img[b][j].entries() {
                        img = img.axpy(c, &f_img[*k][i]);
                    }
                    if i == j {
                        img = img.axpy(&quantum_integer(weights[b].0[i], di, order), &SparseVector::unit(b, order));
                    }
                    images.push(img.scale(&scale));
                }
                let phi = SparseVector::from_entries(
                    images.iter().enumerate().flat_map(|(j, v)| v.entries().iter().map(move |(k, c)| (k * n + j, c.clone()))),
                );
                let (basis, members) =
                    bases.entry(wt.clone()).or_insert_with(|| (IncrementalBasis::new(order), Vec::new()));
                if basis.insert(&phi) {
                    let idx = weights.len();
                    weights.push(wt.clone());
                    e_img.push(images);
                    runs.push((i, run));
                    members.push(idx);
                    new_level.push(idx);
                }
                candidates.push((i, b, wt, phi, run));
            }
        }
        f_img.extend(level.iter().map(|_| vec![SparseVector::new(); n]));
        for (i, b, wt, phi, run) in candidates {
            let (basis, members) = &bases[&wt];
            let coords = basis
                .coordinates(&phi)
                .ok_or_else(|| ModError::Consistency("candidate outside its weight span".into()))?;
            let di = cartan.d(i) as u32;
            f_img[b][i] = coords.remap(|k| Some(members[k])).scale(&quantum_integer(run as i64, di, order));
        }
        level = new_level;
    }
    let dim = weights.len();
    let e = (0..n)
        .map(|j| SparseMatrix::from_columns(dim, order, &e_img.iter().map(|v| v[j].clone()).collect::<Vec<_>>()))
        .collect();
    let f = (0..n)
        .map(|i| SparseMatrix::from_columns(dim, order, &f_img.iter().map(|v| v[i].clone()).collect::<Vec<_>>()))
        .collect();
    let module = Module::assemble(cartan.clone(), weights, e, f, Provenance::Irreducible { highest: lambda.clone() });
    if max_depth == usize::MAX {
        module.check_relations()?;
    }
    Ok(module)
}

/// `M ⊗ N` with `E_i -> E_i ⊗ K_i + 1 ⊗ E_i` and `F_i -> F_i ⊗ 1 + K_i^{-1} ⊗ F_i`.
pub fn tensor(m: &Arc<Module>, n: &Arc<Module>) -> Result<Module, ModError> {
    if m.cartan != n.cartan {
        return Err(ModError::CartanMismatch);
    }
    let order = m.order();
    let (im, in_) = (SparseMatrix::identity(m.dim(), order), SparseMatrix::identity(n.dim(), order));
    let mut e = Vec::new();
    let mut f = Vec::new();
    for i in 0..m.rank() {
        e.push(m.e[i].kron(&n.k(i, 1)).add(&im.kron(&n.e[i])));
        f.push(m.f[i].kron(&in_).add(&m.k(i, -1).kron(&n.f[i])));
    }
    let weights = m.weights.iter().flat_map(|a| n.weights.iter().map(move |b| a + b)).collect();
    Ok(Module::assemble(m.cartan.clone(), weights, e, f, Provenance::Tensor(m.clone(), n.clone())))
}

/// `v ⊗ w` in the left-major basis of `V ⊗ W`.
pub fn tensor_vectors(v: &SparseVector, w: &SparseVector, dim_w: usize) -> SparseVector {
    let mut out = Vec::with_capacity(v.nnz() * w.nnz());
    for (a, x) in v.entries() {
        for (b, y) in w.entries() {
            out.push((a * dim_w + b, x * y));
        }
    }
    SparseVector::from_entries(out)
}

/// The permutation `V ⊗ W -> W ⊗ V`, `v ⊗ w -> w ⊗ v`.
pub fn flip(dim_v: usize, dim_w: usize, order: u32) -> SparseMatrix {
    SparseMatrix::from_triplets(
        dim_v * dim_w,
        dim_v * dim_w,
        order,
        (0..dim_v).flat_map(|a| (0..dim_w).map(move |b| (b * dim_v + a, a * dim_w + b, F::one(order)))),
    )
}

/// One irreducible summand inside a completely reducible module.
#[derive(Clone, Debug)]
pub struct Component {
    pub highest: Weight,
    pub hw: ModuleVector,
    /// Basis of the summand generated from `hw` by `F`-monomials.
    pub basis: Vec<ModuleVector>,
}

/// Direct-sum decomposition into irreducible summands generated by highest-weight vectors.
#[derive(Clone, Debug)]
pub struct IsotypicDecomposition {
    pub components: Vec<Component>,
    /// Columns are all component basis vectors, component-major.
    pub change_of_basis: SparseMatrix,
    pub inverse: SparseMatrix,
    /// Component index of each column of `change_of_basis`.
    owner: Vec<usize>,
}

impl IsotypicDecomposition {
    fn compute(m: &Module) -> Result<Self, ModError> {
        let order = m.order();
        let mut components = Vec::new();
        // highest weights first, in the module's weight order reversed so the top comes first
        for (nu, _) in m.spaces.iter().rev() {
            if !nu.is_dominant() {
                continue;
            }
            for hw in m.highest_weight_vectors(nu) {
                let basis = generate_submodule(m, &hw);
                components.push(Component { highest: nu.clone(), hw, basis });
            }
        }
        components.sort_by(|a, b| b.highest.cmp(&a.highest));
        let mut cols = Vec::new();
        let mut owner = Vec::new();
        for (c, comp) in components.iter().enumerate() {
            cols.extend(comp.basis.iter().cloned());
            owner.extend(std::iter::repeat_n(c, comp.basis.len()));
        }
        if cols.len() != m.dim() {
            return Err(ModError::Consistency(format!(
                "components span dimension {} of a {}-dimensional module",
                cols.len(),
                m.dim()
            )));
        }
        let p = SparseMatrix::from_columns(m.dim(), order, &cols);
        let inverse = p
            .inverse()
            .ok_or_else(|| ModError::Consistency("component bases are linearly dependent".into()))?;
        Ok(IsotypicDecomposition { components, change_of_basis: p, inverse, owner })
    }

    /// Distinct highest weights with multiplicities.
    pub fn multiplicities(&self) -> BTreeMap<Weight, usize> {
        let mut out = BTreeMap::new();
        for c in &self.components {
            *out.entry(c.highest.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Projection onto the `nu`-isotypic block along all other blocks.
    pub fn project(&self, v: &ModuleVector, nu: &Weight) -> ModuleVector {
        let coords = self.inverse.apply(v);
        let kept = coords.remap(|k| (self.components[self.owner[k]].highest == *nu).then_some(k));
        self.change_of_basis.apply(&kept)
    }

    /// Projection onto a single summand along all others.
    pub fn project_component(&self, v: &ModuleVector, component: usize) -> ModuleVector {
        let coords = self.inverse.apply(v);
        let kept = coords.remap(|k| (self.owner[k] == component).then_some(k));
        self.change_of_basis.apply(&kept)
    }
}

/// Basis of the submodule generated by a highest-weight vector, built by
/// applying `F_i` breadth-first and keeping independent vectors per weight.
pub fn generate_submodule(m: &Module, hw: &ModuleVector) -> Vec<ModuleVector> {
    let order = m.order();
    let mut spans: BTreeMap<Weight, IncrementalBasis> = BTreeMap::new();
    let wt_of = |v: &ModuleVector| m.weights[v.entries()[0].0].clone();
    let mut out = vec![hw.clone()];
    spans.entry(wt_of(hw)).or_insert_with(|| IncrementalBasis::new(order)).insert(hw);
    let mut frontier = vec![hw.clone()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for i in 0..m.rank() {
            for v in &frontier {
                let w = m.f[i].apply(v);
                if w.is_zero() {
                    continue;
                }
                if spans.entry(wt_of(&w)).or_insert_with(|| IncrementalBasis::new(order)).insert(&w) {
                    out.push(w.clone());
                    next.push(w);
                }
            }
        }
        frontier = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn datum(t: &str) -> Arc<CartanDatum> {
        Arc::new(CartanDatum::from_type(t).unwrap())
    }

    fn w(c: &[i64]) -> Weight {
        Weight(c.to_vec())
    }

    #[test]
    fn a1_fundamental() {
        let c = datum("A1");
        let m = make_irreducible(&c, &w(&[1])).unwrap();
        assert_eq!(m.dim(), 2);
        assert_eq!(m.weights(), &[w(&[1]), w(&[-1])]);
    }

    #[test]
    fn a2_fundamental_weights() {
        let c = datum("A2");
        let m = make_irreducible(&c, &w(&[1, 0])).unwrap();
        // omega_1, omega_1 - alpha_1, omega_1 - alpha_1 - alpha_2
        assert_eq!(m.weights(), &[w(&[1, 0]), w(&[-1, 1]), w(&[0, -1])]);
    }

    #[test]
    fn a1_string_identities() {
        let c = datum("A1");
        let m = make_irreducible(&c, &w(&[2])).unwrap();
        assert_eq!(m.dim(), 3);
        let hw = SparseVector::unit(0, m.order());
        let f1 = m.f(0).apply(&hw);
        let f2 = m.f(0).apply(&f1);
        // oracle: E F^2 v = [2] F v computed by the commutator relation
        assert_eq!(m.e(0).apply(&f2), f1.scale(&quantum_integer(2, 1, m.order())));
        let fd = m.f_divided(0, 2).apply(&hw);
        assert_eq!(fd, SparseVector::unit(2, m.order()));
        assert!(m.f_divided(0, 0).is_identity());
        assert_eq!(m.f_divided(0, 1), *m.f(0));
    }

    #[test]
    fn dimensions_match_weyl_formula() {
        for (t, hw, dim) in [
            ("A2", vec![1, 1], 8),
            ("A2", vec![2, 0], 6),
            ("B2", vec![1, 0], 5),
            ("B2", vec![0, 1], 4),
            ("G2", vec![1, 0], 7),
            ("A1", vec![3], 4),
        ] {
            let m = make_irreducible(&datum(t), &Weight(hw)).unwrap();
            assert_eq!(m.dim(), dim, "{t}");
        }
    }

    #[test]
    fn rejects_non_dominant() {
        assert_eq!(make_irreducible(&datum("A1"), &w(&[-1])).unwrap_err(), ModError::NotDominant(w(&[-1])));
    }

    #[test]
    fn tensor_coproduct_entry() {
        let c = datum("A1");
        let v = Arc::new(make_irreducible(&c, &w(&[1])).unwrap());
        let t = tensor(&v, &v).unwrap();
        t.check_relations().unwrap();
        let order = t.order();
        // basis (+,+),(+,-),(-,+),(-,-): E(b_- ⊗ b_-) = q^{-1} b_+ ⊗ b_- + b_- ⊗ b_+
        let img = t.e(0).apply(&SparseVector::unit(3, order));
        assert_eq!(img, SparseVector::from_entries([(1, F::q_int(-1, order)), (2, F::one(order))]));
        let mult: Vec<usize> = t.weight_spaces().values().map(Vec::len).collect();
        assert_eq!(mult, vec![1, 2, 1]);
    }

    #[test]
    fn weight_zero_highest_vector() {
        let c = datum("A1");
        let v = Arc::new(make_irreducible(&c, &w(&[1])).unwrap());
        let t = tensor(&v, &v).unwrap();
        let hv = t.highest_weight_vectors(&w(&[0]));
        assert_eq!(hv.len(), 1);
        // proportional to b_- ⊗ b_+ - q b_+ ⊗ b_-
        let x = &hv[0];
        let ratio = x.get(1).unwrap() / x.get(2).unwrap();
        assert_eq!(ratio, -F::q_int(1, t.order()));
    }

    #[test]
    fn clebsch_gordan_decompositions() {
        let c = datum("A2");
        let a = Arc::new(make_irreducible(&c, &w(&[1, 0])).unwrap());
        let b = Arc::new(make_irreducible(&c, &w(&[0, 1])).unwrap());
        let t = tensor(&a, &b).unwrap();
        let d = t.decomposition().unwrap();
        let dims: Vec<(Weight, usize)> = d.components.iter().map(|c| (c.highest.clone(), c.basis.len())).collect();
        assert_eq!(dims, vec![(w(&[1, 1]), 8), (w(&[0, 0]), 1)]);
        let top = tensor_vectors(&SparseVector::unit(0, t.order()), &SparseVector::unit(0, t.order()), b.dim());
        assert_eq!(d.project(&top, &w(&[1, 1])), top);
    }

    #[test]
    fn tensor_multiplicities_convolve() {
        let c = datum("B2");
        let a = Arc::new(make_irreducible(&c, &w(&[1, 0])).unwrap());
        let b = Arc::new(make_irreducible(&c, &w(&[0, 1])).unwrap());
        let t = tensor(&a, &b).unwrap();
        for (mu, idx) in t.weight_spaces() {
            let conv: usize = a
                .weight_spaces()
                .iter()
                .map(|(x, xs)| xs.len() * b.weight_space(&(mu - x)).len())
                .sum();
            assert_eq!(conv, idx.len());
        }
        t.check_relations().unwrap();
        let total: usize = t.decomposition().unwrap().components.iter().map(|c| c.basis.len()).sum();
        assert_eq!(total, 20);
    }

    #[test]
    fn relation_checker_catches_corruption() {
        let c = datum("A1");
        let m = make_irreducible(&c, &w(&[1])).unwrap();
        let mut bad = Module::assemble(
            c.clone(),
            m.weights.clone(),
            vec![m.e[0].scale(&F::q_int(1, m.order()))],
            m.f.clone(),
            m.provenance.clone(),
        );
        assert!(bad.check_relations().is_err());
        bad.e[0] = m.e[0].clone();
        assert!(bad.check_relations().is_ok());
    }
}
