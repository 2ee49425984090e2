//! Exact sparse and dense linear algebra over `Q(q^{1/D})`.

use std::collections::BTreeSet;

use serde_json::{json, Value};

use crate::exec::Exec;
use crate::qscalar::FieldElement;

type F = FieldElement;

/// Rough size of an entry; used to prefer simple pivots.
fn complexity(x: &F) -> usize {
    x.numerator().terms().len() + 4 * (x.denominator().terms().len() - 1)
}

/// A sparse vector: sorted `(index, value)` pairs, no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, F)>,
}

impl SparseVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from unsorted pairs, summing duplicates and dropping zeros.
    pub fn from_entries<I: IntoIterator<Item = (usize, F)>>(it: I) -> Self {
        let mut v: Vec<(usize, F)> = it.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        v.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, F)> = Vec::with_capacity(v.len());
        for (i, c) in v {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc = &*acc + &c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Self { entries: out }
    }

    pub fn unit(i: usize, order: u32) -> Self {
        Self { entries: vec![(i, F::one(order))] }
    }

    pub fn from_dense(v: &[F]) -> Self {
        Self {
            entries: v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| (i, c.clone())).collect(),
        }
    }

    pub fn to_dense(&self, n: usize, order: u32) -> Vec<F> {
        let mut out = vec![F::zero(order); n];
        for (i, c) in &self.entries {
            out[*i] = c.clone();
        }
        out
    }

    pub fn entries(&self) -> &[(usize, F)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> Option<&F> {
        self.entries.binary_search_by_key(&i, |e| e.0).ok().map(|k| &self.entries[k].1)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: &F, other: &SparseVector) -> SparseVector {
        if c.is_zero() {
            return self.clone();
        }
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.entries;
        let b = &other.entries;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push((b[j].0, c * &b[j].1));
                j += 1;
            } else {
                let s = &a[i].1 + &(c * &b[j].1);
                if !s.is_zero() {
                    out.push((a[i].0, s));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVector { entries: out }
    }

    pub fn add(&self, other: &SparseVector) -> SparseVector {
        let mut out = Vec::with_capacity(self.entries.len() + other.entries.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.entries;
        let b = &other.entries;
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                out.push(a[i].clone());
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                out.push(b[j].clone());
                j += 1;
            } else {
                let s = &a[i].1 + &b[j].1;
                if !s.is_zero() {
                    out.push((a[i].0, s));
                }
                i += 1;
                j += 1;
            }
        }
        SparseVector { entries: out }
    }

    pub fn sub(&self, other: &SparseVector) -> SparseVector {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> SparseVector {
        SparseVector { entries: self.entries.iter().map(|(i, c)| (*i, -c)).collect() }
    }

    pub fn scale(&self, c: &F) -> SparseVector {
        if c.is_zero() {
            return SparseVector::new();
        }
        if c.is_one() {
            return self.clone();
        }
        SparseVector { entries: self.entries.iter().map(|(i, x)| (*i, x * c)).collect() }
    }

    /// Coefficient-wise bar.
    pub fn bar(&self) -> SparseVector {
        SparseVector { entries: self.entries.iter().map(|(i, c)| (*i, c.bar())).collect() }
    }

    pub fn dot(&self, other: &SparseVector, order: u32) -> F {
        let (mut i, mut j) = (0, 0);
        let mut acc = F::zero(order);
        let a = &self.entries;
        let b = &other.entries;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = &acc + &(&a[i].1 * &b[j].1);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    /// Reindexes through `map` (entries mapping to `None` are dropped).
    pub fn remap(&self, map: impl Fn(usize) -> Option<usize>) -> SparseVector {
        SparseVector::from_entries(self.entries.iter().filter_map(|(i, c)| map(*i).map(|j| (j, c.clone()))))
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.entries.iter().map(|(i, c)| json!([i, c.to_json()])).collect())
    }
}

/// Row-major sparse matrix over the field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    order: u32,
    rows: Vec<SparseVector>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize, order: u32) -> Self {
        Self { nrows, ncols, order, rows: vec![SparseVector::new(); nrows] }
    }

    pub fn identity(n: usize, order: u32) -> Self {
        Self::diagonal((0..n).map(|_| F::one(order)).collect(), order)
    }

    pub fn diagonal(d: Vec<F>, order: u32) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            order,
            rows: d.into_iter().enumerate().map(|(i, c)| SparseVector::from_entries([(i, c)])).collect(),
        }
    }

    pub fn from_rows(ncols: usize, order: u32, rows: Vec<SparseVector>) -> Self {
        Self { nrows: rows.len(), ncols, order, rows }
    }

    /// Builds a matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(nrows: usize, order: u32, cols: &[SparseVector]) -> Self {
        Self::from_triplets(
            nrows,
            cols.len(),
            order,
            cols.iter().enumerate().flat_map(|(j, c)| c.entries().iter().map(move |(i, x)| (*i, j, x.clone()))),
        )
    }

    pub fn from_triplets<I: IntoIterator<Item = (usize, usize, F)>>(
        nrows: usize,
        ncols: usize,
        order: u32,
        it: I,
    ) -> Self {
        let mut buckets: Vec<Vec<(usize, F)>> = vec![Vec::new(); nrows];
        for (i, j, c) in it {
            debug_assert!(i < nrows && j < ncols);
            buckets[i].push((j, c));
        }
        Self { nrows, ncols, order, rows: buckets.into_iter().map(SparseVector::from_entries).collect() }
    }

    pub fn from_dense(m: &[Vec<F>], ncols: usize, order: u32) -> Self {
        Self { nrows: m.len(), ncols, order, rows: m.iter().map(|r| SparseVector::from_dense(r)).collect() }
    }

    pub fn to_dense(&self) -> Vec<Vec<F>> {
        self.rows.iter().map(|r| r.to_dense(self.ncols, self.order)).collect()
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn row(&self, i: usize) -> &SparseVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[SparseVector] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(SparseVector::nnz).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.rows[i].get(j).cloned().unwrap_or_else(|| F::zero(self.order))
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &F)> {
        self.rows.iter().enumerate().flat_map(|(i, r)| r.entries().iter().map(move |(j, c)| (i, *j, c)))
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(SparseVector::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.nrows == self.ncols
            && self.rows.iter().enumerate().all(|(i, r)| r.nnz() == 1 && r.entries()[0].0 == i && r.entries()[0].1.is_one())
    }

    pub fn column(&self, j: usize) -> SparseVector {
        SparseVector::from_entries(self.rows.iter().enumerate().filter_map(|(i, r)| r.get(j).map(|c| (i, c.clone()))))
    }

    pub fn columns(&self) -> Vec<SparseVector> {
        self.transpose().rows
    }

    pub fn transpose(&self) -> SparseMatrix {
        SparseMatrix::from_triplets(self.ncols, self.nrows, self.order, self.triplets().map(|(i, j, c)| (j, i, c.clone())))
    }

    /// `self * x`.
    pub fn apply(&self, x: &SparseVector) -> SparseVector {
        SparseVector::from_entries(
            self.rows.iter().enumerate().map(|(i, r)| (i, r.dot(x, self.order))).filter(|(_, c)| !c.is_zero()),
        )
    }

    fn mul_row(&self, row: &SparseVector, rhs: &SparseMatrix) -> SparseVector {
        let mut acc = SparseVector::new();
        for (k, c) in row.entries() {
            acc = acc.axpy(c, &rhs.rows[*k]);
        }
        acc
    }

    pub fn mul(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.mul_with(rhs, Exec::Sequential)
    }

    pub fn mul_with(&self, rhs: &SparseMatrix, exec: Exec) -> SparseMatrix {
        assert_eq!(self.ncols, rhs.nrows, "dimension mismatch in matrix product");
        let rows = exec.map(&self.rows, |r| self.mul_row(r, rhs));
        SparseMatrix { nrows: self.nrows, ncols: rhs.ncols, order: self.order, rows }
    }

    pub fn add(&self, rhs: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let rows = self.rows.iter().zip(&rhs.rows).map(|(a, b)| a.add(b)).collect();
        self.with_rows(rows)
    }

    pub fn sub(&self, rhs: &SparseMatrix) -> SparseMatrix {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> SparseMatrix {
        self.with_rows(self.rows.iter().map(SparseVector::neg).collect())
    }

    pub fn scale(&self, c: &F) -> SparseMatrix {
        self.with_rows(self.rows.iter().map(|r| r.scale(c)).collect())
    }

    /// Entrywise bar.
    pub fn bar(&self) -> SparseMatrix {
        self.with_rows(self.rows.iter().map(SparseVector::bar).collect())
    }

    fn with_rows(&self, rows: Vec<SparseVector>) -> SparseMatrix {
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, order: self.order, rows }
    }

    /// Kronecker product with left factor major: index `(i, k) -> i * dim(rhs) + k`.
    pub fn kron(&self, rhs: &SparseMatrix) -> SparseMatrix {
        let mut rows = Vec::with_capacity(self.nrows * rhs.nrows);
        for a in &self.rows {
            for b in &rhs.rows {
                let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
                for (j, x) in a.entries() {
                    for (l, y) in b.entries() {
                        entries.push((j * rhs.ncols + l, x * y));
                    }
                }
                rows.push(SparseVector { entries });
            }
        }
        SparseMatrix { nrows: self.nrows * rhs.nrows, ncols: self.ncols * rhs.ncols, order: self.order, rows }
    }

    /// Connected blocks of the bipartite row/column incidence graph.
    fn blocks(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let n = self.nrows + self.ncols;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, j, _) in self.triplets() {
            let a = find(&mut parent, i);
            let b = find(&mut parent, self.nrows + j);
            if a != b {
                parent[a] = b;
            }
        }
        let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
        for x in 0..n {
            let r = find(&mut parent, x);
            let g = groups.entry(r).or_default();
            if x < self.nrows {
                g.0.push(x);
            } else {
                g.1.push(x - self.nrows);
            }
        }
        groups.into_values().collect()
    }

    pub fn inverse(&self) -> Option<SparseMatrix> {
        self.inverse_with(Exec::Sequential)
    }

    /// Inverse by independent dense inversion of each connected block.
    pub fn inverse_with(&self, exec: Exec) -> Option<SparseMatrix> {
        if self.nrows != self.ncols {
            return None;
        }
        let blocks = self.blocks();
        if blocks.iter().any(|(r, c)| r.len() != c.len()) {
            return None;
        }
        let order = self.order;
        let inverted = exec.map(&blocks, |(rows, cols)| {
            let sub: Vec<Vec<F>> = rows.iter().map(|&i| cols.iter().map(|&j| self.get(i, j)).collect()).collect();
            dense::inverse(&sub, order)
        });
        let mut trip = Vec::new();
        for ((rows, cols), inv) in blocks.iter().zip(inverted) {
            let inv = inv?;
            for (a, &c) in cols.iter().enumerate() {
                for (b, &r) in rows.iter().enumerate() {
                    if !inv[a][b].is_zero() {
                        trip.push((c, r, inv[a][b].clone()));
                    }
                }
            }
        }
        Some(SparseMatrix::from_triplets(self.nrows, self.ncols, order, trip))
    }

    /// First differing entry, for counterexample reporting.
    pub fn first_difference(&self, other: &SparseMatrix) -> Option<(usize, usize, F, F)> {
        for i in 0..self.nrows.min(other.nrows) {
            if self.rows[i] != other.rows[i] {
                let d = self.rows[i].sub(&other.rows[i]);
                let j = d.entries()[0].0;
                return Some((i, j, self.get(i, j), other.get(i, j)));
            }
        }
        None
    }

    /// Sparse `[row, col, value]` triplets in row-major order.
    pub fn to_json(&self) -> Value {
        Value::Array(self.triplets().map(|(i, j, c)| json!([i, j, c.to_json()])).collect())
    }
}

/// Dense routines used on small blocks (weight spaces, string spaces).
pub mod dense {
    use super::{complexity, F};

    /// In-place reduced row echelon form; returns pivot columns.
    pub fn rref(m: &mut [Vec<F>], ncols: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..ncols {
            if r == m.len() {
                break;
            }
            let Some(p) = (r..m.len()).filter(|&i| !m[i][c].is_zero()).min_by_key(|&i| complexity(&m[i][c])) else {
                continue;
            };
            m.swap(r, p);
            let inv = m[r][c].inv().expect("nonzero pivot");
            if !inv.is_one() {
                for x in m[r].iter_mut() {
                    if !x.is_zero() {
                        *x = &*x * &inv;
                    }
                }
            }
            let pivot_row = m[r].clone();
            for (i, row) in m.iter_mut().enumerate() {
                if i == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    if !y.is_zero() {
                        *x = &*x - &(&f * y);
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(m: &[Vec<F>], ncols: usize) -> usize {
        let mut m = m.to_vec();
        rref(&mut m, ncols).len()
    }

    /// Basis of `{x : m x = 0}`.
    pub fn null_space(m: &[Vec<F>], ncols: usize, order: u32) -> Vec<Vec<F>> {
        let mut m = m.to_vec();
        let pivots = rref(&mut m, ncols);
        let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![F::zero(order); ncols];
                x[f] = F::one(order);
                for (r, &p) in pivots.iter().enumerate() {
                    x[p] = -&m[r][f];
                }
                x
            })
            .collect()
    }

    /// Some solution `X` of `a X = b` (free variables set to zero), or `None`.
    pub fn solve(a: &[Vec<F>], ncols: usize, b: &[Vec<F>], order: u32) -> Option<Vec<Vec<F>>> {
        let k = b.first().map_or(0, Vec::len);
        let mut aug: Vec<Vec<F>> = a.iter().zip(b).map(|(ra, rb)| ra.iter().chain(rb).cloned().collect()).collect();
        let pivots = rref(&mut aug, ncols + k);
        if pivots.iter().any(|&p| p >= ncols) {
            return None;
        }
        let mut x = vec![vec![F::zero(order); k]; ncols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[r][ncols..].to_vec();
        }
        Some(x)
    }

    pub fn inverse(a: &[Vec<F>], order: u32) -> Option<Vec<Vec<F>>> {
        let n = a.len();
        let id: Vec<Vec<F>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { F::one(order) } else { F::zero(order) }).collect()).collect();
        let mut aug: Vec<Vec<F>> = a.iter().zip(&id).map(|(ra, ri)| ra.iter().chain(ri).cloned().collect()).collect();
        let pivots = rref(&mut aug, 2 * n);
        if pivots.len() < n || pivots[n - 1] >= n {
            return if n == 0 { Some(Vec::new()) } else { None };
        }
        Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
    }
}

/// Incrementally maintained echelon basis of a span, remembering how each
/// reduced row was formed from the inserted vectors.
#[derive(Clone, Debug)]
pub struct IncrementalBasis {
    order: u32,
    /// (pivot index, reduced row, combination of accepted inputs)
    rows: Vec<(usize, SparseVector, SparseVector)>,
    accepted: usize,
}

impl IncrementalBasis {
    pub fn new(order: u32) -> Self {
        Self { order, rows: Vec::new(), accepted: 0 }
    }

    pub fn len(&self) -> usize {
        self.accepted
    }

    pub fn is_empty(&self) -> bool {
        self.accepted == 0
    }

    /// Reduces `v` against the stored rows; returns the remainder and the
    /// combination (over accepted inputs) that was subtracted.
    fn reduce(&self, v: &SparseVector) -> (SparseVector, SparseVector) {
        let mut r = v.clone();
        let mut combo = SparseVector::new();
        for (p, row, c) in &self.rows {
            if let Some(x) = r.get(*p) {
                let f = x / row.get(*p).expect("pivot entry");
                r = r.axpy(&-&f, row);
                combo = combo.axpy(&f, c);
            }
        }
        (r, combo)
    }

    pub fn contains(&self, v: &SparseVector) -> bool {
        self.reduce(v).0.is_zero()
    }

    /// Adds `v` if independent; returns whether it was accepted.
    pub fn insert(&mut self, v: &SparseVector) -> bool {
        let (r, combo) = self.reduce(v);
        if r.is_zero() {
            return false;
        }
        let pivot = r.entries().iter().min_by_key(|(_, c)| complexity(c)).map(|e| e.0).expect("nonzero");
        let own = SparseVector::unit(self.accepted, self.order).sub(&combo);
        self.rows.push((pivot, r, own));
        self.accepted += 1;
        true
    }

    /// Coordinates of `v` over the accepted inputs, if `v` is in their span.
    pub fn coordinates(&self, v: &SparseVector) -> Option<SparseVector> {
        let (r, combo) = self.reduce(v);
        r.is_zero().then_some(combo)
    }
}

/// Result of a sparse linear solve.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome {
    Unique(Vec<F>),
    Inconsistent,
    Underdetermined { free: usize },
}

/// Solves `sum_k c_k x_k = rhs` for each equation by sparse elimination,
/// always pivoting on the equation with fewest remaining unknowns.
pub fn solve_sparse(unknowns: usize, equations: Vec<(SparseVector, F)>, order: u32) -> SolveOutcome {
    let mut eqs: Vec<Option<(SparseVector, F)>> = Vec::with_capacity(equations.len());
    let mut occurs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); unknowns];
    for (lhs, rhs) in equations {
        if lhs.is_zero() {
            if !rhs.is_zero() {
                return SolveOutcome::Inconsistent;
            }
            continue;
        }
        let id = eqs.len();
        for k in lhs.support() {
            occurs[k].insert(id);
        }
        eqs.push(Some((lhs, rhs)));
    }
    let mut active: BTreeSet<usize> = (0..eqs.len()).collect();
    let mut pivots: Vec<(usize, SparseVector, F)> = Vec::new();
    let mut pivoted = vec![false; unknowns];
    while let Some(&e) = active.iter().min_by_key(|&&e| eqs[e].as_ref().map_or(usize::MAX, |q| q.0.nnz())) {
        active.remove(&e);
        let (lhs, rhs) = eqs[e].take().expect("active equation");
        if lhs.is_zero() {
            if !rhs.is_zero() {
                return SolveOutcome::Inconsistent;
            }
            continue;
        }
        let p = lhs
            .entries()
            .iter()
            .min_by_key(|(k, c)| (occurs[*k].len(), complexity(c)))
            .map(|e| e.0)
            .expect("nonzero equation");
        for k in lhs.support() {
            occurs[k].remove(&e);
        }
        let cp = lhs.get(p).expect("pivot").clone();
        let targets: Vec<usize> = occurs[p].iter().copied().collect();
        for t in targets {
            let (tl, tr) = eqs[t].take().expect("occurring equation");
            let f = tl.get(p).expect("occurrence").clone() / &cp;
            let nl = tl.axpy(&-&f, &lhs);
            let nr = &tr - &(&f * &rhs);
            for k in tl.support() {
                if nl.get(k).is_none() {
                    occurs[k].remove(&t);
                }
            }
            for k in nl.support() {
                occurs[k].insert(t);
            }
            eqs[t] = Some((nl, nr));
        }
        pivoted[p] = true;
        pivots.push((p, lhs, rhs));
    }
    let free = pivoted.iter().filter(|x| !**x).count();
    if free > 0 {
        return SolveOutcome::Underdetermined { free };
    }
    let mut x = vec![F::zero(order); unknowns];
    for (p, lhs, rhs) in pivots.into_iter().rev() {
        let mut acc = rhs;
        let mut cp = None;
        for (k, c) in lhs.entries() {
            if *k == p {
                cp = Some(c.clone());
            } else if !x[*k].is_zero() {
                acc = &acc - &(c * &x[*k]);
            }
        }
        x[p] = acc / cp.expect("pivot coefficient");
    }
    SolveOutcome::Unique(x)
}
