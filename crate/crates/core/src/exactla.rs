//! Exact sparse linear algebra over `Rat`.
//!
//! Elimination is incremental: each incoming row is reduced against the current pivots and,
//! if a residual survives, its smallest-height entry becomes a new pivot. Pivot choice only
//! affects coefficient growth, never the result.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rat::{self, Rat};

pub type SparseVec = BTreeMap<usize, Rat>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), Rat>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn from_dense(rows: &[Vec<Rat>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = RatMatrix::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, v) in row.iter().enumerate() {
                m.add(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_sparse_rows(cols: usize, rows: Vec<SparseVec>) -> Self {
        let mut m = RatMatrix::new(rows.len(), cols);
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row {
                m.add(i, j, v);
            }
        }
        m
    }

    pub fn add(&mut self, i: usize, j: usize, v: Rat) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) outside {}x{}", self.rows, self.cols);
        if v.is_zero() {
            return;
        }
        let e = self.entries.entry((i, j)).or_insert_with(Rat::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&(i, j));
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Rat {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn sparse_rows(&self) -> Vec<SparseVec> {
        let mut out = vec![SparseVec::new(); self.rows];
        for ((i, j), v) in &self.entries {
            out[*i].insert(*j, v.clone());
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![Rat::zero(); self.rows];
        for ((i, j), a) in &self.entries {
            out[*i] += a * &v[*j];
        }
        out
    }
}

/// Row echelon form built one row at a time.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pub cols: usize,
    /// Pivot rows, normalized so the pivot entry is 1. Each is reduced against all earlier pivots.
    rows: Vec<(usize, SparseVec)>,
    pivot_of: BTreeMap<usize, usize>,
}

fn axpy(target: &mut SparseVec, c: &Rat, x: &SparseVec) {
    for (j, v) in x {
        let e = target.entry(*j).or_insert_with(Rat::zero);
        *e -= c * v;
        if e.is_zero() {
            target.remove(j);
        }
    }
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon { cols, rows: Vec::new(), pivot_of: BTreeMap::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.pivot_of.keys().copied().collect()
    }

    /// Residual of `v` after eliminating every pivot column.
    pub fn reduce(&self, v: &SparseVec) -> SparseVec {
        let mut r = v.clone();
        // Row k only contains pivots of rows after k, so eliminating the earliest row first terminates.
        loop {
            let hit = r.keys().filter_map(|j| self.pivot_of.get(j)).min().copied();
            let Some(k) = hit else { break };
            let (p, row) = &self.rows[k];
            let c = r[p].clone();
            axpy(&mut r, &c, row);
        }
        r
    }

    /// Insert a row; returns true if it increased the rank.
    pub fn push(&mut self, v: &SparseVec) -> bool {
        let r = self.reduce(v);
        if r.is_empty() {
            return false;
        }
        let (&p, _) = r
            .iter()
            .min_by_key(|(j, x)| (rat::height(x), **j))
            .expect("nonempty residual");
        let inv = Rat::one() / &r[&p];
        let r: SparseVec = r.into_iter().map(|(j, x)| (j, x * &inv)).collect();
        self.pivot_of.insert(p, self.rows.len());
        self.rows.push((p, r));
        true
    }

    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Fully reduced rows (every pivot column is zero in every other row), keyed by pivot.
    pub fn rref(&self) -> BTreeMap<usize, SparseVec> {
        let mut done: Vec<SparseVec> = vec![SparseVec::new(); self.rows.len()];
        for k in (0..self.rows.len()).rev() {
            let mut r = self.rows[k].1.clone();
            let p = self.rows[k].0;
            loop {
                let hit = r
                    .keys()
                    .find(|j| **j != p && self.pivot_of.get(j).is_some_and(|&q| q > k))
                    .copied();
                let Some(j) = hit else { break };
                let c = r[&j].clone();
                axpy(&mut r, &c, &done[self.pivot_of[&j]]);
            }
            done[k] = r;
        }
        self.rows.iter().map(|(p, _)| *p).zip(done).collect()
    }

    /// Basis of `{v : every pushed row · v = 0}`, one vector per free column.
    pub fn kernel(&self) -> Vec<Vec<Rat>> {
        let rref = self.rref();
        let mut out = Vec::new();
        for f in 0..self.cols {
            if rref.contains_key(&f) {
                continue;
            }
            let mut v = vec![Rat::zero(); self.cols];
            v[f] = Rat::one();
            for (p, row) in &rref {
                if let Some(c) = row.get(&f) {
                    v[*p] = -c.clone();
                }
            }
            out.push(v);
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<Rat>>,
}

pub fn to_sparse(v: &[Rat]) -> SparseVec {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(j, x)| (j, x.clone())).collect()
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace { ambient_dim, basis: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        let basis = (0..ambient_dim)
            .map(|i| {
                let mut v = vec![Rat::zero(); ambient_dim];
                v[i] = Rat::one();
                v
            })
            .collect();
        Subspace { ambient_dim, basis }
    }

    /// Span of arbitrary vectors, keeping an independent subset as basis.
    pub fn span(ambient_dim: usize, vectors: &[Vec<Rat>]) -> Self {
        let mut ech = Echelon::new(ambient_dim);
        let mut basis = Vec::new();
        for v in vectors {
            assert_eq!(v.len(), ambient_dim, "vector length differs from ambient dimension");
            if ech.push(&to_sparse(v)) {
                basis.push(v.clone());
            }
        }
        Subspace { ambient_dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn echelon(&self) -> Echelon {
        let mut ech = Echelon::new(self.ambient_dim);
        for v in &self.basis {
            ech.push(&to_sparse(v));
        }
        ech
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.echelon().contains(&to_sparse(v))
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        let ech = self.echelon();
        other.basis.iter().all(|v| ech.contains(&to_sparse(v)))
    }
}

pub fn rank(m: &RatMatrix) -> usize {
    let mut ech = Echelon::new(m.cols);
    for row in m.sparse_rows() {
        ech.push(&row);
    }
    ech.rank()
}

/// Basis of the kernel; each vector is re-verified against `m` before returning.
pub fn nullspace(m: &RatMatrix) -> Subspace {
    let mut ech = Echelon::new(m.cols);
    for row in m.sparse_rows() {
        ech.push(&row);
    }
    let basis = ech.kernel();
    for v in &basis {
        assert!(m.mul_vec(v).iter().all(Zero::is_zero), "nullspace vector fails verification");
    }
    Subspace { ambient_dim: m.cols, basis }
}

/// One solution of `m·x = b`, or `None` if inconsistent.
///
/// Read off the kernel of `[m | −b]`: any kernel vector with a nonzero last entry gives a
/// solution, whatever columns the elimination chose as pivots.
pub fn solve(m: &RatMatrix, b: &[Rat]) -> Option<Vec<Rat>> {
    assert_eq!(b.len(), m.rows);
    let mut ech = Echelon::new(m.cols + 1);
    for (i, mut row) in m.sparse_rows().into_iter().enumerate() {
        if !b[i].is_zero() {
            row.insert(m.cols, -b[i].clone());
        }
        ech.push(&row);
    }
    let v = ech.kernel().into_iter().find(|v| !v[m.cols].is_zero())?;
    let inv = Rat::one() / &v[m.cols];
    let x: Vec<Rat> = v[..m.cols].iter().map(|c| c * &inv).collect();
    debug_assert_eq!(m.mul_vec(&x), b.to_vec());
    Some(x)
}

/// Kernel of `e_j ↦ columns[j]`, where each column is a sparse vector indexed by any ordered key.
pub fn column_kernel<K: Ord + Clone>(columns: &[BTreeMap<K, Rat>]) -> Subspace {
    let mut rows: BTreeMap<K, SparseVec> = BTreeMap::new();
    for (j, col) in columns.iter().enumerate() {
        for (k, v) in col {
            if !v.is_zero() {
                rows.entry(k.clone()).or_default().insert(j, v.clone());
            }
        }
    }
    nullspace(&RatMatrix::from_sparse_rows(columns.len(), rows.into_values().collect()))
}

/// One `x` with `Σ x_j columns[j] = target`, or `None`.
pub fn column_solve<K: Ord + Clone>(columns: &[BTreeMap<K, Rat>], target: &BTreeMap<K, Rat>) -> Option<Vec<Rat>> {
    let mut keys: BTreeMap<K, usize> = BTreeMap::new();
    for k in columns.iter().flat_map(|c| c.keys()).chain(target.keys()) {
        let next = keys.len();
        keys.entry(k.clone()).or_insert(next);
    }
    let mut m = RatMatrix::new(keys.len(), columns.len());
    for (j, col) in columns.iter().enumerate() {
        for (k, v) in col {
            m.add(keys[k], j, v.clone());
        }
    }
    let mut b = vec![Rat::zero(); keys.len()];
    for (k, v) in target {
        b[keys[k]] = v.clone();
    }
    solve(&m, &b)
}

/// Impose linear constraints one at a time on the span of `initial`.
///
/// `apply(c, o)` is a linear image of `o` that must vanish. Returns the surviving basis as
/// coordinate vectors over `initial` together with the combined objects. Later constraints only
/// see the survivors, so cheap, selective constraints should come first.
pub fn refine_kernel<O, C, K, A, M>(initial: Vec<O>, constraints: &[C], apply: A, combine: M) -> (Vec<Vec<Rat>>, Vec<O>)
where
    O: Send + Sync,
    C: Sync,
    K: Ord + Clone + Send,
    A: Fn(&C, &O) -> BTreeMap<K, Rat> + Sync,
    M: Fn(&[O], &[Rat]) -> O + Sync,
{
    use rayon::prelude::*;
    let dim = initial.len();
    let mut coords: Vec<Vec<Rat>> = (0..dim)
        .map(|i| {
            let mut v = vec![Rat::zero(); dim];
            v[i] = Rat::one();
            v
        })
        .collect();
    let mut ops = initial;
    for c in constraints {
        if ops.is_empty() {
            break;
        }
        let cols: Vec<BTreeMap<K, Rat>> = ops.par_iter().map(|o| apply(c, o)).collect();
        if cols.iter().all(|col| col.is_empty()) {
            continue;
        }
        let ker = column_kernel(&cols);
        let new_ops: Vec<O> = ker.basis.par_iter().map(|v| combine(&ops, v)).collect();
        coords = ker
            .basis
            .iter()
            .map(|v| {
                let mut w = vec![Rat::zero(); dim];
                for (j, cj) in v.iter().enumerate() {
                    if cj.is_zero() {
                        continue;
                    }
                    for (wi, x) in w.iter_mut().zip(&coords[j]) {
                        if !x.is_zero() {
                            *wi += cj * x;
                        }
                    }
                }
                w
            })
            .collect();
        ops = new_ops;
    }
    (coords, ops)
}

/// `dim Z − dim span(B)`, after checking `span(B) ⊆ Z`.
pub fn quotient_dim(z: &Subspace, b: &Subspace) -> Result<usize> {
    if z.ambient_dim != b.ambient_dim {
        return Err(Error::Dimension(format!("ambient {} vs {}", z.ambient_dim, b.ambient_dim)));
    }
    let zech = z.echelon();
    let mut bech = Echelon::new(b.ambient_dim);
    for v in &b.basis {
        let s = to_sparse(v);
        if !zech.contains(&s) {
            return Err(Error::NotContained);
        }
        bech.push(&s);
    }
    Ok(zech.rank() - bech.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{frac, int};

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_dense(&rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect::<Vec<_>>())
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace(&RatMatrix::new(2, 3)).dim(), 3);
        assert_eq!(nullspace(&m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).dim(), 0);
        let ns = nullspace(&m(&[&[1, 2], &[2, 4]]));
        assert_eq!(ns.dim(), 1);
        let v = &ns.basis[0];
        assert_eq!(&v[0] * int(1), &v[1] * int(-2));
    }

    #[test]
    fn quotient_examples() {
        let z = Subspace::full(2);
        assert_eq!(quotient_dim(&z, &Subspace::zero(2)).unwrap(), 2);
        assert_eq!(quotient_dim(&z, &Subspace::span(2, &[vec![int(1), int(1)]])).unwrap(), 1);
        let z1 = Subspace::span(2, &[vec![int(1), int(0)]]);
        let b1 = Subspace::span(2, &[vec![int(0), int(1)]]);
        assert_eq!(quotient_dim(&z1, &b1), Err(Error::NotContained));
    }

    #[test]
    fn solve_when_rhs_is_the_cheapest_pivot() {
        let m = RatMatrix::from_dense(&[vec![int(3)]]);
        assert_eq!(solve(&m, &[int(1)]).unwrap(), vec![frac(1, 3)]);
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &[int(3), int(1)]).unwrap(), vec![int(2), int(1)]);
        let s = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&s, &[int(1), int(3)]).is_none());
    }

    #[test]
    fn rank_plus_nullity() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 0, 1]]);
        assert_eq!(rank(&a) + nullspace(&a).dim(), 4);
    }
}
