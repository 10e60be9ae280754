//! Exact linear algebra over the rationals.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::super_core::Q;

/// Inverse of a square matrix, `None` when singular.
pub fn dense_inverse(m: &[Vec<Q>]) -> Option<Vec<Vec<Q>>> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let inv = Q::one() / &a[c][c];
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                let pivot = a[c].clone();
                for (x, y) in a[r].iter_mut().zip(pivot.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Sparse vector keyed by coordinate.
pub type SparseVec = BTreeMap<usize, Q>;

fn axpy(target: &mut SparseVec, f: &Q, v: &SparseVec) {
    for (k, x) in v {
        let e = target.entry(*k).or_insert_with(Q::zero);
        *e += f * x;
        if e.is_zero() {
            target.remove(k);
        }
    }
}

/// Sparse matrix stored by columns.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub cols: Vec<SparseVec>,
}

impl SparseMatrix {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, cols: vec![SparseVec::new(); ncols] }
    }

    pub fn add(&mut self, row: usize, col: usize, v: &Q) {
        let e = self.cols[col].entry(row).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.cols[col].remove(&row);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> Q {
        self.cols[col].get(&row).cloned().unwrap_or_else(Q::zero)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(|c| c.len()).sum()
    }

    pub fn apply(&self, x: &[Q]) -> Vec<Q> {
        let mut out = vec![Q::zero(); self.nrows];
        for (c, col) in self.cols.iter().enumerate() {
            if x[c].is_zero() {
                continue;
            }
            for (r, v) in col {
                out[*r] += v * &x[c];
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix::new(self.ncols, self.nrows);
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                t.cols[*r].insert(c, v.clone());
            }
        }
        t
    }

    /// Product `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        let mut out = SparseMatrix::new(self.nrows, other.ncols);
        for (c, col) in other.cols.iter().enumerate() {
            let mut acc = SparseVec::new();
            for (k, v) in col {
                axpy(&mut acc, v, &self.cols[*k]);
            }
            out.cols[c] = acc;
        }
        out
    }
}

/// Column echelon form built incrementally, optionally tracking how each
/// pivot vector is expressed in terms of the inserted columns.
#[derive(Debug, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, (SparseVec, SparseVec)>,
    inserted: usize,
    untracked: bool,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    /// An echelon form that only records the span; `solve` is unavailable.
    pub fn untracked() -> Self {
        Self { untracked: true, ..Self::default() }
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `v` against the pivots; returns the remainder and the
    /// combination of inserted columns that was subtracted.
    fn reduce(&self, mut v: SparseVec) -> (SparseVec, SparseVec) {
        let mut combo = SparseVec::new();
        let mut from = 0usize;
        loop {
            let Some((&lead, _)) = v.range(from..).next() else { break };
            match self.pivots.get(&lead) {
                Some((pv, pc)) => {
                    let f = &v[&lead] / &pv[&lead];
                    let neg = -f.clone();
                    axpy(&mut v, &neg, pv);
                    if !self.untracked {
                        axpy(&mut combo, &f, pc);
                    }
                }
                None => from = lead + 1,
            }
        }
        (v, combo)
    }

    /// Inserts a column; returns true when it increased the rank.
    pub fn insert(&mut self, v: SparseVec) -> bool {
        let idx = self.inserted;
        self.inserted += 1;
        let (rem, combo) = self.reduce(v);
        let Some((&lead, _)) = rem.iter().next() else { return false };
        let mut c = SparseVec::new();
        if !self.untracked {
            axpy(&mut c, &-Q::one(), &combo);
            c.insert(idx, Q::one());
        }
        self.pivots.insert(lead, (rem, c));
        true
    }

    /// Coefficients `y` over the inserted columns with `sum y_i col_i = v`, if any.
    pub fn solve(&self, v: &SparseVec) -> Option<SparseVec> {
        assert!(!self.untracked, "solve needs a tracked echelon form");
        let (rem, combo) = self.reduce(v.clone());
        rem.is_empty().then_some(combo)
    }

    /// Whether `v` lies in the span of the inserted columns.
    pub fn contains(&self, v: &SparseVec) -> bool {
        self.reduce(v.clone()).0.is_empty()
    }
}

/// Exact rank.
pub fn rank(m: &SparseMatrix) -> usize {
    column_span(m).rank()
}

/// Echelon form of the column span of `m`.
pub fn column_span(m: &SparseMatrix) -> Echelon {
    let mut order: Vec<usize> = (0..m.ncols).collect();
    order.sort_by_key(|&c| m.cols[c].len());
    let mut e = Echelon::untracked();
    for c in order {
        e.insert(m.cols[c].clone());
    }
    e
}

/// An exact solution of `m y = v`, or `None` when `v` is outside the image.
pub fn solve(m: &SparseMatrix, v: &SparseVec) -> Option<Vec<Q>> {
    let mut e = Echelon::new();
    for c in &m.cols {
        e.insert(c.clone());
    }
    let combo = e.solve(v)?;
    let mut y = vec![Q::zero(); m.ncols];
    for (k, x) in combo {
        y[k] = x;
    }
    Some(y)
}
