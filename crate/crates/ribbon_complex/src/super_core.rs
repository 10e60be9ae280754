//! Exact scalars, super vector spaces, Koszul signs and graded tensors.
//!
//! Permutations act on the left: `perm[i]` is the output slot of input slot `i`,
//! so `(perm . y)[perm[i]] = y[i]`, with a sign of `-1` for every pair of odd
//! factors whose relative order is reversed.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg;

/// Exact rational scalar.
pub type Q = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SuperError {
    #[error("not a permutation of 0..{0}")]
    NotPermutation(usize),
    #[error("parity vector has length {got}, expected {expected}")]
    ParityLength { got: usize, expected: usize },
    #[error("pairing is not even: entry ({0}, {1}) couples opposite parities")]
    NotEven(usize, usize),
    #[error("pairing is not graded-skew at ({0}, {1})")]
    NotGradedSkew(usize, usize),
    #[error("pairing is degenerate")]
    Degenerate,
    #[error("malformed rational {0:?}")]
    BadRational(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `a`, `-a` or `a/b`.
pub fn parse_q(s: &str) -> Result<Q, SuperError> {
    let s = s.trim();
    let bad = || SuperError::BadRational(s.to_string());
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Formats as `a` or `a/b`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sign_q(s: i32) -> Q {
    if s >= 0 {
        Q::one()
    } else {
        -Q::one()
    }
}

fn check_perm(perm: &[usize]) -> Result<(), SuperError> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(SuperError::NotPermutation(perm.len()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Sign of a permutation, `+1` or `-1`.
pub fn perm_sign(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut s = 1;
    for i in 0..perm.len() {
        if seen[i] {
            continue;
        }
        let mut j = i;
        let mut len = 0;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len % 2 == 0 {
            s = -s;
        }
    }
    s
}

/// Koszul sign of moving factors with the given parities along `perm`.
pub fn koszul_sign(perm: &[usize], parities: &[bool]) -> Result<i32, SuperError> {
    check_perm(perm)?;
    if parities.len() != perm.len() {
        return Err(SuperError::ParityLength { got: parities.len(), expected: perm.len() });
    }
    Ok(koszul_unchecked(perm, parities))
}

pub(crate) fn koszul_unchecked(perm: &[usize], parities: &[bool]) -> i32 {
    let mut s = 1;
    for i in 0..perm.len() {
        if !parities[i] {
            continue;
        }
        for j in i + 1..perm.len() {
            if parities[j] && perm[i] > perm[j] {
                s = -s;
            }
        }
    }
    s
}

/// Inverse permutation.
pub fn perm_inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

/// `(a . b)[i] = a[b[i]]`, so acting by the product acts by `b` first.
pub fn perm_compose(a: &[usize], b: &[usize]) -> Vec<usize> {
    b.iter().map(|&i| a[i]).collect()
}

/// The cycle `(n n-1 ... 1)`: slot `i` moves to slot `i - 1`, slot `0` to `n - 1`.
pub fn cyclic_z(n: usize) -> Vec<usize> {
    (0..n).map(|i| (i + n - 1) % n).collect()
}

/// Block permutation of `sizes.len()` blocks: block `i` moves to block slot `sigma[i]`.
pub fn block_permutation(sigma: &[usize], sizes: &[usize]) -> Vec<usize> {
    let inv = perm_inverse(sigma);
    let mut new_start = vec![0; sizes.len()];
    let mut acc = 0;
    for &b in &inv {
        new_start[b] = acc;
        acc += sizes[b];
    }
    let mut out = Vec::with_capacity(acc);
    for (b, &sz) in sizes.iter().enumerate() {
        for t in 0..sz {
            out.push(new_start[b] + t);
        }
    }
    out
}

/// A finite-dimensional super vector space with a labelled homogeneous basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperSpace {
    pub labels: Vec<String>,
    pub parity: Vec<bool>,
}

impl SuperSpace {
    pub fn new(labels: Vec<String>, parity: Vec<bool>) -> Result<Self, SuperError> {
        if labels.len() != parity.len() {
            return Err(SuperError::ParityLength { got: parity.len(), expected: labels.len() });
        }
        Ok(Self { labels, parity })
    }

    /// `C^{2n|m}` with basis `p1..pn, q1..qn, x1..xm`.
    pub fn canonical(n: usize, m: usize) -> Self {
        let mut labels = Vec::new();
        let mut parity = Vec::new();
        for i in 1..=n {
            labels.push(format!("p{i}"));
            parity.push(false);
        }
        for i in 1..=n {
            labels.push(format!("q{i}"));
            parity.push(false);
        }
        for j in 1..=m {
            labels.push(format!("x{j}"));
            parity.push(true);
        }
        Self { labels, parity }
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn even_dim(&self) -> usize {
        self.parity.iter().filter(|p| !**p).count()
    }

    pub fn odd_dim(&self) -> usize {
        self.parity.iter().filter(|p| **p).count()
    }
}

/// Bilinear form given by its Gram matrix on the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InnerProduct {
    pub matrix: Vec<Vec<Q>>,
}

impl InnerProduct {
    /// The canonical form on `C^{2n|m}`: `<p_i,q_i> = 1`, `<q_i,p_i> = -1`, `<x_j,x_j> = 1`.
    pub fn canonical(n: usize, m: usize) -> Self {
        let d = 2 * n + m;
        let mut matrix = vec![vec![Q::zero(); d]; d];
        for i in 0..n {
            matrix[i][n + i] = qi(1);
            matrix[n + i][i] = qi(-1);
        }
        for j in 0..m {
            matrix[2 * n + j][2 * n + j] = qi(1);
        }
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn get(&self, a: usize, b: usize) -> &Q {
        &self.matrix[a][b]
    }

    /// Checks evenness, graded skew-symmetry and nondegeneracy.
    pub fn validate(&self, space: &SuperSpace) -> Result<(), SuperError> {
        let d = space.dim();
        if self.matrix.len() != d || self.matrix.iter().any(|r| r.len() != d) {
            return Err(SuperError::Dimension(format!("pairing is not {d}x{d}")));
        }
        for a in 0..d {
            for b in 0..d {
                let v = &self.matrix[a][b];
                if space.parity[a] != space.parity[b] {
                    if !v.is_zero() {
                        return Err(SuperError::NotEven(a, b));
                    }
                    continue;
                }
                let both_odd = space.parity[a] && space.parity[b];
                let expected = if both_odd { self.matrix[b][a].clone() } else { -self.matrix[b][a].clone() };
                if *v != expected {
                    return Err(SuperError::NotGradedSkew(a, b));
                }
            }
        }
        if linalg::dense_inverse(&self.matrix).is_none() {
            return Err(SuperError::Degenerate);
        }
        Ok(())
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &InnerProduct) -> InnerProduct {
        let (a, b) = (self.dim(), other.dim());
        let mut matrix = vec![vec![Q::zero(); a + b]; a + b];
        for i in 0..a {
            for j in 0..a {
                matrix[i][j] = self.matrix[i][j].clone();
            }
        }
        for i in 0..b {
            for j in 0..b {
                matrix[a + i][a + j] = other.matrix[i][j].clone();
            }
        }
        InnerProduct { matrix }
    }
}

/// The form on the dual space making `x -> <x, ->` an isometry: the Gram matrix inverse.
pub fn inverse_pairing(g: &InnerProduct) -> Result<InnerProduct, SuperError> {
    linalg::dense_inverse(&g.matrix)
        .map(|matrix| InnerProduct { matrix })
        .ok_or(SuperError::Degenerate)
}

/// Result of a rational Darboux reduction.
#[derive(Debug, Clone)]
pub struct Darboux {
    /// Columns are the new basis vectors in old coordinates, ordered `p.., q.., x..`.
    pub change: Vec<Vec<Q>>,
    pub n: usize,
    pub m: usize,
    /// Diagonal values of the odd block after reduction; all ones when normalized.
    pub residual: Vec<Q>,
    pub normalized: bool,
}

fn form(g: &InnerProduct, u: &[Q], v: &[Q]) -> Q {
    let mut s = Q::zero();
    for (i, ui) in u.iter().enumerate() {
        if ui.is_zero() {
            continue;
        }
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            s += ui * &g.matrix[i][j] * vj;
        }
    }
    s
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let (n, d) = (x.numer(), x.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) == n && &(&sd * &sd) == d {
        Some(Q::new(sn, sd))
    } else {
        None
    }
}

/// Rational change of basis bringing `g` to canonical form where possible.
///
/// The even block always reduces over the rationals. The odd block is
/// diagonalized; a diagonal entry that is not a rational square is left in
/// `residual` and `normalized` is false.
pub fn darboux_basis(space: &SuperSpace, g: &InnerProduct) -> Result<Darboux, SuperError> {
    g.validate(space)?;
    let d = space.dim();
    let unit = |i: usize| {
        let mut v = vec![Q::zero(); d];
        v[i] = qi(1);
        v
    };
    let mut evens: Vec<Vec<Q>> = (0..d).filter(|&i| !space.parity[i]).map(unit).collect();
    let mut ps = Vec::new();
    let mut qs = Vec::new();
    while !evens.is_empty() {
        let u = evens.remove(0);
        let pos = evens.iter().position(|w| !form(g, &u, w).is_zero()).ok_or(SuperError::Degenerate)?;
        let w = evens.remove(pos);
        let c = form(g, &u, &w);
        let q: Vec<Q> = w.iter().map(|x| x / &c).collect();
        let p = u;
        evens = evens
            .into_iter()
            .map(|v| {
                let a = form(g, &v, &q);
                let b = form(g, &v, &p);
                v.iter().zip(p.iter().zip(q.iter())).map(|(vi, (pi, qi_))| vi - &a * pi + &b * qi_).collect::<Vec<Q>>()
            })
            .filter(|v| v.iter().any(|x| !x.is_zero()))
            .collect();
        ps.push(p);
        qs.push(q);
    }
    let mut odds: Vec<Vec<Q>> = (0..d).filter(|&i| space.parity[i]).map(unit).collect();
    let mut xs = Vec::new();
    let mut residual = Vec::new();
    while !odds.is_empty() {
        let u = match odds.iter().position(|v| !form(g, v, v).is_zero()) {
            Some(i) => odds.remove(i),
            None => {
                let u = odds.remove(0);
                let pos = odds.iter().position(|w| !form(g, &u, w).is_zero()).ok_or(SuperError::Degenerate)?;
                let w = &odds[pos];
                u.iter().zip(w.iter()).map(|(a, b)| a + b).collect()
            }
        };
        let dd = form(g, &u, &u);
        odds = odds
            .into_iter()
            .map(|v| {
                let f = form(g, &v, &u) / &dd;
                v.iter().zip(u.iter()).map(|(vi, ui)| vi - &f * ui).collect::<Vec<Q>>()
            })
            .filter(|v| v.iter().any(|x| !x.is_zero()))
            .collect();
        match rational_sqrt(&dd) {
            Some(s) => {
                xs.push(u.iter().map(|x| x / &s).collect());
                residual.push(qi(1));
            }
            None => {
                xs.push(u);
                residual.push(dd);
            }
        }
    }
    let normalized = residual.iter().all(|r| r.is_one());
    let (n, m) = (ps.len(), xs.len());
    let mut change = ps;
    change.extend(qs);
    change.extend(xs);
    Ok(Darboux { change, n, m, residual, normalized })
}

/// Sparse element of `V^{(x) k}` in the basis of a [`SuperSpace`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedTensor {
    pub order: usize,
    pub coeffs: BTreeMap<Vec<u16>, Q>,
}

impl GradedTensor {
    pub fn zero(order: usize) -> Self {
        Self { order, coeffs: BTreeMap::new() }
    }

    pub fn basis(word: Vec<u16>) -> Self {
        let mut t = Self::zero(word.len());
        t.coeffs.insert(word, qi(1));
        t
    }

    pub fn add_term(&mut self, word: Vec<u16>, c: Q) {
        debug_assert_eq!(word.len(), self.order);
        if c.is_zero() {
            return;
        }
        match self.coeffs.entry(word) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add(&mut self, other: &GradedTensor) {
        for (k, v) in &other.coeffs {
            self.add_term(k.clone(), v.clone());
        }
    }

    pub fn scale(&mut self, c: &Q) {
        if c.is_zero() {
            self.coeffs.clear();
        } else {
            for v in self.coeffs.values_mut() {
                *v *= c;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Parity if homogeneous; `None` for the zero tensor or mixed parity.
    pub fn parity(&self, space: &SuperSpace) -> Option<bool> {
        let mut it = self.coeffs.keys().map(|w| word_parity(w, &space.parity));
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// Left action of a permutation with Koszul signs.
    pub fn permute(&self, perm: &[usize], space: &SuperSpace) -> Result<GradedTensor, SuperError> {
        check_perm(perm)?;
        if perm.len() != self.order {
            return Err(SuperError::Dimension(format!("permutation of {} slots on order {}", perm.len(), self.order)));
        }
        let mut out = GradedTensor::zero(self.order);
        for (w, c) in &self.coeffs {
            let (nw, s) = permute_word(w, perm, &space.parity);
            out.add_term(nw, c * sign_q(s));
        }
        Ok(out)
    }

    /// Tensor product.
    pub fn tensor(&self, other: &GradedTensor) -> GradedTensor {
        let mut out = GradedTensor::zero(self.order + other.order);
        for (a, x) in &self.coeffs {
            for (b, y) in &other.coeffs {
                let mut w = a.clone();
                w.extend_from_slice(b);
                out.add_term(w, x * y);
            }
        }
        out
    }
}

pub fn word_parity(w: &[u16], parity: &[bool]) -> bool {
    w.iter().filter(|&&l| parity[l as usize]).count() % 2 == 1
}

/// Applies `perm` to a basis word, returning the new word and Koszul sign.
pub fn permute_word(w: &[u16], perm: &[usize], parity: &[bool]) -> (Vec<u16>, i32) {
    let mut out = vec![0u16; w.len()];
    for (i, &l) in w.iter().enumerate() {
        out[perm[i]] = l;
    }
    let par: Vec<bool> = w.iter().map(|&l| parity[l as usize]).collect();
    (out, koszul_unchecked(perm, &par))
}

/// Symmetrizing operators on `V^{(x) k}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetrizer {
    /// `N = sum_i z^i`.
    Norm,
    /// `epsilon = sum_sigma sgn(sigma) sigma`.
    Antisymmetrizer,
}

pub fn apply_symmetrizer(kind: Symmetrizer, t: &GradedTensor, space: &SuperSpace) -> GradedTensor {
    let k = t.order;
    let mut out = GradedTensor::zero(k);
    match kind {
        Symmetrizer::Norm => {
            let z = cyclic_z(k);
            let mut cur = t.clone();
            for _ in 0..k.max(1) {
                out.add(&cur);
                if k > 0 {
                    cur = cur.permute(&z, space).expect("cyclic permutation");
                }
            }
        }
        Symmetrizer::Antisymmetrizer => {
            for perm in all_permutations(k) {
                let mut p = t.permute(&perm, space).expect("permutation");
                p.scale(&sign_q(perm_sign(&perm)));
                out.add(&p);
            }
        }
    }
    out
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
    }
    out
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_swap_is_negative() {
        assert_eq!(koszul_sign(&[1, 0], &[true, true]).unwrap(), -1);
        assert_eq!(koszul_sign(&[1, 0], &[true, false]).unwrap(), 1);
    }

    #[test]
    fn norm_is_z_invariant() {
        let sp = SuperSpace::canonical(1, 2);
        let t = GradedTensor::basis(vec![2, 3, 0, 2]);
        let n = apply_symmetrizer(Symmetrizer::Norm, &t, &sp);
        assert_eq!(n.permute(&cyclic_z(4), &sp).unwrap(), n);
    }

    #[test]
    fn z_moves_first_letter_last() {
        let sp = SuperSpace::canonical(2, 0);
        let t = GradedTensor::basis(vec![0, 1, 2]);
        let z = t.permute(&cyclic_z(3), &sp).unwrap();
        assert_eq!(z, GradedTensor::basis(vec![1, 2, 0]));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(fmt_q(&parse_q("-6/4").unwrap()), "-3/2");
        assert_eq!(fmt_q(&parse_q("7").unwrap()), "7");
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn inverse_twice_is_identity() {
        let g = InnerProduct::canonical(2, 1);
        let h = inverse_pairing(&inverse_pairing(&g).unwrap()).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn darboux_of_hyperbolic_odd_plane_is_not_rational() {
        let sp = SuperSpace::new(vec!["u".into(), "t".into()], vec![true, true]).unwrap();
        let g = InnerProduct { matrix: vec![vec![qi(0), qi(1)], vec![qi(1), qi(0)]] };
        let d = darboux_basis(&sp, &g).unwrap();
        assert!(!d.normalized);
        assert_eq!(d.m, 2);
    }
}
