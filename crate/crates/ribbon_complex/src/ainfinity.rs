//! Cyclic A-infinity algebras given by their cyclically invariant tensors
//! `h_k(x_1, .., x_k) = <m_{k-1}(x_1, .., x_{k-1}), x_k>` on the parity-shifted
//! space, and the associated Hamiltonian on the dual space.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rand::Rng;
use thiserror::Error;

use crate::cyclic_lie::{CyclicPoly, LieError, SymplecticSpace, Word};
use crate::linalg;
use crate::super_core::{
    apply_symmetrizer, cyclic_z, darboux_basis, inverse_pairing, parse_q, qi, qr, GradedTensor, InnerProduct, SuperError,
    SuperSpace, Symmetrizer, Q,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error(transparent)]
    Super(#[from] SuperError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error("h_{0} is not cyclically invariant")]
    NotCyclic(usize),
    #[error("h_{0} is not odd")]
    NotOdd(usize),
    #[error("h_{k} has a word of length {len}")]
    Order { k: usize, len: usize },
    #[error("unknown built-in algebra {0:?}")]
    UnknownBuiltin(String),
    #[error("algebra file line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A cyclic A-infinity algebra on the parity-shifted space `PU`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicAInfinity {
    pub name: String,
    pub space: SuperSpace,
    /// The pairing on `PU`.
    pub pairing: InnerProduct,
    /// `h_k` keyed by `k`, as tensors in the letters of `PU`.
    pub h: BTreeMap<usize, GradedTensor>,
}

impl CyclicAInfinity {
    pub fn validate(&self) -> Result<(), AlgebraError> {
        self.pairing.validate(&self.space)?;
        for (&k, t) in &self.h {
            if let Some(w) = t.coeffs.keys().find(|w| w.len() != k) {
                return Err(AlgebraError::Order { k, len: w.len() });
            }
            if t.is_zero() {
                continue;
            }
            if t.parity(&self.space) != Some(true) {
                return Err(AlgebraError::NotOdd(k));
            }
            if t.permute(&cyclic_z(k), &self.space)? != *t {
                return Err(AlgebraError::NotCyclic(k));
            }
        }
        Ok(())
    }

    /// One odd line `x` with `<x, x> = 1` and `h_3 = x x x`.
    pub fn ground() -> Self {
        let space = SuperSpace::new(vec!["x".into()], vec![true]).expect("space");
        let mut h3 = GradedTensor::zero(3);
        h3.add_term(vec![0, 0, 0], qi(1));
        Self { name: "ground".into(), space, pairing: InnerProduct { matrix: vec![vec![qi(1)]] }, h: [(3, h3)].into_iter().collect() }
    }

    /// Dual numbers `C[t]/t^2` with the trace reading the `t` coefficient.
    pub fn dual_numbers() -> Self {
        let mult = vec![(0, 0, 0, qi(1)), (0, 1, 1, qi(1)), (1, 0, 1, qi(1))];
        let trace = [qi(0), qi(1)];
        Self::from_frobenius("dual", &["u", "t"], &mult, &trace).expect("dual numbers")
    }

    /// Degree-zero Frobenius algebra: `mult` lists `(a, b, c, v)` with `e_a e_b += v e_c`,
    /// the pairing is `<e_a, e_b> = tr(e_a e_b)`.
    pub fn from_frobenius(name: &str, labels: &[&str], mult: &[(usize, usize, usize, Q)], trace: &[Q]) -> Result<Self, AlgebraError> {
        let d = labels.len();
        let mut table = vec![vec![vec![Q::zero(); d]; d]; d];
        for (a, b, c, v) in mult {
            table[*a][*b][*c] += v;
        }
        let space = SuperSpace::new(labels.iter().map(|s| s.to_string()).collect(), vec![true; d])?;
        let mut matrix = vec![vec![Q::zero(); d]; d];
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    matrix[a][b] += &table[a][b][c] * &trace[c];
                }
            }
        }
        let pairing = InnerProduct { matrix };
        let mut h3 = GradedTensor::zero(3);
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    let mut v = Q::zero();
                    for e in 0..d {
                        v += &table[a][b][e] * &pairing.matrix[e][c];
                    }
                    h3.add_term(vec![a as u16, b as u16, c as u16], v);
                }
            }
        }
        let alg = Self { name: name.into(), space, pairing, h: [(3, h3)].into_iter().collect() };
        alg.validate()?;
        Ok(alg)
    }

    /// `C^{2n|m}` with its canonical pairing and all `h_k = 0`.
    pub fn trivial(n: usize, m: usize) -> Self {
        let mut space = SuperSpace::canonical(n, m);
        for l in space.labels.iter_mut() {
            *l = format!("t{l}");
        }
        Self { name: format!("trivial({n}|{m})"), space, pairing: InnerProduct::canonical(n, m), h: BTreeMap::new() }
    }

    pub fn builtin(name: &str) -> Result<Self, AlgebraError> {
        match name.strip_prefix("builtin:").unwrap_or(name) {
            "ground" => Ok(Self::ground()),
            "dual" => Ok(Self::dual_numbers()),
            "ground+ground" => Ok(Self::ground().direct_sum(&Self::ground())),
            other => Err(AlgebraError::UnknownBuiltin(other.to_string())),
        }
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &CyclicAInfinity) -> CyclicAInfinity {
        let d = self.space.dim() as u16;
        let mut labels = self.space.labels.clone();
        for l in &other.space.labels {
            let mut name = l.clone();
            while labels.contains(&name) {
                name.push('\'');
            }
            labels.push(name);
        }
        let mut parity = self.space.parity.clone();
        parity.extend(other.space.parity.iter().copied());
        let mut h = self.h.clone();
        for (&k, t) in &other.h {
            let e = h.entry(k).or_insert_with(|| GradedTensor::zero(k));
            for (w, c) in &t.coeffs {
                e.add_term(w.iter().map(|l| l + d).collect(), c.clone());
            }
        }
        CyclicAInfinity {
            name: format!("{}+{}", self.name, other.name),
            space: SuperSpace { labels, parity },
            pairing: self.pairing.direct_sum(&other.pairing),
            h,
        }
    }

    /// The dual space with the inverse pairing, used for the bracket and for contractions.
    pub fn symplectic_space(&self) -> Result<SymplecticSpace, AlgebraError> {
        let inv = inverse_pairing(&self.pairing)?;
        Ok(SymplecticSpace::new(self.space.clone(), inv)?)
    }

    /// `h' = sum_k [h_k] / k` as cyclic words.
    pub fn hamiltonian(&self) -> Result<(SymplecticSpace, CyclicPoly), AlgebraError> {
        let s = self.symplectic_space()?;
        let mut f = CyclicPoly::default();
        for (&k, t) in &self.h {
            for (w, c) in &t.coeffs {
                f.add_word(&s, w, c * qr(1, k as i64));
            }
        }
        Ok((s, f))
    }

    /// Vertex tensors `h_k` as word maps, as used by contractions.
    pub fn vertex_tensors(&self) -> HashMap<usize, HashMap<Word, Q>> {
        self.h.iter().map(|(&k, t)| (k, t.coeffs.iter().map(|(w, c)| (w.clone(), c.clone())).collect())).collect()
    }

    /// Algebra whose tensors are `N` applied to each homogeneous part of `f`.
    pub fn from_hamiltonian(name: &str, space: &SuperSpace, pairing: &InnerProduct, s: &SymplecticSpace, f: &CyclicPoly) -> Self {
        let mut h: BTreeMap<usize, GradedTensor> = BTreeMap::new();
        for (w, c) in &f.terms {
            if w.len() < 3 {
                continue;
            }
            let e = h.entry(w.len()).or_insert_with(|| GradedTensor::zero(w.len()));
            for (rw, rc) in s.norm(w) {
                e.add_term(rw, c * rc);
            }
        }
        h.retain(|_, t| !t.is_zero());
        Self { name: name.into(), space: space.clone(), pairing: pairing.clone(), h }
    }

    /// Pullback of the Hamiltonian along `exp({g, -})`, keeping words of length at most `max_len`.
    pub fn conjugate(&self, g: &CyclicPoly, max_len: usize) -> Result<CyclicAInfinity, AlgebraError> {
        let (s, f) = self.hamiltonian()?;
        let mut total = f.truncated(max_len);
        let mut term = total.clone();
        let mut n = 1i64;
        loop {
            term = s.bracket(g, &term).truncated(max_len).scaled(&qr(1, n));
            if term.is_zero() {
                break;
            }
            total.add(&term);
            n += 1;
        }
        Ok(Self::from_hamiltonian(&format!("{}~", self.name), &self.space, &self.pairing, &s, &total))
    }

    /// The residual `{h', h'}`; zero exactly when the master equation holds.
    pub fn master_equation_residual(&self) -> Result<CyclicPoly, AlgebraError> {
        let (s, f) = self.hamiltonian()?;
        Ok(s.bracket(&f, &f))
    }

    /// The binary product recovered from `h_3` through the pairing.
    pub fn product(&self) -> Result<Vec<Vec<Vec<Q>>>, AlgebraError> {
        let d = self.space.dim();
        let ginv = linalg::dense_inverse(&self.pairing.matrix).ok_or(SuperError::Degenerate)?;
        let mut m = vec![vec![vec![Q::zero(); d]; d]; d];
        if let Some(h3) = self.h.get(&3) {
            for (w, c) in &h3.coeffs {
                let (a, b, cc) = (w[0] as usize, w[1] as usize, w[2] as usize);
                for e in 0..d {
                    m[a][b][e] += c * &ginv[cc][e];
                }
            }
        }
        Ok(m)
    }

    /// Whether the recovered binary product is associative.
    pub fn is_associative(&self) -> Result<bool, AlgebraError> {
        let m = self.product()?;
        let d = m.len();
        for a in 0..d {
            for b in 0..d {
                for c in 0..d {
                    for out in 0..d {
                        let mut l = Q::zero();
                        let mut r = Q::zero();
                        for e in 0..d {
                            l += &m[a][b][e] * &m[e][c][out];
                            r += &m[b][c][e] * &m[a][e][out];
                        }
                        if l != r {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }

    /// Whether the pairing on the dual space reduces to canonical form over the rationals.
    pub fn darboux_normalizable(&self) -> Result<bool, AlgebraError> {
        let s = self.symplectic_space()?;
        Ok(darboux_basis(&s.super_space(), &s.form)?.normalized)
    }

    /// Parses the line format documented in the README.
    pub fn parse(text: &str) -> Result<Self, AlgebraError> {
        let err = |line: usize, msg: &str| AlgebraError::Parse { line, msg: msg.to_string() };
        let mut name = "file".to_string();
        let mut labels: Vec<String> = Vec::new();
        let mut odd: Vec<String> = Vec::new();
        let mut pairs = Vec::new();
        let mut hs = Vec::new();
        let mut muls = Vec::new();
        let mut trace = Vec::new();
        let mut frobenius = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let ln = i + 1;
            match toks[0] {
                "name" => name = toks[1..].join(" "),
                "basis" => labels = toks[1..].iter().map(|s| s.to_string()).collect(),
                "odd" => odd = toks[1..].iter().map(|s| s.to_string()).collect(),
                "frobenius" => frobenius = true,
                "pair" if toks.len() == 4 => pairs.push((ln, toks[1].to_string(), toks[2].to_string(), toks[3].to_string())),
                "h" if toks.len() >= 4 => {
                    hs.push((ln, toks[1..toks.len() - 1].iter().map(|s| s.to_string()).collect::<Vec<_>>(), toks[toks.len() - 1].to_string()))
                }
                "mul" if toks.len() == 5 => muls.push((ln, toks[1].to_string(), toks[2].to_string(), toks[3].to_string(), toks[4].to_string())),
                "trace" if toks.len() == 3 => trace.push((ln, toks[1].to_string(), toks[2].to_string())),
                _ => return Err(err(ln, "unrecognized line")),
            }
        }
        let idx = |ln: usize, l: &str| labels.iter().position(|x| x == l).ok_or_else(|| err(ln, &format!("unknown basis label {l:?}")));
        let q = |ln: usize, s: &str| parse_q(s).map_err(|e| err(ln, &e.to_string()));
        if frobenius {
            let mut mult = Vec::new();
            for (ln, a, b, c, v) in &muls {
                mult.push((idx(*ln, a)?, idx(*ln, b)?, idx(*ln, c)?, q(*ln, v)?));
            }
            let mut tr = vec![Q::zero(); labels.len()];
            for (ln, a, v) in &trace {
                tr[idx(*ln, a)?] = q(*ln, v)?;
            }
            let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
            return Self::from_frobenius(&name, &refs, &mult, &tr);
        }
        let parity = labels.iter().map(|l| odd.contains(l)).collect();
        let space = SuperSpace::new(labels.clone(), parity)?;
        let d = labels.len();
        let mut matrix = vec![vec![Q::zero(); d]; d];
        for (ln, a, b, v) in &pairs {
            matrix[idx(*ln, a)?][idx(*ln, b)?] = q(*ln, v)?;
        }
        let mut h: BTreeMap<usize, GradedTensor> = BTreeMap::new();
        for (ln, ws, v) in &hs {
            let w: Vec<u16> = ws.iter().map(|l| idx(*ln, l).map(|i| i as u16)).collect::<Result<_, _>>()?;
            h.entry(w.len()).or_insert_with(|| GradedTensor::zero(w.len())).add_term(w, q(*ln, v)?);
        }
        let alg = Self { name, space, pairing: InnerProduct { matrix }, h };
        alg.validate()?;
        Ok(alg)
    }

    /// Serializes in the format read by [`CyclicAInfinity::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("name {}\nbasis {}\n", self.name, self.space.labels.join(" "));
        let odd: Vec<&str> =
            self.space.labels.iter().zip(&self.space.parity).filter(|(_, p)| **p).map(|(l, _)| l.as_str()).collect();
        if !odd.is_empty() {
            s.push_str(&format!("odd {}\n", odd.join(" ")));
        }
        let l = &self.space.labels;
        for (a, row) in self.pairing.matrix.iter().enumerate() {
            for (b, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    s.push_str(&format!("pair {} {} {}\n", l[a], l[b], crate::super_core::fmt_q(v)));
                }
            }
        }
        for t in self.h.values() {
            for (w, v) in &t.coeffs {
                let ws: Vec<&str> = w.iter().map(|&i| l[i as usize].as_str()).collect();
                s.push_str(&format!("h {} {}\n", ws.join(" "), crate::super_core::fmt_q(v)));
            }
        }
        s
    }
}

/// A random cyclically invariant odd cubic tensor on the odd plane of the dual
/// numbers, added to its `h_3`. Generic perturbations break associativity.
pub fn perturbed_dual<R: Rng>(rng: &mut R) -> CyclicAInfinity {
    let mut alg = CyclicAInfinity::dual_numbers();
    let mut t = GradedTensor::zero(3);
    for a in 0..2u16 {
        for b in 0..2u16 {
            for c in 0..2u16 {
                let v = rng.gen_range(-3..=3);
                t.add_term(vec![a, b, c], qi(v));
            }
        }
    }
    let sym = apply_symmetrizer(Symmetrizer::Norm, &t, &alg.space);
    alg.h.get_mut(&3).expect("h3").add(&sym);
    alg.name = "dual-perturbed".into();
    alg
}

/// A random even Hamiltonian with words of length three or four in the
/// letters of `s`, used to generate symplectic vector fields of order at least two.
pub fn random_even_hamiltonian<R: Rng>(s: &SymplecticSpace, rng: &mut R, words: usize) -> CyclicPoly {
    let mut f = CyclicPoly::default();
    let d = s.dim() as u16;
    while f.terms.len() < words {
        let len = rng.gen_range(3..=4);
        let w: Vec<u16> = (0..len).map(|_| rng.gen_range(0..d)).collect();
        if s.word_parity(&w) {
            continue;
        }
        let c = qr(rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 }, rng.gen_range(1..=2));
        f.add_word(s, &w, c);
    }
    f
}
