//! Partition functions of cyclic A-infinity algebras on ribbon graphs and the
//! characteristic class `exp(h')` in the Chevalley-Eilenberg complex.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::ainfinity::{AlgebraError, CyclicAInfinity};
use crate::cyclic_lie::{contract, feynman, CeChain, CyclicPoly, Letter, SymplecticSpace, Word};
use crate::graph_complex::{GraphBasis, GraphChain};
use crate::linalg::{self, Echelon};
use crate::ribbon_graph::{GraphKey, RibbonGraph};
use crate::super_core::{darboux_basis, qi, qr, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("difference in cell ({0}, {1}) is not a boundary")]
    NotBoundary(usize, usize),
}

/// An algebra prepared for contractions.
#[derive(Debug, Clone)]
pub struct PartitionFunction {
    pub space: SymplecticSpace,
    tensors: HashMap<usize, HashMap<Word, Q>>,
}

impl PartitionFunction {
    pub fn new(alg: &CyclicAInfinity) -> Result<Self, PartitionError> {
        Ok(Self { space: alg.symplectic_space()?, tensors: alg.vertex_tensors() })
    }

    /// `kappa^A(sigma_c . (h_{k_1} (x) .. (x) h_{k_m}))`, before dividing by `|Aut|`.
    pub fn amplitude(&self, g: &RibbonGraph) -> Q {
        let empty = HashMap::new();
        let ts: Vec<&HashMap<Word, Q>> = g.vertices.iter().map(|v| self.tensors.get(&v.len()).unwrap_or(&empty)).collect();
        contract(&self.space, g, &ts)
    }

    /// `Z_A(G)`.
    pub fn value(&self, g: &RibbonGraph) -> Q {
        let can = g.canonical();
        if can.zero {
            return Q::zero();
        }
        self.amplitude(g) / qi(can.aut as i64)
    }

    pub fn value_key(&self, k: &GraphKey, aut: u64) -> Q {
        self.amplitude(&k.to_graph()) / qi(aut as i64)
    }

    /// `Z_A` evaluated on a chain of graphs.
    pub fn on_chain(&self, c: &GraphChain) -> Q {
        let mut s = Q::zero();
        for (k, v) in &c.terms {
            let a = self.value(&k.to_graph());
            if !a.is_zero() {
                s += v * a;
            }
        }
        s
    }

    /// `sum Z_A(G) G` over basis graphs with at most `max_edges` edges.
    pub fn chain(&self, basis: &GraphBasis, max_edges: usize) -> GraphChain {
        self.chain_filtered(basis, max_edges, |_| true)
    }

    /// `sum Z_A(G) G` over connected basis graphs with at most `max_edges` edges.
    pub fn connected_chain(&self, basis: &GraphBasis, max_edges: usize) -> GraphChain {
        self.chain_filtered(basis, max_edges, |k| k.vertices() > 0 && k.to_graph().is_connected())
    }

    fn chain_filtered(&self, basis: &GraphBasis, max_edges: usize, keep: impl Fn(&GraphKey) -> bool + Sync) -> GraphChain {
        let items: Vec<(&GraphKey, u64)> = basis
            .cells
            .iter()
            .filter(|((_, j), _)| *j <= max_edges)
            .flat_map(|(_, cell)| cell.keys.iter().zip(cell.aut.iter().copied()))
            .filter(|(k, _)| keep(k))
            .collect();
        let values: Vec<Q> = items.par_iter().map(|(k, aut)| self.value_key(k, *aut)).collect();
        let mut out = GraphChain::new();
        for ((k, _), v) in items.into_iter().zip(values) {
            out.add_key(k.clone(), v);
        }
        out
    }
}

/// `exp(c) = sum c^m / m!` under disjoint union, truncated at `max_edges`.
/// `c` must have no component on the empty graph.
pub fn exp_union(c: &GraphChain, max_edges: usize) -> GraphChain {
    let mut out = GraphChain::basis(GraphKey::empty());
    let mut power = GraphChain::basis(GraphKey::empty());
    let mut m = 1i64;
    loop {
        power = power.union(c).truncated(max_edges).scaled(&qr(1, m));
        if power.is_zero() {
            break;
        }
        out.add(&power);
        m += 1;
    }
    out
}

/// The characteristic class `exp(h')` of an algebra.
#[derive(Debug, Clone)]
pub struct CharacteristicClass {
    pub space: SymplecticSpace,
    pub hamiltonian: CyclicPoly,
    pub chain: CeChain,
    /// Whether the letters were brought to canonical Darboux form.
    pub darboux: bool,
}

/// Linear change of letters `l -> sum_j m[l][j] j'` applied to a cyclic polynomial.
fn substitute(space: &SymplecticSpace, f: &CyclicPoly, m: &[Vec<Q>]) -> CyclicPoly {
    let mut out = CyclicPoly::default();
    for (w, c) in &f.terms {
        let mut partial: Vec<(Word, Q)> = vec![(Vec::new(), c.clone())];
        for &l in w {
            let mut next = Vec::new();
            for (pw, pc) in &partial {
                for (j, x) in m[l as usize].iter().enumerate() {
                    if x.is_zero() {
                        continue;
                    }
                    let mut nw = pw.clone();
                    nw.push(j as Letter);
                    next.push((nw, pc * x));
                }
            }
            partial = next;
        }
        for (nw, nc) in partial {
            out.add_word(space, &nw, nc);
        }
    }
    out
}

/// `sum_{m <= max_factors} h'^m / m!`, keeping wedge monomials with at most
/// `max_letters` letters. Letters are moved to the canonical form when the
/// pairing allows it over the rationals.
pub fn characteristic_class(alg: &CyclicAInfinity, max_factors: usize, max_letters: usize) -> Result<CharacteristicClass, PartitionError> {
    class_in(alg, max_factors, max_letters, true)
}

/// As [`characteristic_class`], always in the letters of the algebra.
pub fn characteristic_class_raw(alg: &CyclicAInfinity, max_factors: usize, max_letters: usize) -> Result<CharacteristicClass, PartitionError> {
    class_in(alg, max_factors, max_letters, false)
}

fn class_in(alg: &CyclicAInfinity, max_factors: usize, max_letters: usize, normalize: bool) -> Result<CharacteristicClass, PartitionError> {
    let (s, f) = alg.hamiltonian()?;
    let d = darboux_basis(&s.super_space(), &s.form).map_err(AlgebraError::from)?;
    let (space, ham, darboux) = if normalize && d.normalized {
        // Rows of `change` are the new vectors, so its inverse expresses old letters in new ones.
        let subst = linalg::dense_inverse(&d.change).expect("change of basis is invertible");
        let cs = SymplecticSpace::canonical(d.n, d.m);
        let g = substitute(&cs, &f, &subst);
        (cs, g, true)
    } else {
        (s, f, false)
    };
    let h = ham.truncated(max_letters);
    let mut hchain = CeChain::new();
    for (w, c) in &h.terms {
        hchain.add_monomial(&space, std::slice::from_ref(w), c.clone());
    }
    let mut chain = CeChain::new();
    chain.add_monomial(&space, &[], Q::one());
    let mut power = chain.clone();
    for m in 1..=max_factors {
        let next = power.wedge(&space, &hchain);
        power = CeChain {
            terms: next
                .terms
                .into_iter()
                .filter(|(k, _)| k.iter().map(Vec::len).sum::<usize>() <= max_letters)
                .map(|(k, v)| (k, v / qi(m as i64)))
                .collect(),
        };
        chain.add(&power);
    }
    Ok(CharacteristicClass { space, hamiltonian: ham, chain, darboux })
}

impl CharacteristicClass {
    /// `F_G(c_A)`.
    pub fn amplitude(&self, g: &RibbonGraph) -> Q {
        feynman(&self.space, &self.chain, g)
    }
}

/// Column spans of `d: C_{i+1,j+1} -> C_{i,j}` for every cell `(i, j)` with
/// `j <= max_edges`, used to certify that two chains are homologous.
#[derive(Debug)]
pub struct BoundaryImage<'a> {
    basis: &'a GraphBasis,
    max_edges: usize,
    spans: BTreeMap<(usize, usize), Echelon>,
}

impl<'a> BoundaryImage<'a> {
    /// `basis` must be enumerated through `max_edges + 1` edges.
    pub fn new(basis: &'a GraphBasis, max_edges: usize) -> Self {
        assert!(basis.max_edges > max_edges, "basis must reach one edge past the certified range");
        let cells: Vec<(usize, usize)> = basis.cells.keys().copied().filter(|&(_, j)| j <= max_edges).collect();
        let spans = cells
            .into_par_iter()
            .map(|(i, j)| {
                let span = match basis.boundary_matrix(i + 1, j + 1) {
                    Ok(m) => linalg::column_span(&m),
                    Err(_) => Echelon::untracked(),
                };
                ((i, j), span)
            })
            .collect();
        Self { basis, max_edges, spans }
    }

    /// Checks that `b - a` is a boundary in every cell with at most `max_edges`
    /// edges. Returns the number of cells where the difference is nonzero.
    pub fn certify(&self, a: &GraphChain, b: &GraphChain) -> Result<usize, PartitionError> {
        let mut diff = b.truncated(self.max_edges);
        diff.add(&a.truncated(self.max_edges).scaled(&qi(-1)));
        let cells: BTreeSet<(usize, usize)> = diff.terms.keys().map(|k| k.bidegree()).collect();
        let mut nonzero = 0;
        for (i, j) in cells {
            let v = self.basis.coordinates(&diff, i, j).map_err(|_| PartitionError::NotBoundary(i, j))?;
            if v.is_empty() {
                continue;
            }
            nonzero += 1;
            let span = self.spans.get(&(i, j)).ok_or(PartitionError::NotBoundary(i, j))?;
            if !span.contains(&v) {
                return Err(PartitionError::NotBoundary(i, j));
            }
        }
        Ok(nonzero)
    }
}

/// Outcome of a verification pass: how many identities were checked, how
/// many of them involved nonzero values, and witnesses of the first failures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub checked: usize,
    pub nontrivial: usize,
    pub failed: usize,
    pub witnesses: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }

    fn check(&mut self, ok: bool, nontrivial: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        self.nontrivial += usize::from(nontrivial);
        if !ok {
            self.failed += 1;
            if self.witnesses.len() < 5 {
                self.witnesses.push(witness());
            }
        }
    }
}

fn keys_upto(basis: &GraphBasis, max_edges: usize) -> impl Iterator<Item = (&GraphKey, u64)> {
    basis
        .cells
        .iter()
        .filter(move |((_, j), _)| *j <= max_edges)
        .flat_map(|(_, c)| c.keys.iter().zip(c.aut.iter().copied()))
}

/// `Z_A(delta G) = 0` for every basis graph with at most `max_edges` edges.
pub fn verify_cycle(alg: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize) -> Result<Report, PartitionError> {
    let pf = PartitionFunction::new(alg)?;
    let keys: Vec<&GraphKey> = keys_upto(basis, max_edges).map(|(k, _)| k).collect();
    let values: Vec<(Q, bool)> = keys
        .par_iter()
        .map(|k| {
            let d = crate::graph_complex::coboundary_graph(&k.to_graph());
            let mut total = Q::zero();
            let mut any = false;
            for (t, c) in &d.terms {
                let z = pf.value(&t.to_graph());
                any |= !z.is_zero();
                total += c * z;
            }
            (total, any)
        })
        .collect();
    let mut r = Report::default();
    for (k, (v, any)) in keys.into_iter().zip(values) {
        r.check(v.is_zero(), any, || format!("Z(delta {k}) = {}", crate::super_core::fmt_q(&v)));
    }
    Ok(r)
}

/// `Z_A(G) = 0` on every basis graph with an odd number of vertices.
pub fn verify_odd_vertices(alg: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize) -> Result<Report, PartitionError> {
    let pf = PartitionFunction::new(alg)?;
    let z = pf.chain(basis, max_edges);
    let mut r = Report::default();
    for (k, _) in keys_upto(basis, max_edges).filter(|(k, _)| k.vertices() % 2 == 1) {
        let v = z.coeff(k);
        r.check(v.is_zero(), false, || format!("Z({k}) = {}", crate::super_core::fmt_q(&v)));
    }
    Ok(r)
}

/// `exp(Z^C_A) = Z_A` coefficientwise.
pub fn verify_exp(alg: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize) -> Result<Report, PartitionError> {
    let pf = PartitionFunction::new(alg)?;
    let z = pf.chain(basis, max_edges);
    let e = exp_union(&pf.connected_chain(basis, max_edges), max_edges);
    let mut r = Report::default();
    for (k, _) in keys_upto(basis, max_edges) {
        let (a, b) = (z.coeff(k), e.coeff(k));
        r.check(a == b, !a.is_zero(), || format!("{k}: Z = {}, exp(Z^C) = {}", crate::super_core::fmt_q(&a), crate::super_core::fmt_q(&b)));
    }
    Ok(r)
}

/// `F_G(c_A) = |Aut G| Z_A(G)` through two independent pipelines.
pub fn verify_equivalence(alg: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize) -> Result<Report, PartitionError> {
    let pf = PartitionFunction::new(alg)?;
    let c = characteristic_class(alg, (2 * max_edges / 3).max(1), 2 * max_edges)?;
    let items: Vec<(&GraphKey, u64)> = keys_upto(basis, max_edges).collect();
    let pairs: Vec<(Q, Q)> = items
        .par_iter()
        .map(|(k, aut)| {
            let g = k.to_graph();
            (c.amplitude(&g), pf.value_key(k, *aut) * qi(*aut as i64))
        })
        .collect();
    let mut r = Report::default();
    for ((k, _), (f, z)) in items.into_iter().zip(pairs) {
        r.check(f == z, !f.is_zero(), || format!("{k}: F(c_A) = {}, |Aut| Z = {}", crate::super_core::fmt_q(&f), crate::super_core::fmt_q(&z)));
    }
    Ok(r)
}

/// `<<c_{A+B}, G>> = <<c_A . c_B, G>>` for the stable product of the classes.
pub fn verify_direct_sum(a: &CyclicAInfinity, b: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize) -> Result<Report, PartitionError> {
    let (factors, letters) = ((2 * max_edges / 3).max(1), 2 * max_edges);
    let sum = characteristic_class(&a.direct_sum(b), factors, letters)?;
    let ca = characteristic_class(a, factors, letters)?;
    let cb = characteristic_class(b, factors, letters)?;
    let (space, prod) = crate::cyclic_lie::stable_product(&ca.space, &ca.chain, &cb.space, &cb.chain);
    let prod = CeChain {
        terms: prod
            .terms
            .into_iter()
            .filter(|(k, _)| k.len() <= factors && k.iter().map(Vec::len).sum::<usize>() <= letters)
            .collect(),
    };
    let items: Vec<(&GraphKey, u64)> = keys_upto(basis, max_edges).collect();
    let pairs: Vec<(Q, Q)> = items
        .par_iter()
        .map(|(k, _)| {
            let g = k.to_graph();
            (sum.amplitude(&g), feynman(&space, &prod, &g))
        })
        .collect();
    let mut r = Report::default();
    for ((k, _), (x, y)) in items.into_iter().zip(pairs) {
        r.check(x == y, !x.is_zero(), || format!("{k}: c_(A+B) = {}, c_A c_B = {}", crate::super_core::fmt_q(&x), crate::super_core::fmt_q(&y)));
    }
    Ok(r)
}

/// Conjugates `alg` plus a trivial plane by `exp({g, -})` for random even
/// Hamiltonians `g` of length three or four with `{g, h'} != 0`, and
/// certifies `Z_(A') - Z_A` is a boundary in every cell with at most
/// `max_edges` edges. `basis` must reach `max_edges + 1`.
pub fn verify_homotopy(alg: &CyclicAInfinity, basis: &GraphBasis, max_edges: usize, seed: u64, trials: usize) -> Result<Report, PartitionError> {
    use rand::SeedableRng;
    let img = BoundaryImage::new(basis, max_edges);
    let base = alg.direct_sum(&CyclicAInfinity::trivial(1, 0));
    let z0 = PartitionFunction::new(&base)?.chain(basis, max_edges);
    let s = base.symplectic_space()?;
    let (_, h0) = base.hamiltonian()?;
    let max_len = (2 * max_edges).saturating_sub(3).max(3);
    let mut r = Report::default();
    for t in 0..trials {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(t as u64));
        let g = (0..1000).map(|_| crate::ainfinity::random_even_hamiltonian(&s, &mut rng, 3)).find(|g| !s.bracket(g, &h0).is_zero());
        let Some(g) = g else {
            r.check(false, false, || format!("trial {t}: no vector field acts nontrivially"));
            continue;
        };
        let conj = base.conjugate(&g, max_len)?;
        let z1 = PartitionFunction::new(&conj)?.chain(basis, max_edges);
        let res = img.certify(&z0, &z1);
        r.check(res.is_ok(), z0 != z1, || format!("trial {t}: {}", res.as_ref().err().map(ToString::to_string).unwrap_or_default()));
    }
    Ok(r)
}
