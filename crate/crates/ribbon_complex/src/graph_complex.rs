//! The ribbon graph complex: bigraded bases, boundary, coboundary, pairing,
//! disjoint union, coproduct and homology.
//!
//! Cells are indexed by `(vertices, edges)`. The boundary contracts non-loop
//! edges. The coboundary expands ideal edges and, in the basis of unweighted
//! isomorphism classes, carries the weight `|Aut(expanded)| / |Aut(graph)|`.

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::linalg::{self, SparseMatrix, SparseVec};
use crate::ribbon_graph::{perfect_matchings, valence_profiles, GraphKey, RibbonGraph};
use crate::super_core::{perm_sign, qi, qr, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ComplexError {
    #[error("cell ({0}, {1}) lies outside the enumerated range of {2} edges")]
    OutOfRange(usize, usize, usize),
    #[error("graph {0} is not in the basis")]
    NotInBasis(String),
}

/// Rational combination of canonical graphs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphChain {
    pub terms: BTreeMap<GraphKey, Q>,
}

impl GraphChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn basis(key: GraphKey) -> Self {
        let mut c = Self::new();
        c.add_key(key, qi(1));
        c
    }

    pub fn add_key(&mut self, key: GraphKey, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    /// Adds `c * g`, reducing `g` to its canonical class.
    pub fn add_graph(&mut self, g: &RibbonGraph, c: Q) {
        let can = g.canonical();
        if can.zero {
            return;
        }
        self.add_key(can.key, c * qi(can.sign as i64));
    }

    pub fn add(&mut self, other: &GraphChain) {
        for (k, v) in &other.terms {
            self.add_key(k.clone(), v.clone());
        }
    }

    pub fn scaled(&self, c: &Q) -> GraphChain {
        let mut out = GraphChain::new();
        for (k, v) in &self.terms {
            out.add_key(k.clone(), v * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: &GraphKey) -> Q {
        self.terms.get(k).cloned().unwrap_or_else(Q::zero)
    }

    /// Restriction to graphs with at most `max_edges` edges.
    pub fn truncated(&self, max_edges: usize) -> GraphChain {
        GraphChain { terms: self.terms.iter().filter(|(k, _)| k.edges() <= max_edges).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    /// Bilinear disjoint union.
    pub fn union(&self, other: &GraphChain) -> GraphChain {
        let mut out = GraphChain::new();
        for (a, x) in &self.terms {
            let ga = a.to_graph();
            for (b, y) in &other.terms {
                out.add_graph(&ga.disjoint_union(&b.to_graph()), x * y);
            }
        }
        out
    }
}

/// The graph pairing: `<G, G'> = +-1` on isomorphic oriented graphs, else `0`.
pub fn pairing(a: &GraphChain, b: &GraphChain) -> Q {
    let mut s = Q::zero();
    for (k, v) in &a.terms {
        if let Some(w) = b.terms.get(k) {
            s += v * w;
        }
    }
    s
}

/// Boundary of a single oriented graph.
pub fn boundary_graph(g: &RibbonGraph) -> GraphChain {
    let mut out = GraphChain::new();
    for e in 0..g.edges.len() {
        if g.is_loop(e) {
            continue;
        }
        let (h, s) = g.contract(e).expect("non-loop edge");
        out.add_graph(&h, qi(s as i64));
    }
    out
}

pub fn boundary(c: &GraphChain) -> GraphChain {
    let mut out = GraphChain::new();
    for (k, v) in &c.terms {
        out.add(&boundary_graph(&k.to_graph()).scaled(v));
    }
    out
}

/// Coboundary of a single oriented graph in the unweighted basis.
pub fn coboundary_graph(g: &RibbonGraph) -> GraphChain {
    let aut = g.canonical().aut as i64;
    let mut out = GraphChain::new();
    for v in 0..g.vertices.len() {
        for (a, b) in g.ideal_edges(v) {
            let (h, s) = g.expand(v, &a, &b).expect("ideal edge");
            let can = h.canonical();
            if can.zero {
                continue;
            }
            out.add_key(can.key, qr(s as i64 * can.sign as i64 * can.aut as i64, aut));
        }
    }
    out
}

pub fn coboundary(c: &GraphChain) -> GraphChain {
    let mut out = GraphChain::new();
    for (k, v) in &c.terms {
        out.add(&coboundary_graph(&k.to_graph()).scaled(v));
    }
    out
}

/// Graph literal of a key.
pub fn key_literal(k: &GraphKey) -> String {
    k.to_graph().to_string()
}

/// Coproduct: sum over ordered splittings of the set of components.
pub fn coproduct_graph(g: &RibbonGraph) -> BTreeMap<(GraphKey, GraphKey), Q> {
    let comps = g.components();
    let n = comps.len();
    let mut out: BTreeMap<(GraphKey, GraphKey), Q> = BTreeMap::new();
    for mask in 0u64..(1u64 << n) {
        let mut left_v = Vec::new();
        let mut right_v = Vec::new();
        for (i, c) in comps.iter().enumerate() {
            if mask >> i & 1 == 1 {
                left_v.extend(c.iter().copied());
            } else {
                right_v.extend(c.iter().copied());
            }
        }
        left_v.sort_unstable();
        right_v.sort_unstable();
        let mut order = left_v.clone();
        order.extend(right_v.iter().copied());
        let sign = perm_sign(&order);
        let (l, r) = (induced(g, &left_v), induced(g, &right_v));
        let (cl, cr) = (l.canonical(), r.canonical());
        if cl.zero || cr.zero {
            continue;
        }
        let e = out.entry((cl.key, cr.key)).or_insert_with(Q::zero);
        *e += qi((sign * cl.sign * cr.sign) as i64);
    }
    out.retain(|_, v| !v.is_zero());
    out
}

/// Subgraph on a union of components, vertices in the given order.
fn induced(g: &RibbonGraph, verts: &[usize]) -> RibbonGraph {
    let vertices: Vec<Vec<usize>> = verts.iter().map(|&v| g.vertices[v].clone()).collect();
    let present: std::collections::HashSet<usize> = vertices.iter().flatten().copied().collect();
    let edges = g.edges.iter().filter(|(a, _)| present.contains(a)).copied().collect();
    RibbonGraph { vertices, edges }.normalized()
}

/// One bigraded cell of the basis.
#[derive(Debug, Clone, Default)]
pub struct Cell {
    pub keys: Vec<GraphKey>,
    pub aut: Vec<u64>,
    pub index: HashMap<GraphKey, usize>,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.keys.len()
    }
}

/// Canonical classes of a cell, including zero graphs, with automorphism counts.
pub fn enumerate_classes(vertices: usize, edges: usize) -> BTreeMap<GraphKey, (u64, bool)> {
    let mut out = BTreeMap::new();
    if vertices == 0 {
        if edges == 0 {
            out.insert(GraphKey::empty(), (1, false));
        }
        return out;
    }
    let matchings = perfect_matchings(2 * edges);
    for profile in valence_profiles(2 * edges, vertices, 3) {
        let found: HashMap<GraphKey, (u64, bool)> = matchings
            .par_iter()
            .fold(HashMap::new, |mut acc, m| {
                let g = RibbonGraph::from_chords(&profile, m).expect("matching");
                let c = g.canonical();
                acc.entry(c.key).or_insert((c.aut, c.zero));
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                a.extend(b);
                a
            });
        out.extend(found);
    }
    out
}

/// Enumerated basis of all cells with at most `max_edges` edges.
#[derive(Debug, Clone, Default)]
pub struct GraphBasis {
    pub max_edges: usize,
    pub cells: BTreeMap<(usize, usize), Cell>,
}

impl GraphBasis {
    pub fn enumerate(max_edges: usize) -> Self {
        let mut cells = BTreeMap::new();
        for j in 0..=max_edges {
            let imax = if j == 0 { 0 } else { 2 * j / 3 };
            let imin = if j == 0 { 0 } else { 1 };
            for i in imin..=imax {
                let classes = enumerate_classes(i, j);
                let mut cell = Cell::default();
                for (k, (aut, zero)) in classes {
                    if zero {
                        continue;
                    }
                    cell.index.insert(k.clone(), cell.keys.len());
                    cell.keys.push(k);
                    cell.aut.push(aut);
                }
                cells.insert((i, j), cell);
            }
        }
        Self { max_edges, cells }
    }

    pub fn cell(&self, i: usize, j: usize) -> Option<&Cell> {
        self.cells.get(&(i, j))
    }

    pub fn dim(&self, i: usize, j: usize) -> usize {
        self.cell(i, j).map_or(0, Cell::dim)
    }

    pub fn aut(&self, k: &GraphKey) -> Option<u64> {
        let c = self.cells.get(&k.bidegree())?;
        c.index.get(k).map(|&i| c.aut[i])
    }

    pub fn keys(&self) -> impl Iterator<Item = &GraphKey> {
        self.cells.values().flat_map(|c| c.keys.iter())
    }

    /// Matrix of the boundary from cell `(i, j)` into `(i - 1, j - 1)`.
    pub fn boundary_matrix(&self, i: usize, j: usize) -> Result<SparseMatrix, ComplexError> {
        let src = self.cell(i, j).ok_or(ComplexError::OutOfRange(i, j, self.max_edges))?;
        let empty = Cell::default();
        let dst = if i >= 1 && j >= 1 { self.cell(i - 1, j - 1).unwrap_or(&empty) } else { &empty };
        let cols: Vec<SparseVec> = src
            .keys
            .par_iter()
            .map(|k| {
                let b = boundary_graph(&k.to_graph());
                b.terms.into_iter().map(|(key, v)| (dst.index[&key], v)).collect()
            })
            .collect();
        Ok(SparseMatrix { nrows: dst.dim(), ncols: src.dim(), cols })
    }

    /// Matrix of the coboundary from cell `(i, j)` into `(i + 1, j + 1)`.
    pub fn coboundary_matrix(&self, i: usize, j: usize) -> Result<SparseMatrix, ComplexError> {
        let src = self.cell(i, j).ok_or(ComplexError::OutOfRange(i, j, self.max_edges))?;
        let dst = self.cell(i + 1, j + 1).ok_or(ComplexError::OutOfRange(i + 1, j + 1, self.max_edges))?;
        let cols: Vec<SparseVec> = src
            .keys
            .par_iter()
            .map(|k| {
                let b = coboundary_graph(&k.to_graph());
                b.terms.into_iter().map(|(key, v)| (dst.index[&key], v)).collect()
            })
            .collect();
        Ok(SparseMatrix { nrows: dst.dim(), ncols: src.dim(), cols })
    }

    /// Coordinates of a chain supported in one cell.
    pub fn coordinates(&self, c: &GraphChain, i: usize, j: usize) -> Result<SparseVec, ComplexError> {
        let cell = self.cell(i, j).ok_or(ComplexError::OutOfRange(i, j, self.max_edges))?;
        let mut v = SparseVec::new();
        for (k, x) in &c.terms {
            if k.bidegree() != (i, j) {
                continue;
            }
            let idx = *cell.index.get(k).ok_or_else(|| ComplexError::NotInBasis(key_literal(k)))?;
            v.insert(idx, x.clone());
        }
        Ok(v)
    }

    /// Homology table for Euler characteristics `chi_min..=0`, limited to enumerated cells.
    pub fn homology(&self, chi_min: i64) -> Vec<HomologyRow> {
        let mut ranks: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(i, j) in self.cells.keys() {
            let m = self.boundary_matrix(i, j).expect("cell");
            ranks.insert((i, j), linalg::rank(&m));
        }
        let mut rows = Vec::new();
        for (&(i, j), cell) in &self.cells {
            let chi = i as i64 - j as i64;
            if chi < chi_min || chi > 0 {
                continue;
            }
            let rank_d = ranks[&(i, j)];
            let dim_ker = cell.dim() - rank_d;
            let feasible = 3 * (i + 1) <= 2 * (j + 1);
            let incoming = (j < self.max_edges || !feasible).then(|| ranks.get(&(i + 1, j + 1)).copied().unwrap_or(0));
            let dim_h = incoming.map(|r| dim_ker as i64 - r as i64);
            rows.push(HomologyRow { chi, i, j, dim: cell.dim(), dim_ker, rank_d, dim_h });
        }
        rows.sort_by_key(|r| (-r.chi, r.i));
        rows
    }
}

/// One row of the homology table. `dim_h` is `None` when the incoming cell can be
/// nonempty but was not enumerated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyRow {
    pub chi: i64,
    pub i: usize,
    pub j: usize,
    pub dim: usize,
    pub dim_ker: usize,
    pub rank_d: usize,
    pub dim_h: Option<i64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_squares_to_zero_small() {
        let b = GraphBasis::enumerate(4);
        for k in b.keys() {
            assert!(boundary(&boundary(&GraphChain::basis(k.clone()))).is_zero());
            assert!(coboundary(&coboundary(&GraphChain::basis(k.clone()))).is_zero());
        }
    }

    #[test]
    fn small_cells() {
        let b = GraphBasis::enumerate(3);
        assert_eq!(b.dim(1, 2), 1);
        assert_eq!(b.dim(0, 0), 1);
    }
}
