//! Oriented ribbon graphs, their canonical forms, contraction and expansion.
//!
//! A [`RibbonGraph`] is a fully ordered representative: an ordered list of
//! vertices, each a linear order of half-edges read cyclically, and a list of
//! oriented edges. Reordering vertices by `sigma` and flipping edges changes the
//! orientation by `sgn(sigma)` times `-1` per flip. Rotating a vertex does not.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::super_core::perm_sign;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RibbonError {
    #[error("half-edge {0} is used {1} times")]
    HalfEdgeCount(usize, usize),
    #[error("edge {0} is a loop and cannot be contracted")]
    LoopContraction(usize),
    #[error("edge index {0} out of range")]
    EdgeIndex(usize),
    #[error("vertex index {0} out of range")]
    VertexIndex(usize),
    #[error("vertex {vertex} has valence {valence}, below {min}")]
    LowValence { vertex: usize, valence: usize, min: usize },
    #[error("malformed graph literal: {0}")]
    Literal(String),
    #[error("ideal edge does not split vertex {0} into two intervals of size at least two")]
    BadIdealEdge(usize),
}

/// Fully ordered ribbon graph with half-edges labelled `0..2k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RibbonGraph {
    pub vertices: Vec<Vec<usize>>,
    pub edges: Vec<(usize, usize)>,
}

/// Canonical key: `[vertex count, valences.., partner position of each half-edge..]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphKey(pub Vec<u8>);

/// Outcome of canonicalization: `graph = sign * key`, or zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub key: GraphKey,
    pub sign: i32,
    pub aut: u64,
    pub zero: bool,
}

impl GraphKey {
    pub fn vertices(&self) -> usize {
        self.0[0] as usize
    }

    pub fn valences(&self) -> &[u8] {
        &self.0[1..1 + self.vertices()]
    }

    pub fn partners(&self) -> &[u8] {
        &self.0[1 + self.vertices()..]
    }

    pub fn edges(&self) -> usize {
        self.partners().len() / 2
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.vertices(), self.edges())
    }

    /// Canonical representative: half-edges are positions, edges run from lower to higher position.
    pub fn to_graph(&self) -> RibbonGraph {
        let mut vertices = Vec::new();
        let mut pos = 0;
        for &k in self.valences() {
            vertices.push((pos..pos + k as usize).collect());
            pos += k as usize;
        }
        let edges = self
            .partners()
            .iter()
            .enumerate()
            .filter(|(i, &p)| *i < p as usize)
            .map(|(i, &p)| (i, p as usize))
            .collect();
        RibbonGraph { vertices, edges }
    }

    pub fn empty() -> Self {
        GraphKey(vec![0])
    }
}

impl fmt::Display for GraphKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_graph())
    }
}

impl fmt::Display for RibbonGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (valences, chords) = self.chords();
        let v: Vec<String> = valences.iter().map(|k| k.to_string()).collect();
        let c: Vec<String> = chords.iter().map(|(a, b)| format!("({},{})", a + 1, b + 1)).collect();
        write!(f, "valences=[{}]; chords=[{}]", v.join(","), c.join(","))
    }
}

/// Splits `key=value; key=value` literals.
pub(crate) fn literal_fields(s: &str) -> Result<HashMap<String, String>, RibbonError> {
    let mut out = HashMap::new();
    for part in s.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part.split_once('=').ok_or_else(|| RibbonError::Literal(format!("missing '=' in {part:?}")))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<usize>, RibbonError> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| RibbonError::Literal(format!("expected [..], got {s:?}")))?;
    inner
        .split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| RibbonError::Literal(format!("bad integer {x:?}"))))
        .collect()
}

pub(crate) fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, RibbonError> {
    let inner = s
        .trim()
        .strip_prefix('[')
        .and_then(|x| x.strip_suffix(']'))
        .ok_or_else(|| RibbonError::Literal(format!("expected [..], got {s:?}")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let rest2 = rest.strip_prefix('(').ok_or_else(|| RibbonError::Literal(format!("expected '(' in {rest:?}")))?;
        let close = rest2.find(')').ok_or_else(|| RibbonError::Literal("unclosed '('".into()))?;
        let (a, b) = rest2[..close].split_once(',').ok_or_else(|| RibbonError::Literal("pair needs ','".into()))?;
        let a: usize = a.trim().parse().map_err(|_| RibbonError::Literal(format!("bad integer {a:?}")))?;
        let b: usize = b.trim().parse().map_err(|_| RibbonError::Literal(format!("bad integer {b:?}")))?;
        out.push((a, b));
        rest = rest2[close + 1..].trim_start().trim_start_matches(',').trim_start();
    }
    Ok(out)
}

impl RibbonGraph {
    /// Graph of type `valences` from an oriented chord diagram on positions `0..sum`.
    pub fn from_chords(valences: &[usize], chords: &[(usize, usize)]) -> Result<Self, RibbonError> {
        let total: usize = valences.iter().sum();
        let mut count = vec![0usize; total];
        for &(a, b) in chords {
            for h in [a, b] {
                if h >= total {
                    return Err(RibbonError::HalfEdgeCount(h, 0));
                }
                count[h] += 1;
            }
        }
        if let Some((h, &c)) = count.iter().enumerate().find(|(_, &c)| c != 1) {
            return Err(RibbonError::HalfEdgeCount(h, c));
        }
        let mut vertices = Vec::new();
        let mut pos = 0;
        for &k in valences {
            vertices.push((pos..pos + k).collect());
            pos += k;
        }
        Ok(RibbonGraph { vertices, edges: chords.to_vec() })
    }

    /// Parses `valences=[3,3]; chords=[(1,4),(2,5),(3,6)]` with 1-based positions.
    pub fn parse(s: &str) -> Result<Self, RibbonError> {
        let f = literal_fields(s)?;
        let valences = parse_list(f.get("valences").ok_or_else(|| RibbonError::Literal("missing valences".into()))?)?;
        let chords = parse_pairs(f.get("chords").ok_or_else(|| RibbonError::Literal("missing chords".into()))?)?;
        if chords.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(RibbonError::Literal("positions are 1-based".into()));
        }
        let chords: Vec<_> = chords.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        Self::from_chords(&valences, &chords)
    }

    pub fn half_edge_count(&self) -> usize {
        self.vertices.iter().map(Vec::len).sum()
    }

    pub fn bidegree(&self) -> (usize, usize) {
        (self.vertices.len(), self.edges.len())
    }

    pub fn valences(&self) -> Vec<usize> {
        self.vertices.iter().map(Vec::len).collect()
    }

    /// Checks that the edges form a perfect matching of the half-edges.
    pub fn validate(&self, min_valence: usize) -> Result<(), RibbonError> {
        let h = self.half_edge_count();
        let mut count = vec![0usize; h];
        for v in &self.vertices {
            for &x in v {
                if x >= h {
                    return Err(RibbonError::HalfEdgeCount(x, 0));
                }
                count[x] += 1;
            }
        }
        if let Some((x, &c)) = count.iter().enumerate().find(|(_, &c)| c != 1) {
            return Err(RibbonError::HalfEdgeCount(x, c));
        }
        let mut count = vec![0usize; h];
        for &(a, b) in &self.edges {
            if a >= h || b >= h {
                return Err(RibbonError::HalfEdgeCount(a.max(b), 0));
            }
            count[a] += 1;
            count[b] += 1;
        }
        if let Some((x, &c)) = count.iter().enumerate().find(|(_, &c)| c != 1) {
            return Err(RibbonError::HalfEdgeCount(x, c));
        }
        for (i, v) in self.vertices.iter().enumerate() {
            if v.len() < min_valence {
                return Err(RibbonError::LowValence { vertex: i, valence: v.len(), min: min_valence });
            }
        }
        Ok(())
    }

    /// Relabels half-edges by block position; returns valences and the oriented chords.
    pub fn chords(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        let size = self.vertices.iter().flatten().max().map_or(0, |m| m + 1);
        let mut pos = vec![0usize; size];
        let mut t = 0;
        for v in &self.vertices {
            for &h in v {
                pos[h] = t;
                t += 1;
            }
        }
        (self.valences(), self.edges.iter().map(|&(a, b)| (pos[a], pos[b])).collect())
    }

    /// Same graph with half-edges renumbered by block position.
    pub fn normalized(&self) -> RibbonGraph {
        let (v, c) = self.chords();
        RibbonGraph::from_chords(&v, &c).expect("valid graph")
    }

    fn incidence(&self) -> Incidence {
        let h = self.half_edge_count();
        let mut vertex_of = vec![0usize; h];
        let mut slot = vec![0usize; h];
        for (i, v) in self.vertices.iter().enumerate() {
            for (s, &x) in v.iter().enumerate() {
                vertex_of[x] = i;
                slot[x] = s;
            }
        }
        let mut partner = vec![0usize; h];
        let mut edge_of = vec![0usize; h];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            partner[a] = b;
            partner[b] = a;
            edge_of[a] = e;
            edge_of[b] = e;
        }
        Incidence { vertex_of, slot, partner, edge_of }
    }

    pub fn is_loop(&self, e: usize) -> bool {
        let inc = self.incidence();
        let (a, b) = self.edges[e];
        inc.vertex_of[a] == inc.vertex_of[b]
    }

    /// Connected components as sorted vertex lists, ordered by first vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let inc = self.incidence();
        let n = self.vertices.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut stack = vec![s];
            comp[s] = id;
            let mut members = vec![];
            while let Some(v) = stack.pop() {
                members.push(v);
                for &h in &self.vertices[v] {
                    let w = inc.vertex_of[inc.partner[h]];
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// Contraction of a non-loop edge. Returns the new graph and the orientation sign.
    pub fn contract(&self, e: usize) -> Result<(RibbonGraph, i32), RibbonError> {
        let &(s, t) = self.edges.get(e).ok_or(RibbonError::EdgeIndex(e))?;
        let inc = self.incidence();
        let (v, w) = (inc.vertex_of[s], inc.vertex_of[t]);
        if v == w {
            return Err(RibbonError::LoopContraction(e));
        }
        let mut order = vec![v, w];
        order.extend((0..self.vertices.len()).filter(|&x| x != v && x != w));
        let sign = perm_sign(&crate::super_core::perm_inverse(&order));
        let after = |vert: usize, h: usize| -> Vec<usize> {
            let list = &self.vertices[vert];
            let k = list.len();
            let i = inc.slot[h];
            (1..k).map(|r| list[(i + r) % k]).collect()
        };
        let mut merged = after(v, s);
        merged.extend(after(w, t));
        let mut vertices = vec![merged];
        vertices.extend(order[2..].iter().map(|&x| self.vertices[x].clone()));
        let edges = self.edges.iter().enumerate().filter(|(i, _)| *i != e).map(|(_, &x)| x).collect();
        Ok((RibbonGraph { vertices, edges }.normalized(), sign))
    }

    /// Ideal edges at vertex `v` as `(a, b)` slot intervals, one per unordered split.
    pub fn ideal_edges(&self, v: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let list = &self.vertices[v];
        let n = list.len();
        let mut out = Vec::new();
        for len in 2..=n.saturating_sub(2) {
            for s in 1..=n - len {
                let a: Vec<usize> = list[s..s + len].to_vec();
                let mut b: Vec<usize> = list[s + len..].to_vec();
                b.extend_from_slice(&list[..s]);
                out.push((a, b));
            }
        }
        out
    }

    /// Expansion of vertex `v` along the ideal edge `(a, b)`.
    ///
    /// Vertex `v` is moved to the front, split into `(a.., h)` and `(b.., h')`,
    /// and the new edge `(h, h')` is added.
    pub fn expand(&self, v: usize, a: &[usize], b: &[usize]) -> Result<(RibbonGraph, i32), RibbonError> {
        if v >= self.vertices.len() {
            return Err(RibbonError::VertexIndex(v));
        }
        let list = &self.vertices[v];
        let n = list.len();
        if a.len() < 2 || b.len() < 2 || a.len() + b.len() != n {
            return Err(RibbonError::BadIdealEdge(v));
        }
        let mut joined = a.to_vec();
        joined.extend_from_slice(b);
        let start = list.iter().position(|&x| x == joined[0]).ok_or(RibbonError::BadIdealEdge(v))?;
        if (0..n).any(|r| list[(start + r) % n] != joined[r]) {
            return Err(RibbonError::BadIdealEdge(v));
        }
        let sign = if v % 2 == 0 { 1 } else { -1 };
        let h = self.half_edge_count();
        let mut first = a.to_vec();
        first.push(h);
        let mut second = b.to_vec();
        second.push(h + 1);
        let mut vertices = vec![first, second];
        vertices.extend(self.vertices.iter().enumerate().filter(|(i, _)| *i != v).map(|(_, x)| x.clone()));
        let mut edges = self.edges.clone();
        edges.push((h, h + 1));
        Ok((RibbonGraph { vertices, edges }.normalized(), sign))
    }

    /// Disjoint union with vertex order `self` then `other`.
    pub fn disjoint_union(&self, other: &RibbonGraph) -> RibbonGraph {
        let off = self.half_edge_count();
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().map(|v| v.iter().map(|h| h + off).collect()));
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|&(a, b)| (a + off, b + off)));
        RibbonGraph { vertices, edges }
    }

    /// Reorders vertices; returns the sign picked up.
    pub fn reorder_vertices(&self, order: &[usize]) -> (RibbonGraph, i32) {
        let vertices = order.iter().map(|&i| self.vertices[i].clone()).collect();
        let sign = perm_sign(order);
        (RibbonGraph { vertices, edges: self.edges.clone() }, sign)
    }

    pub fn canonical(&self) -> Canonical {
        canonicalize(self)
    }
}

struct Incidence {
    vertex_of: Vec<usize>,
    slot: Vec<usize>,
    partner: Vec<usize>,
    edge_of: Vec<usize>,
}

/// Reusable buffers for component traversals.
struct Scratch {
    placed: Vec<usize>,
    pos: Vec<usize>,
    seq: Vec<usize>,
    order: Vec<usize>,
    stream: Vec<u8>,
}

impl Scratch {
    fn new(nv: usize, nh: usize) -> Self {
        Self { placed: vec![usize::MAX; nv], pos: vec![usize::MAX; nh], seq: Vec::new(), order: Vec::new(), stream: Vec::new() }
    }

    fn place(&mut self, g: &RibbonGraph, inc: &Incidence, v: usize, entry: usize) {
        self.placed[v] = self.order.len();
        self.order.push(v);
        let list = &g.vertices[v];
        let k = list.len();
        let e = inc.slot[entry];
        for r in 0..k {
            let h = list[(e + r) % k];
            self.pos[h] = self.seq.len();
            self.seq.push(h);
        }
    }
}

/// Breadth-first relabelling of the component of `start`, entering every
/// vertex at the half-edge through which it is reached. The emitted stream is
/// the start valence followed, for each position, by the partner position and,
/// when that reaches a new vertex, its valence. With `best` given the
/// traversal stops as soon as the stream exceeds it.
fn traverse(g: &RibbonGraph, inc: &Incidence, start: usize, sc: &mut Scratch, best: Option<&[u8]>) -> Ordering {
    for &v in &sc.order {
        sc.placed[v] = usize::MAX;
    }
    for &h in &sc.seq {
        sc.pos[h] = usize::MAX;
    }
    sc.order.clear();
    sc.seq.clear();
    sc.stream.clear();
    let mut state = if best.is_some() { Ordering::Equal } else { Ordering::Less };
    macro_rules! emit {
        ($b:expr) => {{
            let b: u8 = $b;
            if state == Ordering::Equal {
                match b.cmp(&best.unwrap()[sc.stream.len()]) {
                    Ordering::Less => state = Ordering::Less,
                    Ordering::Greater => return Ordering::Greater,
                    Ordering::Equal => {}
                }
            }
            sc.stream.push(b);
        }};
    }
    let v0 = inc.vertex_of[start];
    sc.place(g, inc, v0, start);
    emit!(g.vertices[v0].len() as u8);
    let mut t = 0;
    while t < sc.seq.len() {
        let p = inc.partner[sc.seq[t]];
        let w = inc.vertex_of[p];
        let fresh = sc.placed[w] == usize::MAX;
        if fresh {
            sc.place(g, inc, w, p);
        }
        emit!(sc.pos[p] as u8);
        if fresh {
            emit!(g.vertices[w].len() as u8);
        }
        t += 1;
    }
    state
}

/// Orientation sign of the current traversal of a component: local vertex
/// permutation times one `-1` per edge running from a higher to a lower position.
fn local_sign(g: &RibbonGraph, sc: &Scratch, rank: &[usize], inc: &Incidence) -> i32 {
    let perm: Vec<usize> = sc.order.iter().map(|&v| rank[v]).collect();
    let mut sign = perm_sign(&perm);
    for &h in &sc.seq {
        let (a, b) = g.edges[inc.edge_of[h]];
        if a == h && sc.pos[a] > sc.pos[b] {
            sign = -sign;
        }
    }
    sign
}

fn canonicalize(g: &RibbonGraph) -> Canonical {
    let inc = g.incidence();
    let comps = g.components();
    let mut rank = vec![0usize; g.vertices.len()];
    for c in &comps {
        for (i, &v) in c.iter().enumerate() {
            rank[v] = i;
        }
    }
    struct Comp {
        stream: Vec<u8>,
        order: Vec<usize>,
        seq: Vec<usize>,
        aut: u64,
        zero: bool,
    }
    let mut sc = Scratch::new(g.vertices.len(), g.half_edge_count());
    let mut done: Vec<Comp> = Vec::with_capacity(comps.len());
    for comp in &comps {
        let mut best: Option<Comp> = None;
        let mut best_sign = 0;
        for &v in comp {
            for &h in &g.vertices[v] {
                let ord = traverse(g, &inc, h, &mut sc, best.as_ref().map(|b| b.stream.as_slice()));
                match ord {
                    Ordering::Less => {
                        best_sign = local_sign(g, &sc, &rank, &inc);
                        best = Some(Comp { stream: sc.stream.clone(), order: sc.order.clone(), seq: sc.seq.clone(), aut: 1, zero: false });
                    }
                    Ordering::Equal => {
                        let b = best.as_mut().expect("best exists");
                        b.aut += 1;
                        if local_sign(g, &sc, &rank, &inc) != best_sign {
                            b.zero = true;
                        }
                    }
                    Ordering::Greater => {}
                }
            }
        }
        done.push(best.expect("nonempty component"));
    }
    done.sort_by(|a, b| a.stream.cmp(&b.stream));
    let mut aut = 1u64;
    let mut zero = false;
    let mut i = 0;
    while i < done.len() {
        let mut j = i;
        while j < done.len() && done[j].stream == done[i].stream {
            j += 1;
        }
        let mult = (j - i) as u64;
        aut *= done[i].aut.pow(mult as u32) * (1..=mult).product::<u64>();
        if done[i].zero || (mult >= 2 && done[i].order.len() % 2 == 1) {
            zero = true;
        }
        i = j;
    }
    let nv = g.vertices.len();
    let nh = g.half_edge_count();
    let mut new_index = vec![0usize; nv];
    let mut pos = vec![0usize; nh];
    let mut valences = Vec::with_capacity(nv);
    let mut partners = vec![0u8; nh];
    let (mut voff, mut hoff) = (0, 0);
    for c in &done {
        for (i, &v) in c.order.iter().enumerate() {
            new_index[v] = voff + i;
            valences.push(g.vertices[v].len() as u8);
        }
        for (i, &h) in c.seq.iter().enumerate() {
            pos[h] = hoff + i;
        }
        voff += c.order.len();
        hoff += c.seq.len();
    }
    let mut sign = perm_sign(&new_index);
    for &(a, b) in &g.edges {
        partners[pos[a]] = pos[b] as u8;
        partners[pos[b]] = pos[a] as u8;
        if pos[a] > pos[b] {
            sign = -sign;
        }
    }
    let mut key = Vec::with_capacity(1 + nv + nh);
    key.push(nv as u8);
    key.extend(valences);
    key.extend(partners);
    Canonical { key: GraphKey(key), sign, aut, zero }
}

/// All perfect matchings of `0..n` as chord lists `(i, j)` with `i < j`.
pub fn perfect_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(free: &mut Vec<usize>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if free.is_empty() {
            out.push(cur.clone());
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            cur.push((a, b));
            rec(free, cur, out);
            cur.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    let mut out = Vec::new();
    if n % 2 == 1 {
        return out;
    }
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

/// Non-increasing sequences of `parts` integers `>= min` summing to `total`.
pub fn valence_profiles(total: usize, parts: usize, min: usize) -> Vec<Vec<usize>> {
    fn rec(rem: usize, parts: usize, max: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for k in (min..=max.min(rem)).rev() {
            if rem - k < min * (parts - 1) {
                continue;
            }
            cur.push(k);
            rec(rem - k, parts - 1, k, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, total, min, &mut Vec::new(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn theta() -> RibbonGraph {
        RibbonGraph::parse("valences=[3,3]; chords=[(1,4),(2,5),(3,6)]").unwrap()
    }

    #[test]
    fn literal_roundtrip() {
        let g = theta();
        assert_eq!(RibbonGraph::parse(&g.to_string()).unwrap(), g);
    }

    #[test]
    fn rotation_does_not_change_class() {
        let g = theta();
        let mut h = g.clone();
        h.vertices[0].rotate_left(1);
        let (a, b) = (g.canonical(), h.canonical());
        assert_eq!(a.key, b.key);
        assert_eq!(a.sign, b.sign);
    }

    #[test]
    fn flip_negates() {
        let g = theta();
        let mut h = g.clone();
        h.edges[1] = (h.edges[1].1, h.edges[1].0);
        assert_eq!(g.canonical().sign, -h.canonical().sign);
    }

    #[test]
    fn ideal_edge_counts() {
        for (n, expected) in [(3, 0), (4, 2), (5, 5), (6, 9)] {
            let chords: Vec<(usize, usize)> = if n % 2 == 0 {
                (0..n / 2).map(|i| (2 * i, 2 * i + 1)).collect()
            } else {
                continue;
            };
            let g = RibbonGraph::from_chords(&[n], &chords).unwrap();
            assert_eq!(g.ideal_edges(0).len(), expected);
        }
        let g = RibbonGraph::from_chords(&[5, 3], &[(0, 5), (1, 6), (2, 7), (3, 4)]).unwrap();
        assert_eq!(g.ideal_edges(0).len(), 5);
    }

    #[test]
    fn profiles() {
        assert_eq!(valence_profiles(6, 2, 3), vec![vec![3, 3]]);
        assert_eq!(valence_profiles(8, 2, 3).len(), 2);
        assert_eq!(perfect_matchings(6).len(), 15);
    }
}
