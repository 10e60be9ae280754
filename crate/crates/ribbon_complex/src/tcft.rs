//! Ribbon graphs with labelled incoming and outgoing legs, gluing, the legged
//! coboundary and correlation tensors of cyclic A-infinity algebras.
//!
//! A legged graph is oriented by an ordering of its internal edges together
//! with an ordering of the two ends of each internal edge. Legs are rigid.
//! Correlations are state sums over a representative; a representative `R`
//! and its canonical form differ by the sign `tau(R)`, the product of the
//! signs of the vertex and internal edge permutations, and
//! `state_sum(R) = tau(R) * correlation([R])`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::ainfinity::{AlgebraError, CyclicAInfinity};
use crate::cyclic_lie::Word;
use crate::ribbon_graph::{literal_fields, parse_list, parse_pairs, perfect_matchings, valence_profiles, RibbonError};
use crate::super_core::{inverse_pairing, koszul_unchecked, perm_sign, qi, qr, GradedTensor, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TcftError {
    #[error(transparent)]
    Ribbon(#[from] RibbonError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("malformed legged graph: {0}")]
    Invalid(String),
    #[error("cannot glue {0} outgoing legs to {1} incoming legs")]
    Mismatch(usize, usize),
}

/// Where a leg ends: on an internal half-edge, or directly on a leg of the
/// opposite kind (a through edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attach {
    Half(usize),
    Leg(usize),
}

/// A fully ordered legged ribbon graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeggedGraph {
    /// Internal vertices as cyclic orders of half-edge ids.
    pub vertices: Vec<Vec<usize>>,
    /// Internal edges, ordered, each with an ordered pair of ends.
    pub edges: Vec<(usize, usize)>,
    /// `ins[i]` is where incoming leg `i` ends; `Leg(j)` is outgoing leg `j`.
    pub ins: Vec<Attach>,
    /// `outs[j]` is where outgoing leg `j` ends; `Leg(i)` is incoming leg `i`.
    pub outs: Vec<Attach>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Partner {
    Half(usize),
    In(usize),
    Out(usize),
}

fn leg_code(p: Partner, pos: &HashMap<usize, usize>) -> i64 {
    match p {
        Partner::Half(h) => pos[&h] as i64,
        Partner::In(i) => -1 - 2 * i as i64,
        Partner::Out(j) => -2 - 2 * j as i64,
    }
}

/// Canonical form of a legged graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LeggedKey {
    pub n_in: usize,
    pub n_out: usize,
    pub valences: Vec<usize>,
    /// Per half-edge position: the partner position, or `-1 - 2i` for
    /// incoming leg `i`, or `-2 - 2j` for outgoing leg `j`.
    pub partners: Vec<i64>,
    /// Through edges `(in, out)`, sorted.
    pub through: Vec<(usize, usize)>,
}

impl LeggedKey {
    pub fn vertices(&self) -> usize {
        self.valences.len()
    }

    pub fn internal_edges(&self) -> usize {
        self.partners.iter().filter(|&&p| p >= 0).count() / 2
    }

    /// The canonical representative: consecutive half-edges, edges oriented
    /// from the lower position and ordered by it.
    pub fn to_graph(&self) -> LeggedGraph {
        let mut vertices = Vec::new();
        let mut h = 0;
        for &v in &self.valences {
            vertices.push((h..h + v).collect());
            h += v;
        }
        let mut edges = Vec::new();
        let mut ins = vec![Attach::Leg(usize::MAX); self.n_in];
        let mut outs = vec![Attach::Leg(usize::MAX); self.n_out];
        for (p, &c) in self.partners.iter().enumerate() {
            if c >= 0 {
                if (p as i64) < c {
                    edges.push((p, c as usize));
                }
            } else if c % 2 != 0 {
                ins[((-c - 1) / 2) as usize] = Attach::Half(p);
            } else {
                outs[((-c - 2) / 2) as usize] = Attach::Half(p);
            }
        }
        for &(i, j) in &self.through {
            ins[i] = Attach::Leg(j);
            outs[j] = Attach::Leg(i);
        }
        LeggedGraph { vertices, edges, ins, outs }
    }
}

impl fmt::Display for LeggedKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_graph())
    }
}

/// Result of canonicalizing a legged representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeggedCanonical {
    pub key: LeggedKey,
    /// `R = sign * key` in the legged orientation convention.
    pub sign: i32,
    /// Sign of the vertex permutation taking `R` to the key.
    pub vertex_sign: i32,
    /// Sign of the internal edge permutation taking `R` to the key.
    pub edge_sign: i32,
    pub aut: u64,
    /// Whether the class admits an orientation-reversing automorphism.
    pub zero: bool,
}

impl LeggedCanonical {
    /// `state_sum(R) = tau * correlation([R])`.
    pub fn tau(&self) -> i32 {
        self.vertex_sign * self.edge_sign
    }

    /// `state_sum(R) = state_sign * state_sum(key)`.
    pub fn state_sign(&self) -> i32 {
        self.vertex_sign * self.edge_sign * self.sign
    }
}

struct Info {
    vertex_of: HashMap<usize, usize>,
    index_in: HashMap<usize, usize>,
    partner: HashMap<usize, Partner>,
}

struct Layout {
    order: Vec<(usize, usize)>,
    stream: Vec<i64>,
}

impl LeggedGraph {
    pub fn n_in(&self) -> usize {
        self.ins.len()
    }

    pub fn n_out(&self) -> usize {
        self.outs.len()
    }

    pub fn validate(&self) -> Result<(), TcftError> {
        let bad = |s: String| Err(TcftError::Invalid(s));
        let mut seen = HashSet::new();
        for (v, list) in self.vertices.iter().enumerate() {
            if list.len() < 3 {
                return bad(format!("internal vertex {v} has valence {}", list.len()));
            }
            for &h in list {
                if !seen.insert(h) {
                    return bad(format!("half-edge {h} appears twice"));
                }
            }
        }
        let mut used = HashSet::new();
        let mut use_half = |h: usize| -> Result<(), TcftError> {
            if !seen.contains(&h) {
                return Err(TcftError::Invalid(format!("half-edge {h} is not at a vertex")));
            }
            if !used.insert(h) {
                return Err(TcftError::Invalid(format!("half-edge {h} is attached twice")));
            }
            Ok(())
        };
        for &(a, b) in &self.edges {
            use_half(a)?;
            use_half(b)?;
        }
        for (i, a) in self.ins.iter().enumerate() {
            match *a {
                Attach::Half(h) => use_half(h)?,
                Attach::Leg(j) => {
                    if self.outs.get(j) != Some(&Attach::Leg(i)) {
                        return bad(format!("through edge from incoming leg {} is not matched", i + 1));
                    }
                }
            }
        }
        for (j, a) in self.outs.iter().enumerate() {
            match *a {
                Attach::Half(h) => use_half(h)?,
                Attach::Leg(i) => {
                    if self.ins.get(i) != Some(&Attach::Leg(j)) {
                        return bad(format!("through edge from outgoing leg {} is not matched", j + 1));
                    }
                }
            }
        }
        if used.len() != seen.len() {
            return bad("some half-edge is neither on an edge nor on a leg".into());
        }
        Ok(())
    }

    /// Parses `valences=[..]; chords=[..]; in=[..]; out=[..]` with 1-based
    /// half-edge positions. A through edge is written `oJ` in `in` and `iI` in `out`.
    pub fn parse(s: &str) -> Result<Self, TcftError> {
        let f = literal_fields(s)?;
        let valences = match f.get("valences") {
            Some(v) => parse_list(v)?,
            None => Vec::new(),
        };
        let chords = match f.get("chords") {
            Some(c) => parse_pairs(c)?,
            None => Vec::new(),
        };
        let legs = |name: &str, through: char| -> Result<Vec<Attach>, TcftError> {
            let Some(v) = f.get(name) else { return Ok(Vec::new()) };
            let inner = v
                .trim()
                .strip_prefix('[')
                .and_then(|x| x.strip_suffix(']'))
                .ok_or_else(|| TcftError::Invalid(format!("expected [..] for {name}")))?;
            inner
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(|t| {
                    let (leg, num) = match t.strip_prefix(through) {
                        Some(r) => (true, r),
                        None => (false, t),
                    };
                    let n: usize = num.parse().map_err(|_| TcftError::Invalid(format!("bad leg entry {t:?}")))?;
                    if n == 0 {
                        return Err(TcftError::Invalid("positions are 1-based".into()));
                    }
                    Ok(if leg { Attach::Leg(n - 1) } else { Attach::Half(n - 1) })
                })
                .collect()
        };
        let ins = legs("in", 'o')?;
        let outs = legs("out", 'i')?;
        let mut vertices = Vec::new();
        let mut h = 0;
        for &v in &valences {
            vertices.push((h..h + v).collect());
            h += v;
        }
        if chords.iter().any(|&(a, b)| a == 0 || b == 0) {
            return Err(TcftError::Invalid("positions are 1-based".into()));
        }
        let edges = chords.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        let g = LeggedGraph { vertices, edges, ins, outs };
        g.validate()?;
        Ok(g)
    }

    /// Relabels half-edges consecutively in vertex order.
    pub fn normalized(&self) -> LeggedGraph {
        let mut map = HashMap::new();
        for h in self.vertices.iter().flatten() {
            let n = map.len();
            map.insert(*h, n);
        }
        let att = |a: &Attach| match *a {
            Attach::Half(h) => Attach::Half(map[&h]),
            l => l,
        };
        LeggedGraph {
            vertices: self.vertices.iter().map(|v| v.iter().map(|h| map[h]).collect()).collect(),
            edges: self.edges.iter().map(|&(a, b)| (map[&a], map[&b])).collect(),
            ins: self.ins.iter().map(att).collect(),
            outs: self.outs.iter().map(att).collect(),
        }
    }

    fn info(&self) -> Info {
        let mut vertex_of = HashMap::new();
        let mut index_in = HashMap::new();
        for (v, list) in self.vertices.iter().enumerate() {
            for (i, &h) in list.iter().enumerate() {
                vertex_of.insert(h, v);
                index_in.insert(h, i);
            }
        }
        let mut partner = HashMap::new();
        for &(a, b) in &self.edges {
            partner.insert(a, Partner::Half(b));
            partner.insert(b, Partner::Half(a));
        }
        for (i, a) in self.ins.iter().enumerate() {
            if let Attach::Half(h) = *a {
                partner.insert(h, Partner::In(i));
            }
        }
        for (j, a) in self.outs.iter().enumerate() {
            if let Attach::Half(h) = *a {
                partner.insert(h, Partner::Out(j));
            }
        }
        Info { vertex_of, index_in, partner }
    }

    fn traverse(&self, info: &Info, start: usize) -> Layout {
        let v0 = info.vertex_of[&start];
        let mut order = vec![(v0, start)];
        let mut offset: HashMap<usize, usize> = HashMap::from([(v0, 0)]);
        let mut total = self.vertices[v0].len();
        let mut stream = vec![total as i64];
        let mut k = 0;
        while k < order.len() {
            let (v, e) = order[k];
            let list = &self.vertices[v];
            let n = list.len();
            let r = info.index_in[&e];
            for t in 0..n {
                let h = list[(r + t) % n];
                match info.partner[&h] {
                    Partner::Half(p) => {
                        let w = info.vertex_of[&p];
                        if let Some(&off) = offset.get(&w) {
                            let rot = (info.index_in[&p] + self.vertices[w].len() - info.index_in[&order_entry(&order, w)]) % self.vertices[w].len();
                            stream.push((off + rot) as i64);
                        } else {
                            offset.insert(w, total);
                            order.push((w, p));
                            stream.push(total as i64);
                            stream.push(self.vertices[w].len() as i64);
                            total += self.vertices[w].len();
                        }
                    }
                    Partner::In(i) => stream.push(-1 - 2 * i as i64),
                    Partner::Out(j) => stream.push(-2 - 2 * j as i64),
                }
            }
            k += 1;
        }
        stream.shrink_to_fit();
        Layout { order, stream }
    }

    fn positions(&self, info: &Info, order: &[(usize, usize)]) -> HashMap<usize, usize> {
        let mut pos = HashMap::new();
        let mut p = 0;
        for &(v, e) in order {
            let list = &self.vertices[v];
            let r = info.index_in[&e];
            for t in 0..list.len() {
                pos.insert(list[(r + t) % list.len()], p);
                p += 1;
            }
        }
        pos
    }

    /// Edge permutation sign and flip sign of `edges` relative to `pos`.
    fn edge_signs(&self, edges: &[(usize, usize)], pos: &HashMap<usize, usize>) -> (i32, i32) {
        let mut keys: Vec<(usize, usize)> = edges.iter().map(|&(a, b)| (pos[&a].min(pos[&b]), pos[&a].max(pos[&b]))).collect();
        let flips = edges.iter().filter(|&&(a, b)| pos[&a] > pos[&b]).count();
        let mut sorted = keys.clone();
        sorted.sort_unstable();
        for k in keys.iter_mut() {
            k.0 = sorted.binary_search(k).expect("edge present");
        }
        let perm: Vec<usize> = keys.iter().map(|k| k.0).collect();
        (perm_sign(&perm), if flips % 2 == 0 { 1 } else { -1 })
    }

    /// Connected components of internal vertices.
    fn components(&self, info: &Info) -> Vec<Vec<usize>> {
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
            let mut members = Vec::new();
            while let Some(v) = stack.pop() {
                members.push(v);
                for h in &self.vertices[v] {
                    if let Partner::Half(p) = info.partner[h] {
                        let w = info.vertex_of[&p];
                        if comp[w] == usize::MAX {
                            comp[w] = id;
                            stack.push(w);
                        }
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn canonical(&self) -> LeggedCanonical {
        let info = self.info();
        let comps = self.components(&info);
        // (sort key, layout, aut, zero, internal edge count)
        let mut legged: Vec<((usize, usize), Layout)> = Vec::new();
        let mut free: Vec<(Layout, u64, bool, usize)> = Vec::new();
        for members in &comps {
            let halves: Vec<usize> = members.iter().flat_map(|&v| self.vertices[v].iter().copied()).collect();
            let mut best_leg: Option<((usize, usize), usize)> = None;
            for &h in &halves {
                let code = match info.partner[&h] {
                    Partner::In(i) => (0, i),
                    Partner::Out(j) => (1, j),
                    Partner::Half(_) => continue,
                };
                if best_leg.map_or(true, |(c, _)| code < c) {
                    best_leg = Some((code, h));
                }
            }
            if let Some((code, h)) = best_leg {
                legged.push((code, self.traverse(&info, h)));
                continue;
            }
            let comp_edges: Vec<(usize, usize)> =
                self.edges.iter().copied().filter(|(a, _)| members.contains(&info.vertex_of[a])).collect();
            let mut best: Option<Layout> = None;
            let mut starts: Vec<Layout> = Vec::new();
            for &h in &halves {
                let l = self.traverse(&info, h);
                match &best {
                    Some(b) if l.stream > b.stream => {}
                    Some(b) if l.stream == b.stream => starts.push(l),
                    _ => {
                        starts.clear();
                        best = Some(Layout { order: l.order.clone(), stream: l.stream.clone() });
                        starts.push(l);
                    }
                }
            }
            let signs: Vec<i32> = starts
                .iter()
                .map(|l| {
                    let pos = self.positions(&info, &l.order);
                    let (e, f) = self.edge_signs(&comp_edges, &pos);
                    e * f
                })
                .collect();
            let zero = signs.iter().any(|&s| s != signs[0]);
            free.push((best.expect("nonempty component"), starts.len() as u64, zero, comp_edges.len()));
        }
        legged.sort_by(|a, b| a.0.cmp(&b.0));
        free.sort_by(|a, b| a.0.stream.cmp(&b.0.stream));
        let mut aut = 1u64;
        let mut zero = false;
        let mut i = 0;
        while i < free.len() {
            let mut j = i;
            while j < free.len() && free[j].0.stream == free[i].0.stream {
                aut *= free[j].1;
                zero |= free[j].2;
                j += 1;
            }
            let mult = (j - i) as u64;
            aut *= (1..=mult).product::<u64>();
            if mult >= 2 && free[i].3 % 2 == 1 {
                zero = true;
            }
            i = j;
        }
        let order: Vec<(usize, usize)> =
            legged.iter().map(|(_, l)| l).chain(free.iter().map(|(l, ..)| l)).flat_map(|l| l.order.iter().copied()).collect();
        let pos = self.positions(&info, &order);
        let mut valences = Vec::new();
        let mut partners = Vec::new();
        for &(v, e) in &order {
            let list = &self.vertices[v];
            valences.push(list.len());
            let r = info.index_in[&e];
            for t in 0..list.len() {
                partners.push(leg_code(info.partner[&list[(r + t) % list.len()]], &pos));
            }
        }
        let mut through: Vec<(usize, usize)> =
            self.ins.iter().enumerate().filter_map(|(i, a)| if let Attach::Leg(j) = *a { Some((i, j)) } else { None }).collect();
        through.sort_unstable();
        let vperm: Vec<usize> = {
            let mut p = vec![0; self.vertices.len()];
            for (k, &(v, _)) in order.iter().enumerate() {
                p[v] = k;
            }
            p
        };
        let (edge_sign, flip_sign) = self.edge_signs(&self.edges, &pos);
        LeggedCanonical {
            key: LeggedKey { n_in: self.ins.len(), n_out: self.outs.len(), valences, partners, through },
            sign: edge_sign * flip_sign,
            vertex_sign: perm_sign(&vperm),
            edge_sign,
            aut,
            zero,
        }
    }

    fn max_half(&self) -> usize {
        self.vertices.iter().flatten().copied().max().map_or(0, |h| h + 1)
    }

    /// Expansions of internal vertex `v`: the vertex moves to the front and
    /// splits into `(a.., h)`, `(b.., h')`; the new edge `(h, h')` goes first.
    /// Each carries the sign `(-1)^v`.
    pub fn expansions(&self, v: usize) -> Vec<(LeggedGraph, i32)> {
        let list = &self.vertices[v];
        let n = list.len();
        let h = self.max_half();
        let sign = if v % 2 == 0 { 1 } else { -1 };
        let mut out = Vec::new();
        for len in 2..=n.saturating_sub(2) {
            for s in 1..=n - len {
                let mut a: Vec<usize> = list[s..s + len].to_vec();
                let mut b: Vec<usize> = list[s + len..].to_vec();
                b.extend_from_slice(&list[..s]);
                a.push(h);
                b.push(h + 1);
                let mut vertices = vec![a, b];
                vertices.extend(self.vertices.iter().enumerate().filter(|(i, _)| *i != v).map(|(_, x)| x.clone()));
                let mut edges = vec![(h, h + 1)];
                edges.extend_from_slice(&self.edges);
                out.push((LeggedGraph { vertices, edges, ins: self.ins.clone(), outs: self.outs.clone() }, sign));
            }
        }
        out
    }
}

fn order_entry(order: &[(usize, usize)], w: usize) -> usize {
    order.iter().find(|(v, _)| *v == w).expect("discovered vertex").1
}

impl fmt::Display for LeggedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.normalized();
        let vals: Vec<String> = g.vertices.iter().map(|v| v.len().to_string()).collect();
        let chords: Vec<String> = g.edges.iter().map(|(a, b)| format!("({},{})", a + 1, b + 1)).collect();
        let leg = |a: &Attach, c: char| match *a {
            Attach::Half(h) => (h + 1).to_string(),
            Attach::Leg(j) => format!("{c}{}", j + 1),
        };
        let ins: Vec<String> = g.ins.iter().map(|a| leg(a, 'o')).collect();
        let outs: Vec<String> = g.outs.iter().map(|a| leg(a, 'i')).collect();
        write!(f, "valences=[{}]; chords=[{}]; in=[{}]; out=[{}]", vals.join(","), chords.join(","), ins.join(","), outs.join(","))
    }
}

/// Glues the outgoing legs of `g1` to the incoming legs of `g2` by label.
/// Vertices of `g1` come first; new internal edges follow the old ones in leg
/// order, each oriented from the `g1` side.
pub fn glue(g1: &LeggedGraph, g2: &LeggedGraph) -> Result<LeggedGraph, TcftError> {
    if g1.outs.len() != g2.ins.len() {
        return Err(TcftError::Mismatch(g1.outs.len(), g2.ins.len()));
    }
    let off = g1.max_half();
    let sh = |h: usize| h + off;
    let mut vertices = g1.vertices.clone();
    vertices.extend(g2.vertices.iter().map(|v| v.iter().map(|&h| sh(h)).collect()));
    let mut edges = g1.edges.clone();
    edges.extend(g2.edges.iter().map(|&(a, b)| (sh(a), sh(b))));
    for (j, a) in g1.outs.iter().enumerate() {
        if let (Attach::Half(h1), Attach::Half(h2)) = (*a, g2.ins[j]) {
            edges.push((h1, sh(h2)));
        }
    }
    let ins = g1
        .ins
        .iter()
        .map(|a| match *a {
            Attach::Half(h) => Attach::Half(h),
            Attach::Leg(j) => match g2.ins[j] {
                Attach::Half(h2) => Attach::Half(sh(h2)),
                Attach::Leg(k) => Attach::Leg(k),
            },
        })
        .collect();
    let outs = g2
        .outs
        .iter()
        .map(|a| match *a {
            Attach::Half(h) => Attach::Half(sh(h)),
            Attach::Leg(j) => match g1.outs[j] {
                Attach::Half(h1) => Attach::Half(h1),
                Attach::Leg(i) => Attach::Leg(i),
            },
        })
        .collect();
    Ok(LeggedGraph { vertices, edges, ins, outs })
}

/// A formal combination of legged graph classes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LeggedChain {
    pub terms: BTreeMap<LeggedKey, Q>,
}

impl LeggedChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_key(&mut self, key: LeggedKey, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&mut self, other: &LeggedChain) {
        for (k, v) in &other.terms {
            self.add_key(k.clone(), v.clone());
        }
    }

    pub fn scaled(&self, c: &Q) -> LeggedChain {
        let mut out = LeggedChain::new();
        for (k, v) in &self.terms {
            out.add_key(k.clone(), v * c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Coboundary of a class: expansions of internal vertices, transported to
/// the legged orientation through the canonical representatives.
pub fn legged_coboundary_key(k: &LeggedKey, aut: u64) -> LeggedChain {
    let g = k.to_graph();
    let mut out = LeggedChain::new();
    for v in 0..g.vertices.len() {
        for (h, s) in g.expansions(v) {
            let c = h.canonical();
            if c.zero {
                continue;
            }
            let coeff = qr((s * c.state_sign()) as i64 * c.aut as i64, aut as i64);
            out.add_key(c.key, coeff);
        }
    }
    out
}

pub fn legged_coboundary(x: &LeggedChain) -> LeggedChain {
    let mut out = LeggedChain::new();
    for (k, v) in &x.terms {
        let aut = k.to_graph().canonical().aut;
        out.add(&legged_coboundary_key(k, aut).scaled(v));
    }
    out
}

/// Nonzero canonical classes with the given legs, at most `max_vertices`
/// internal vertices and `max_edges` internal edges. With `legs_everywhere`,
/// only graphs whose every component carries a leg are kept.
pub fn enumerate_legged(n_in: usize, n_out: usize, max_vertices: usize, max_edges: usize, legs_everywhere: bool) -> Vec<LeggedKey> {
    let mut found: BTreeMap<LeggedKey, ()> = BTreeMap::new();
    let mut throughs = Vec::new();
    partial_injections(n_in, n_out, &mut vec![None; n_in], &mut throughs);
    for th in &throughs {
        let t = th.iter().flatten().count();
        let legs = n_in + n_out - 2 * t;
        let legs_list: Vec<(bool, usize)> = (0..n_in)
            .filter(|&i| th[i].is_none())
            .map(|i| (true, i))
            .chain((0..n_out).filter(|&j| !th.iter().any(|x| *x == Some(j))).map(|j| (false, j)))
            .collect();
        for nv in 0..=max_vertices {
            for e in 0..=max_edges {
                let total = 2 * e + legs;
                let profiles = if nv == 0 {
                    if total == 0 {
                        vec![Vec::new()]
                    } else {
                        Vec::new()
                    }
                } else {
                    valence_profiles(total, nv, 3)
                };
                for prof in profiles {
                    let matchings = perfect_matchings(2 * e);
                    for_each_injection(legs, total, &mut |slots: &[usize]| {
                        let rest: Vec<usize> = (0..total).filter(|p| !slots.contains(p)).collect();
                        for m in &matchings {
                            let mut vertices = Vec::new();
                            let mut h = 0;
                            for &v in &prof {
                                vertices.push((h..h + v).collect());
                                h += v;
                            }
                            let edges = m.iter().map(|&(a, b)| (rest[a], rest[b])).collect();
                            let mut ins = vec![Attach::Leg(0); n_in];
                            let mut outs = vec![Attach::Leg(0); n_out];
                            for (i, x) in th.iter().enumerate() {
                                if let Some(j) = *x {
                                    ins[i] = Attach::Leg(j);
                                    outs[j] = Attach::Leg(i);
                                }
                            }
                            for (k, &(is_in, l)) in legs_list.iter().enumerate() {
                                if is_in {
                                    ins[l] = Attach::Half(slots[k]);
                                } else {
                                    outs[l] = Attach::Half(slots[k]);
                                }
                            }
                            let g = LeggedGraph { vertices, edges, ins, outs };
                            if legs_everywhere && !g.every_component_has_leg() {
                                continue;
                            }
                            let c = g.canonical();
                            if !c.zero {
                                found.insert(c.key, ());
                            }
                        }
                    });
                }
            }
        }
    }
    found.into_keys().collect()
}

impl LeggedGraph {
    pub fn every_component_has_leg(&self) -> bool {
        let info = self.info();
        self.components(&info).iter().all(|m| {
            m.iter().any(|&v| self.vertices[v].iter().any(|h| !matches!(info.partner[h], Partner::Half(_))))
        })
    }
}

fn partial_injections(n_in: usize, n_out: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
    fn rec(i: usize, n_out: usize, cur: &mut Vec<Option<usize>>, out: &mut Vec<Vec<Option<usize>>>) {
        if i == cur.len() {
            out.push(cur.clone());
            return;
        }
        cur[i] = None;
        rec(i + 1, n_out, cur, out);
        for j in 0..n_out {
            if cur[..i].contains(&Some(j)) {
                continue;
            }
            cur[i] = Some(j);
            rec(i + 1, n_out, cur, out);
        }
        cur[i] = None;
    }
    let _ = n_in;
    rec(0, n_out, cur, out);
}

fn for_each_injection(k: usize, n: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(k: usize, n: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for p in 0..n {
            if !cur.contains(&p) {
                cur.push(p);
                rec(k, n, cur, f);
                cur.pop();
            }
        }
    }
    rec(k, n, &mut Vec::new(), f);
}

/// Evaluates correlation tensors of one algebra.
#[derive(Debug, Clone)]
pub struct Correlator {
    parity: Vec<bool>,
    tensors: HashMap<usize, HashMap<Word, Q>>,
    /// Contraction along internal edges.
    b: Vec<Vec<Q>>,
    /// Tensor of a through edge; the inverse of `b`.
    g: Vec<Vec<Q>>,
}

impl Correlator {
    pub fn new(alg: &CyclicAInfinity) -> Result<Self, TcftError> {
        let b = inverse_pairing(&alg.pairing).map_err(AlgebraError::from)?.matrix;
        Ok(Self { parity: alg.space.parity.clone(), tensors: alg.vertex_tensors(), b, g: alg.pairing.matrix.clone() })
    }

    /// The state sum of a representative, slots ordered `in.., out..`.
    pub fn state_sum(&self, gr: &LeggedGraph) -> GradedTensor {
        let (m, n) = (gr.ins.len(), gr.outs.len());
        let mut out = GradedTensor::zero(m + n);
        let empty = HashMap::new();
        let tensors: Vec<&HashMap<Word, Q>> = gr.vertices.iter().map(|v| self.tensors.get(&v.len()).unwrap_or(&empty)).collect();
        if tensors.iter().any(|t| t.is_empty()) {
            return out;
        }
        // Input slot of each half-edge: vertex words concatenated.
        let mut slot = HashMap::new();
        let mut vertex_of = HashMap::new();
        let mut s = 0;
        for (v, list) in gr.vertices.iter().enumerate() {
            for &h in list {
                slot.insert(h, s);
                vertex_of.insert(h, v);
                s += 1;
            }
        }
        let internal = s;
        let through: Vec<(usize, usize)> =
            gr.ins.iter().enumerate().filter_map(|(i, a)| if let Attach::Leg(j) = *a { Some((i, j)) } else { None }).collect();
        let total = internal + 2 * through.len();
        let mut target = vec![0usize; total];
        for (i, a) in gr.ins.iter().enumerate() {
            if let Attach::Half(h) = *a {
                target[slot[&h]] = i;
            }
        }
        for (j, a) in gr.outs.iter().enumerate() {
            if let Attach::Half(h) = *a {
                target[slot[&h]] = m + j;
            }
        }
        for (k, &(a, b)) in gr.edges.iter().enumerate() {
            target[slot[&a]] = m + n + 2 * k;
            target[slot[&b]] = m + n + 2 * k + 1;
        }
        for (t, &(i, j)) in through.iter().enumerate() {
            target[internal + 2 * t] = i;
            target[internal + 2 * t + 1] = m + j;
        }
        // Edges completed once vertex `v` is assigned.
        let mut completes: Vec<Vec<(usize, usize)>> = vec![Vec::new(); gr.vertices.len()];
        for &(a, b) in &gr.edges {
            let v = vertex_of[&a].max(vertex_of[&b]);
            completes[v].push((slot[&a], slot[&b]));
        }
        let g_entries: Vec<(u16, u16, Q)> = (0..self.g.len())
            .flat_map(|a| (0..self.g.len()).map(move |b| (a, b)))
            .filter(|&(a, b)| !self.g[a][b].is_zero())
            .map(|(a, b)| (a as u16, b as u16, self.g[a][b].clone()))
            .collect();
        let words: Vec<Vec<(&Word, &Q)>> = tensors.iter().map(|t| t.iter().collect()).collect();
        let mut letters = vec![0u16; total];
        let mut offsets = vec![0usize; gr.vertices.len()];
        let mut acc = 0;
        for (v, list) in gr.vertices.iter().enumerate() {
            offsets[v] = acc;
            acc += list.len();
        }
        let ctx = StateCtx { m, n, internal, through: through.len(), target: &target, completes: &completes, words: &words, offsets: &offsets, g: &g_entries, b: &self.b, parity: &self.parity };
        ctx.vertex(0, qi(1), &mut letters, &mut out);
        out
    }

    /// The value of the class of `gr` in the legged orientation.
    pub fn correlation(&self, gr: &LeggedGraph) -> GradedTensor {
        let c = gr.canonical();
        if c.zero {
            return GradedTensor::zero(gr.ins.len() + gr.outs.len());
        }
        let mut t = self.state_sum(gr);
        t.scale(&qi(c.tau() as i64));
        t
    }

    pub fn correlation_key(&self, k: &LeggedKey) -> GradedTensor {
        self.state_sum(&k.to_graph())
    }

    /// Contracts the last `n` slots of `t1` (order `m1 + n`) with the first `n`
    /// slots of `t2` (order `n + n2`) along the edge pairing.
    pub fn compose(&self, t1: &GradedTensor, t2: &GradedTensor, n: usize) -> GradedTensor {
        let m1 = t1.order - n;
        let n2 = t2.order - n;
        let mut out = GradedTensor::zero(m1 + n2);
        let mut perm = vec![0usize; m1 + 2 * n + n2];
        for i in 0..m1 {
            perm[i] = i;
        }
        for j in 0..n {
            perm[m1 + j] = m1 + n2 + 2 * j;
            perm[m1 + n + j] = m1 + n2 + 2 * j + 1;
        }
        for k in 0..n2 {
            perm[m1 + 2 * n + k] = m1 + k;
        }
        for (w1, c1) in &t1.coeffs {
            for (w2, c2) in &t2.coeffs {
                let mut c = c1 * c2;
                for j in 0..n {
                    let x = &self.b[w1[m1 + j] as usize][w2[j] as usize];
                    if x.is_zero() {
                        c = Q::zero();
                        break;
                    }
                    c *= x;
                }
                if c.is_zero() {
                    continue;
                }
                let all: Vec<u16> = w1.iter().chain(w2.iter()).copied().collect();
                let par: Vec<bool> = all.iter().map(|&l| self.parity[l as usize]).collect();
                let sign = koszul_unchecked(&perm, &par);
                let mut w: Vec<u16> = w1[..m1].to_vec();
                w.extend_from_slice(&w2[n..]);
                out.add_term(w, c * qi(sign as i64));
            }
        }
        out
    }
}

struct StateCtx<'a> {
    m: usize,
    n: usize,
    internal: usize,
    through: usize,
    target: &'a [usize],
    completes: &'a [Vec<(usize, usize)>],
    words: &'a [Vec<(&'a Word, &'a Q)>],
    offsets: &'a [usize],
    g: &'a [(u16, u16, Q)],
    b: &'a [Vec<Q>],
    parity: &'a [bool],
}

impl StateCtx<'_> {
    fn vertex(&self, v: usize, coeff: Q, letters: &mut Vec<u16>, out: &mut GradedTensor) {
        if v == self.words.len() {
            self.through_edge(0, coeff, letters, out);
            return;
        }
        for (w, c) in &self.words[v] {
            letters[self.offsets[v]..self.offsets[v] + w.len()].copy_from_slice(w);
            let mut x = &coeff * *c;
            for &(a, b) in &self.completes[v] {
                let p = &self.b[letters[a] as usize][letters[b] as usize];
                if p.is_zero() {
                    x = Q::zero();
                    break;
                }
                x *= p;
            }
            if !x.is_zero() {
                self.vertex(v + 1, x, letters, out);
            }
        }
    }

    fn through_edge(&self, t: usize, coeff: Q, letters: &mut Vec<u16>, out: &mut GradedTensor) {
        if t == self.through {
            let par: Vec<bool> = letters.iter().map(|&l| self.parity[l as usize]).collect();
            let sign = koszul_unchecked(self.target, &par);
            let mut w = vec![0u16; self.m + self.n];
            for (s, &l) in letters.iter().enumerate() {
                if self.target[s] < self.m + self.n {
                    w[self.target[s]] = l;
                }
            }
            out.add_term(w, coeff * qi(sign as i64));
            return;
        }
        for (a, b, c) in self.g {
            letters[self.internal + 2 * t] = *a;
            letters[self.internal + 2 * t + 1] = *b;
            self.through_edge(t + 1, &coeff * c, letters, out);
        }
    }
}
