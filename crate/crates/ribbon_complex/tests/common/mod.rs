//! Brute-force oracles shared by the integration tests and the acceptance runner.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use ribbon_complex::ribbon_graph::{GraphKey, RibbonGraph};
use ribbon_complex::tcft::{Attach, LeggedGraph};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// Fully ordered graph as a chord diagram: valences in vertex order and
/// oriented chords on block positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Diagram {
    pub valences: Vec<usize>,
    pub chords: BTreeSet<(usize, usize)>,
}

impl Diagram {
    fn starts(&self) -> Vec<usize> {
        let mut s = vec![0];
        for &k in &self.valences {
            s.push(s.last().unwrap() + k);
        }
        s
    }

    fn map_positions(&self, valences: Vec<usize>, f: impl Fn(usize) -> usize) -> Diagram {
        Diagram { valences, chords: self.chords.iter().map(|&(a, b)| (f(a), f(b))).collect() }
    }

    /// Swap vertices `t` and `t + 1`; sign `-1`.
    fn swap(&self, t: usize) -> Diagram {
        let st = self.starts();
        let (ka, kb) = (self.valences[t], self.valences[t + 1]);
        let mut valences = self.valences.clone();
        valences.swap(t, t + 1);
        let base = st[t];
        self.map_positions(valences, |p| {
            if p >= base && p < base + ka {
                p + kb
            } else if p >= base + ka && p < base + ka + kb {
                p - ka
            } else {
                p
            }
        })
    }

    /// Rotate vertex `t` by one slot; sign `+1`.
    fn rotate(&self, t: usize) -> Diagram {
        let st = self.starts();
        let (base, k) = (st[t], self.valences[t]);
        self.map_positions(self.valences.clone(), |p| if p >= base && p < base + k { base + (p - base + k - 1) % k } else { p })
    }

    /// Reverse the chord starting at `a`; sign `-1`.
    fn flip(&self, a: (usize, usize)) -> Diagram {
        let mut d = self.clone();
        d.chords.remove(&a);
        d.chords.insert((a.1, a.0));
        d
    }

    pub fn to_graph(&self) -> RibbonGraph {
        let chords: Vec<(usize, usize)> = self.chords.iter().copied().collect();
        RibbonGraph::from_chords(&self.valences, &chords).expect("diagram")
    }
}

/// One orbit of fully ordered graphs under vertex permutations, rotations and flips.
#[derive(Debug, Clone)]
pub struct Orbit {
    pub representative: Diagram,
    pub aut: u64,
    pub zero: bool,
    pub connected: bool,
}

fn perfect_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
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
    rec(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

fn ordered_profiles(vertices: usize, total: usize) -> Vec<Vec<usize>> {
    if vertices == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for k in 3..=total {
        for mut rest in ordered_profiles(vertices - 1, total - k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Orbit of a diagram with the sign of each member; the flag reports a
/// diagram reached with both signs.
pub fn orbit(start: &Diagram) -> (HashMap<Diagram, i32>, bool) {
    let mut orbit: HashMap<Diagram, i32> = HashMap::new();
    let mut zero = false;
    let mut queue = VecDeque::new();
    orbit.insert(start.clone(), 1);
    queue.push_back(start.clone());
    while let Some(d) = queue.pop_front() {
        let s = orbit[&d];
        let mut next = Vec::new();
        for t in 0..d.valences.len() {
            next.push((d.rotate(t), s));
            if t + 1 < d.valences.len() {
                next.push((d.swap(t), -s));
            }
        }
        for &c in &d.chords {
            next.push((d.flip(c), -s));
        }
        for (n, sn) in next {
            match orbit.get(&n) {
                Some(&x) if x != sn => zero = true,
                Some(_) => {}
                None => {
                    orbit.insert(n.clone(), sn);
                    queue.push_back(n);
                }
            }
        }
    }
    (orbit, zero)
}

fn group_order(d: &Diagram) -> u64 {
    factorial(d.valences.len()) * d.valences.iter().map(|&k| k as u64).product::<u64>() * (1u64 << d.chords.len())
}

/// Brute-force `|Aut|` and zero flag of a graph from the orbit of its diagram.
pub fn brute_aut(g: &RibbonGraph) -> (u64, bool) {
    let (valences, chords) = g.chords();
    let d = Diagram { valences, chords: chords.into_iter().collect() };
    let (o, zero) = orbit(&d);
    (group_order(&d) / o.len() as u64, zero)
}

/// Every orbit of oriented chord diagrams with `vertices` vertices of valence
/// at least three and `edges` chords, found by breadth-first search over the
/// generators. `|Aut| = |group| / |orbit|`; an orbit is zero when it contains
/// a diagram with both signs.
pub fn naive_orbits(vertices: usize, edges: usize) -> Vec<Orbit> {
    let mut seen: HashMap<Diagram, i32> = HashMap::new();
    let mut out = Vec::new();
    for valences in ordered_profiles(vertices, 2 * edges) {
        for m in perfect_matchings(2 * edges) {
            let start = Diagram { valences: valences.clone(), chords: m.into_iter().collect() };
            if seen.contains_key(&start) {
                continue;
            }
            let (orbit, zero) = orbit(&start);
            let aut = group_order(&start) / orbit.len() as u64;
            let connected = start.to_graph().is_connected();
            for (d, s) in orbit {
                seen.insert(d, s);
            }
            out.push(Orbit { representative: start, aut, zero, connected });
        }
    }
    out
}

/// Every fully ordered representative of a graph: all vertex orders, all
/// rotations, all edge flips, with the sign relating it to `g`.
pub fn representatives(g: &RibbonGraph) -> Vec<(RibbonGraph, i32)> {
    let n = g.vertices.len();
    let mut out = Vec::new();
    let mut perms = vec![vec![]];
    for _ in 0..n {
        perms = perms
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..n).filter(|x| !p.contains(x)).map(|x| [p.clone(), vec![x]].concat()).collect::<Vec<_>>()
            })
            .collect();
    }
    for p in perms {
        let (base, s) = g.reorder_vertices(&p);
        let rot_counts: Vec<usize> = base.vertices.iter().map(Vec::len).collect();
        let total_rot: usize = rot_counts.iter().product();
        for mut r in 0..total_rot {
            let mut h = base.clone();
            for (v, &k) in rot_counts.iter().enumerate() {
                h.vertices[v].rotate_left(r % k);
                r /= k;
            }
            for mask in 0u32..(1 << h.edges.len()) {
                let mut f = h.clone();
                let mut sign = s;
                for (e, x) in f.edges.iter_mut().enumerate() {
                    if mask >> e & 1 == 1 {
                        *x = (x.1, x.0);
                        sign = -sign;
                    }
                }
                out.push((f, sign));
            }
        }
    }
    out
}

/// Contract edge `e`, then re-expand the merged vertex along the ideal edge
/// recording the two original blocks. Returns the total sign relating the
/// result to `g`, or `None` if the result is not isomorphic to `g`.
pub fn contract_expand_sign(g: &RibbonGraph, e: usize) -> Option<i32> {
    let (s, t) = g.edges[e];
    let vertex_of = |h: usize| g.vertices.iter().position(|v| v.contains(&h)).unwrap();
    let kv = g.vertices[vertex_of(s)].len();
    let _ = t;
    let (h, s1) = g.contract(e).ok()?;
    let merged = &h.vertices[0];
    let (a, b) = merged.split_at(kv - 1);
    let (back, s2) = h.expand(0, a, b).ok()?;
    let (c0, c1) = (g.canonical(), back.canonical());
    if c0.key != c1.key {
        return None;
    }
    Some(s1 * s2 * c0.sign * c1.sign)
}

pub fn max_half(g: &LeggedGraph) -> usize {
    let mut m = g.vertices.iter().flatten().map(|&h| h + 1).max().unwrap_or(0);
    for a in g.ins.iter().chain(g.outs.iter()) {
        if let Attach::Half(h) = a {
            m = m.max(h + 1);
        }
    }
    m
}

/// Random representative of the same legged class with fresh half-edge ids.
pub fn shuffle_legged(g: &LeggedGraph, rng: &mut impl Rng) -> LeggedGraph {
    let mut h = g.clone();
    h.vertices.shuffle(rng);
    for v in h.vertices.iter_mut() {
        let r = rng.gen_range(0..v.len());
        v.rotate_left(r);
    }
    h.edges.shuffle(rng);
    for e in h.edges.iter_mut() {
        if rng.gen_bool(0.5) {
            *e = (e.1, e.0);
        }
    }
    let mut p: Vec<usize> = (0..max_half(&h)).map(|x| 3 * x + 7).collect();
    p.shuffle(rng);
    let att = |a: &Attach| match *a {
        Attach::Half(x) => Attach::Half(p[x]),
        l => l,
    };
    LeggedGraph {
        vertices: h.vertices.iter().map(|v| v.iter().map(|&x| p[x]).collect()).collect(),
        edges: h.edges.iter().map(|&(a, b)| (p[a], p[b])).collect(),
        ins: h.ins.iter().map(att).collect(),
        outs: h.outs.iter().map(att).collect(),
    }
}

/// Nonzero class counts of an enumerated cell against the naive orbits.
pub fn compare_cell(keys: &[GraphKey], auts: &[u64], vertices: usize, edges: usize) -> Result<usize, String> {
    let orbits = naive_orbits(vertices, edges);
    let nonzero: Vec<&Orbit> = orbits.iter().filter(|o| !o.zero).collect();
    if nonzero.len() != keys.len() {
        return Err(format!("cell ({vertices},{edges}): {} classes, naive count {}", keys.len(), nonzero.len()));
    }
    let mut by_key: BTreeMap<GraphKey, u64> = BTreeMap::new();
    for o in &nonzero {
        by_key.insert(o.representative.to_graph().canonical().key, o.aut);
    }
    for (k, a) in keys.iter().zip(auts) {
        match by_key.get(k) {
            Some(b) if b == a => {}
            Some(b) => return Err(format!("{k}: |Aut| {a}, naive {b}")),
            None => return Err(format!("{k}: missing from naive orbits")),
        }
    }
    Ok(nonzero.len())
}
