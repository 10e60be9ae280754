//! Cyclic words over a symplectic super vector space, their bracket, the
//! Chevalley-Eilenberg complex of the Lie algebra of cyclic words of length at
//! least two, Feynman amplitudes against ribbon graphs and the map `I` from
//! chains to graphs.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph_complex::GraphChain;
use crate::ribbon_graph::RibbonGraph;
use crate::super_core::{
    all_permutations, fmt_q, koszul_unchecked, parse_q, perm_sign, qi, word_parity, GradedTensor, InnerProduct, SuperError,
    SuperSpace, Q,
};

/// Letter index into a [`SymplecticSpace`].
pub type Letter = u16;
/// Linear word; canonical words are the least signed rotation.
pub type Word = Vec<Letter>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LieError {
    #[error(transparent)]
    Super(#[from] SuperError),
    #[error("unknown letter {0:?}")]
    UnknownLetter(String),
    #[error("malformed chain literal: {0}")]
    Literal(String),
    #[error("chain exceeds the cap of {monomials} wedge factors and {letters} letters")]
    Cap { monomials: usize, letters: usize },
    #[error("words of length {0} are outside the Lie algebra of words of length at least two")]
    ShortWord(usize),
}

/// Maximum number of wedge factors in a chain term.
pub const MAX_FACTORS: usize = 5;
/// Maximum number of letters in a chain term.
pub const MAX_LETTERS: usize = 14;

/// Super vector space with an even, graded-skew, nondegenerate form used for
/// both the bracket and the contraction of Feynman amplitudes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticSpace {
    pub labels: Vec<String>,
    pub parity: Vec<bool>,
    pub form: InnerProduct,
    /// Nonzero entries of the form, by first argument.
    pub partners: Vec<Vec<(Letter, Q)>>,
    /// `(n, m)` when this is `C^{2n|m}` with its canonical form.
    pub canonical: Option<(usize, usize)>,
}

impl SymplecticSpace {
    pub fn new(space: SuperSpace, form: InnerProduct) -> Result<Self, LieError> {
        form.validate(&space)?;
        let partners = (0..space.dim())
            .map(|a| (0..space.dim()).filter(|&b| !form.matrix[a][b].is_zero()).map(|b| (b as Letter, form.matrix[a][b].clone())).collect())
            .collect();
        Ok(Self { labels: space.labels, parity: space.parity, form, partners, canonical: None })
    }

    /// `C^{2n|m}` with `<p_i,q_i> = 1` and `<x_j,x_j> = 1`.
    pub fn canonical(n: usize, m: usize) -> Self {
        let mut s = Self::new(SuperSpace::canonical(n, m), InnerProduct::canonical(n, m)).expect("canonical form");
        s.canonical = Some((n, m));
        s
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn super_space(&self) -> SuperSpace {
        SuperSpace { labels: self.labels.clone(), parity: self.parity.clone() }
    }

    pub fn pair(&self, a: Letter, b: Letter) -> &Q {
        &self.form.matrix[a as usize][b as usize]
    }

    pub fn nonzero(&self, a: Letter, b: Letter) -> bool {
        !self.form.matrix[a as usize][b as usize].is_zero()
    }

    pub fn letter(&self, name: &str) -> Result<Letter, LieError> {
        self.labels.iter().position(|l| l == name).map(|i| i as Letter).ok_or_else(|| LieError::UnknownLetter(name.to_string()))
    }

    pub fn parse_word(&self, s: &str) -> Result<Word, LieError> {
        s.split_whitespace().map(|t| self.letter(t)).collect()
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.labels[l as usize].as_str()).collect::<Vec<_>>().join(" ")
    }

    pub fn word_parity(&self, w: &[Letter]) -> bool {
        word_parity(w, &self.parity)
    }

    /// Least rotation of `w` with its Koszul sign, or `None` if the cyclic word vanishes.
    pub fn canonical_word(&self, w: &[Letter]) -> Option<(Word, i32)> {
        let k = w.len();
        if k == 0 {
            return Some((Vec::new(), 1));
        }
        let mut best: Option<(Word, i32)> = None;
        let mut zero = false;
        let mut prefix_parity = false;
        let total = self.word_parity(w);
        for r in 0..k {
            let sign = if prefix_parity && (total ^ prefix_parity) { -1 } else { 1 };
            let mut rot = w[r..].to_vec();
            rot.extend_from_slice(&w[..r]);
            match &best {
                None => best = Some((rot, sign)),
                Some((b, s)) => match rot.cmp(b) {
                    std::cmp::Ordering::Less => {
                        best = Some((rot, sign));
                        zero = false;
                    }
                    std::cmp::Ordering::Equal => {
                        if *s != sign {
                            zero = true;
                        }
                    }
                    std::cmp::Ordering::Greater => {}
                },
            }
            prefix_parity ^= self.parity[w[r] as usize];
        }
        if zero {
            None
        } else {
            best
        }
    }

    /// Cyclic symmetrization `N w` as a map from linear words to coefficients.
    pub fn norm(&self, w: &[Letter]) -> HashMap<Word, Q> {
        let mut out: HashMap<Word, Q> = HashMap::new();
        let k = w.len();
        let total = self.word_parity(w);
        let mut prefix = false;
        for r in 0..k.max(1) {
            let sign = if prefix && (total ^ prefix) { -1 } else { 1 };
            let mut rot = w[r.min(k)..].to_vec();
            rot.extend_from_slice(&w[..r.min(k)]);
            *out.entry(rot).or_insert_with(Q::zero) += qi(sign);
            if k > 0 {
                prefix ^= self.parity[w[r] as usize];
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Bracket of two linear words, term by term over pairs of contracted letters.
    pub fn bracket_words(&self, a: &[Letter], b: &[Letter]) -> Vec<(Word, Q)> {
        let par = |l: Letter| self.parity[l as usize];
        let pa: Vec<bool> = a.iter().map(|&l| par(l)).collect();
        let pb: Vec<bool> = b.iter().map(|&l| par(l)).collect();
        let count = |v: &[bool]| v.iter().filter(|x| **x).count();
        let mut out = Vec::new();
        for i in 0..a.len() {
            for j in 0..b.len() {
                let val = self.pair(a[i], b[j]);
                if val.is_zero() {
                    continue;
                }
                let a_before = count(&pa[..i]);
                let a_after = count(&pa[i + 1..]);
                let b_before = count(&pb[..j]);
                let b_after = count(&pb[j + 1..]);
                let ai = pa[i] as usize;
                let exp = ai * (a_after + b_before) + a_before * a_after + b_before * b_after;
                let mut w: Word = a[i + 1..].to_vec();
                w.extend_from_slice(&a[..i]);
                w.extend_from_slice(&b[j + 1..]);
                w.extend_from_slice(&b[..j]);
                let c = if exp % 2 == 0 { val.clone() } else { -val.clone() };
                out.push((w, c));
            }
        }
        out
    }

    /// Bracket of cyclic polynomials.
    pub fn bracket(&self, f: &CyclicPoly, g: &CyclicPoly) -> CyclicPoly {
        let mut out = CyclicPoly::default();
        for (a, x) in &f.terms {
            for (b, y) in &g.terms {
                for (w, c) in self.bracket_words(a, b) {
                    out.add_word(self, &w, x * y * c);
                }
            }
        }
        out
    }

    /// Direct sum; canonical spaces stay canonical with indices shifted by `n` and `m`.
    /// Returns the sum and the letter maps of both summands.
    pub fn direct_sum(&self, other: &SymplecticSpace) -> (SymplecticSpace, Vec<Letter>, Vec<Letter>) {
        if let (Some((n1, m1)), Some((n2, m2))) = (self.canonical, other.canonical) {
            let (n, m) = (n1 + n2, m1 + m2);
            let s = SymplecticSpace::canonical(n, m);
            let map = |ni: usize, mi: usize, dn: usize, dm: usize| -> Vec<Letter> {
                let mut v = Vec::new();
                for i in 0..ni {
                    v.push((dn + i) as Letter);
                }
                for i in 0..ni {
                    v.push((n + dn + i) as Letter);
                }
                for j in 0..mi {
                    v.push((2 * n + dm + j) as Letter);
                }
                v
            };
            return (s, map(n1, m1, 0, 0), map(n2, m2, n1, m1));
        }
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().map(|l| format!("{l}'")));
        let mut parity = self.parity.clone();
        parity.extend(other.parity.iter().copied());
        let form = self.form.direct_sum(&other.form);
        let s = SymplecticSpace::new(SuperSpace { labels, parity }, form).expect("sum of valid forms");
        let d = self.dim();
        (s, (0..d as Letter).collect(), (0..other.dim()).map(|i| (d + i) as Letter).collect())
    }
}

/// Rational combination of canonical cyclic words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CyclicPoly {
    pub terms: BTreeMap<Word, Q>,
}

impl CyclicPoly {
    pub fn add_word(&mut self, space: &SymplecticSpace, w: &[Letter], c: Q) {
        if c.is_zero() {
            return;
        }
        let Some((cw, s)) = space.canonical_word(w) else { return };
        let e = self.terms.entry(cw.clone()).or_insert_with(Q::zero);
        *e += c * qi(s as i64);
        if e.is_zero() {
            self.terms.remove(&cw);
        }
    }

    pub fn add(&mut self, other: &CyclicPoly) {
        for (w, c) in &other.terms {
            let e = self.terms.entry(w.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                self.terms.remove(w);
            }
        }
    }

    pub fn scaled(&self, c: &Q) -> CyclicPoly {
        CyclicPoly { terms: self.terms.iter().filter(|_| !c.is_zero()).map(|(w, x)| (w.clone(), x * c)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn truncated(&self, max_len: usize) -> CyclicPoly {
        CyclicPoly { terms: self.terms.iter().filter(|(w, _)| w.len() <= max_len).map(|(w, x)| (w.clone(), x.clone())).collect() }
    }

    pub fn relabel(&self, space: &SymplecticSpace, map: &[Letter]) -> CyclicPoly {
        let mut out = CyclicPoly::default();
        for (w, c) in &self.terms {
            let nw: Word = w.iter().map(|&l| map[l as usize]).collect();
            out.add_word(space, &nw, c.clone());
        }
        out
    }
}

/// Sign of exchanging adjacent wedge factors `g ^ h = -(-1)^{|g||h|} h ^ g`.
fn exchange_sign(pg: bool, ph: bool) -> i32 {
    if pg && ph {
        1
    } else {
        -1
    }
}

/// Chevalley-Eilenberg chain: combination of wedge monomials of canonical words.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CeChain {
    pub terms: BTreeMap<Vec<Word>, Q>,
}

impl CeChain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c * (w_1 ^ ... ^ w_m)` for arbitrary linear words.
    pub fn add_monomial(&mut self, space: &SymplecticSpace, words: &[Word], c: Q) {
        if c.is_zero() {
            return;
        }
        let Some((key, s)) = canonical_monomial(space, words) else { return };
        let e = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *e += c * qi(s as i64);
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn add(&mut self, other: &CeChain) {
        for (k, v) in &other.terms {
            let e = self.terms.entry(k.clone()).or_insert_with(Q::zero);
            *e += v;
            if e.is_zero() {
                self.terms.remove(k);
            }
        }
    }

    pub fn scaled(&self, c: &Q) -> CeChain {
        if c.is_zero() {
            return CeChain::new();
        }
        CeChain { terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn monomial(space: &SymplecticSpace, words: &[Word]) -> CeChain {
        let mut c = CeChain::new();
        c.add_monomial(space, words, Q::one());
        c
    }

    pub fn wedge(&self, space: &SymplecticSpace, other: &CeChain) -> CeChain {
        let mut out = CeChain::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let mut w = a.clone();
                w.extend(b.iter().cloned());
                out.add_monomial(space, &w, x * y);
            }
        }
        out
    }

    pub fn relabel(&self, space: &SymplecticSpace, map: &[Letter]) -> CeChain {
        let mut out = CeChain::new();
        for (k, v) in &self.terms {
            let words: Vec<Word> = k.iter().map(|w| w.iter().map(|&l| map[l as usize]).collect()).collect();
            out.add_monomial(space, &words, v.clone());
        }
        out
    }

    /// Checks the factor and letter caps on every term.
    pub fn check_caps(&self) -> Result<(), LieError> {
        for k in self.terms.keys() {
            let letters: usize = k.iter().map(Vec::len).sum();
            if k.len() > MAX_FACTORS || letters > MAX_LETTERS {
                return Err(LieError::Cap { monomials: MAX_FACTORS, letters: MAX_LETTERS });
            }
        }
        Ok(())
    }

    /// Parses `c * [w1 ^ w2] + c' * [w3]`.
    pub fn parse(space: &SymplecticSpace, s: &str) -> Result<CeChain, LieError> {
        let mut out = CeChain::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest.find('[').ok_or_else(|| LieError::Literal(format!("expected '[' in {rest:?}")))?;
            let close = rest.find(']').ok_or_else(|| LieError::Literal("unclosed '['".into()))?;
            if close < open {
                return Err(LieError::Literal("']' before '['".into()));
            }
            let head = rest[..open].trim();
            let head = head.strip_suffix('*').unwrap_or(head).trim();
            let (neg, head) = match head.strip_prefix('-') {
                Some(h) => (true, h.trim()),
                None => (false, head.strip_prefix('+').unwrap_or(head).trim()),
            };
            let mut c = if head.is_empty() { Q::one() } else { parse_q(head)? };
            if neg {
                c = -c;
            }
            let body = &rest[open + 1..close];
            let words: Vec<Word> = body.split('^').map(|w| space.parse_word(w)).collect::<Result<_, _>>()?;
            out.add_monomial(space, &words, c);
            rest = rest[close + 1..].trim();
        }
        Ok(out)
    }

    pub fn format(&self, space: &SymplecticSpace) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, v)| {
                let ws: Vec<String> = k.iter().map(|w| space.format_word(w)).collect();
                format!("{} * [{}]", fmt_q(v), ws.join(" ^ "))
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

/// Canonical form of a wedge monomial with its sign, `None` when it vanishes.
pub fn canonical_monomial(space: &SymplecticSpace, words: &[Word]) -> Option<(Vec<Word>, i32)> {
    let mut sign = 1;
    let mut items: Vec<(Word, bool)> = Vec::with_capacity(words.len());
    for w in words {
        let (cw, s) = space.canonical_word(w)?;
        sign *= s;
        let p = space.word_parity(&cw);
        items.push((cw, p));
    }
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1].0 > items[j].0 {
            sign *= exchange_sign(items[j - 1].1, items[j].1);
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    for i in 1..items.len() {
        if items[i - 1].0 == items[i].0 && exchange_sign(items[i].1, items[i].1) == -1 {
            return None;
        }
    }
    Some((items.into_iter().map(|x| x.0).collect(), sign))
}

/// Chevalley-Eilenberg differential.
pub fn differential(space: &SymplecticSpace, x: &CeChain) -> CeChain {
    let mut out = CeChain::new();
    for (k, c) in &x.terms {
        let par: Vec<usize> = k.iter().map(|w| space.word_parity(w) as usize).collect();
        let m = k.len();
        for i in 0..m {
            for j in i + 1..m {
                let before_i: usize = par[..i].iter().sum();
                let before_j: usize = par[..j].iter().sum();
                let p = par[i] * before_i + par[j] * before_j + par[i] * par[j] + (i + 1) + (j + 1) - 1;
                let sign = if p % 2 == 0 { qi(1) } else { qi(-1) };
                let rest: Vec<Word> = (0..m).filter(|&t| t != i && t != j).map(|t| k[t].clone()).collect();
                for (w, bc) in space.bracket_words(&k[i], &k[j]) {
                    let mut words = vec![w];
                    words.extend(rest.iter().cloned());
                    out.add_monomial(space, &words, c * &sign * bc);
                }
            }
        }
    }
    out
}

/// Adjoint action of a cyclic polynomial on chains, as a derivation.
pub fn adjoint(space: &SymplecticSpace, g: &CyclicPoly, x: &CeChain) -> CeChain {
    let mut out = CeChain::new();
    for (gw, gc) in &g.terms {
        let pg = space.word_parity(gw) as usize;
        for (k, c) in &x.terms {
            let mut passed = 0usize;
            for i in 0..k.len() {
                let sign = if (pg * passed) % 2 == 0 { qi(1) } else { qi(-1) };
                for (w, bc) in space.bracket_words(gw, &k[i]) {
                    let mut words = k.clone();
                    words[i] = w;
                    out.add_monomial(space, &words, gc * c * &sign * bc);
                }
                passed += space.word_parity(&k[i]) as usize;
            }
        }
    }
    out
}

/// `epsilon T N` of a wedge monomial as a tensor in `V^{(x) sum k_i}`.
pub fn eps_tn(space: &SymplecticSpace, words: &[Word]) -> GradedTensor {
    let sp = space.super_space();
    let total: usize = words.iter().map(Vec::len).sum();
    let norms: Vec<HashMap<Word, Q>> = words.iter().map(|w| space.norm(w)).collect();
    let mut nt = GradedTensor::basis(Vec::new());
    for n in &norms {
        let mut t = GradedTensor::zero(n.keys().next().map_or(0, Vec::len));
        for (w, c) in n {
            t.add_term(w.clone(), c.clone());
        }
        nt = nt.tensor(&t);
    }
    let sizes: Vec<usize> = words.iter().map(Vec::len).collect();
    let mut out = GradedTensor::zero(total);
    for sigma in all_permutations(words.len()) {
        let perm = crate::super_core::block_permutation(&sigma, &sizes);
        let mut p = nt.permute(&perm, &sp).expect("block permutation");
        p.scale(&qi(perm_sign(&sigma) as i64));
        out.add(&p);
    }
    out
}

/// `beta_c` applied to a tensor of type matching the graph: contract the
/// letters at the two ends of each oriented edge.
pub fn beta_tensor(space: &SymplecticSpace, g: &RibbonGraph, t: &GradedTensor) -> Q {
    let (_, chords) = g.chords();
    let mut s = Q::zero();
    for (w, c) in &t.coeffs {
        s += c * beta_word(space, &chords, w);
    }
    s
}

/// `beta_c` of a single basis word.
pub fn beta_word(space: &SymplecticSpace, chords: &[(usize, usize)], w: &[Letter]) -> Q {
    let mut v = Q::one();
    for &(a, b) in chords {
        let x = space.pair(w[a], w[b]);
        if x.is_zero() {
            return Q::zero();
        }
        v *= x;
    }
    v * qi(chord_koszul(space, chords, w) as i64)
}

/// Koszul sign of bringing the ends of each chord together in chord order.
pub(crate) fn chord_koszul(space: &SymplecticSpace, chords: &[(usize, usize)], w: &[Letter]) -> i32 {
    let mut perm = vec![0usize; w.len()];
    for (r, &(a, b)) in chords.iter().enumerate() {
        perm[a] = 2 * r;
        perm[b] = 2 * r + 1;
    }
    let par: Vec<bool> = w.iter().map(|&l| space.parity[l as usize]).collect();
    koszul_unchecked(&perm, &par)
}

/// Sum over letter assignments compatible with vertex tensors, weighted by the
/// form on every edge and the Koszul sign of the chord diagram.
pub fn contract(space: &SymplecticSpace, g: &RibbonGraph, tensors: &[&HashMap<Word, Q>]) -> Q {
    let (valences, chords) = g.chords();
    let nv = valences.len();
    let mut start = vec![0usize; nv + 1];
    for v in 0..nv {
        start[v + 1] = start[v] + valences[v];
    }
    let vertex_of = |h: usize| start.partition_point(|&s| s <= h) - 1;
    let mut done_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for &(a, b) in &chords {
        done_at[vertex_of(a).max(vertex_of(b))].push((a, b));
    }
    let vertex_cost: f64 = tensors.iter().map(|t| t.len() as f64).product();
    let nnz: usize = space.partners.iter().map(Vec::len).sum();
    let edge_cost = (nnz as f64).powi(chords.len() as i32);
    if tensors.iter().any(|t| t.is_empty()) {
        return Q::zero();
    }
    if vertex_cost <= edge_cost {
        let mut letters = vec![0 as Letter; start[nv]];
        let mut total = Q::zero();
        contract_vertices(space, &chords, &start, &done_at, tensors, 0, Q::one(), &mut letters, &mut total);
        total
    } else {
        contract_edges(space, &chords, &start, tensors)
    }
}

#[allow(clippy::too_many_arguments)]
fn contract_vertices(
    space: &SymplecticSpace,
    chords: &[(usize, usize)],
    start: &[usize],
    done_at: &[Vec<(usize, usize)>],
    tensors: &[&HashMap<Word, Q>],
    v: usize,
    acc: Q,
    letters: &mut Vec<Letter>,
    total: &mut Q,
) {
    if v == tensors.len() {
        *total += acc * qi(chord_koszul(space, chords, letters) as i64);
        return;
    }
    'words: for (w, c) in tensors[v].iter() {
        letters[start[v]..start[v + 1]].copy_from_slice(w);
        let mut val = &acc * c;
        for &(a, b) in &done_at[v] {
            let x = space.pair(letters[a], letters[b]);
            if x.is_zero() {
                continue 'words;
            }
            val *= x;
        }
        contract_vertices(space, chords, start, done_at, tensors, v + 1, val, letters, total);
    }
}

fn contract_edges(space: &SymplecticSpace, chords: &[(usize, usize)], start: &[usize], tensors: &[&HashMap<Word, Q>]) -> Q {
    let nv = tensors.len();
    let vertex_of = |h: usize| start.partition_point(|&s| s <= h) - 1;
    let mut order: Vec<usize> = (0..chords.len()).collect();
    order.sort_by_key(|&e| vertex_of(chords[e].0).max(vertex_of(chords[e].1)));
    let mut remaining = vec![0usize; nv];
    for v in 0..nv {
        remaining[v] = start[v + 1] - start[v];
    }
    struct St<'a> {
        space: &'a SymplecticSpace,
        chords: &'a [(usize, usize)],
        start: &'a [usize],
        tensors: &'a [&'a HashMap<Word, Q>],
        order: Vec<usize>,
        vertex_of: Vec<usize>,
        letters: Vec<Letter>,
        remaining: Vec<usize>,
        total: Q,
    }
    fn rec(st: &mut St, i: usize, acc: Q) {
        if i == st.order.len() {
            let s = chord_koszul(st.space, st.chords, &st.letters);
            st.total += acc * qi(s as i64);
            return;
        }
        let (a, b) = st.chords[st.order[i]];
        let (va, vb) = (st.vertex_of[a], st.vertex_of[b]);
        let choices: Vec<(Letter, Letter, Q)> = (0..st.space.dim() as Letter)
            .flat_map(|x| st.space.partners[x as usize].iter().map(move |(y, c)| (x, *y, c.clone())))
            .collect();
        for (x, y, c) in choices {
            st.letters[a] = x;
            st.letters[b] = y;
            st.remaining[va] -= 1;
            st.remaining[vb] -= 1;
            let mut val = &acc * c;
            let mut ok = true;
            for v in if va == vb { vec![va] } else { vec![va, vb] } {
                if st.remaining[v] == 0 {
                    let w = &st.letters[st.start[v]..st.start[v + 1]];
                    match st.tensors[v].get(w) {
                        Some(t) => val *= t,
                        None => {
                            ok = false;
                        }
                    }
                }
            }
            if ok {
                rec(st, i + 1, val);
            }
            st.remaining[va] += 1;
            st.remaining[vb] += 1;
        }
    }
    let h = start[nv];
    let mut st = St {
        space,
        chords,
        start,
        tensors,
        order,
        vertex_of: (0..h).map(vertex_of).collect(),
        letters: vec![0; h],
        remaining,
        total: Q::zero(),
    };
    rec(&mut st, 0, Q::one());
    st.total
}

/// `F_G(x)`: the Feynman amplitude of a chain against a fully ordered graph.
pub fn feynman(space: &SymplecticSpace, x: &CeChain, g: &RibbonGraph) -> Q {
    let valences = g.valences();
    let mut total = Q::zero();
    for (k, c) in &x.terms {
        if k.len() != valences.len() {
            continue;
        }
        if k.is_empty() {
            total += c;
            continue;
        }
        let mut lens: Vec<usize> = k.iter().map(Vec::len).collect();
        let mut vs = valences.clone();
        lens.sort_unstable();
        vs.sort_unstable();
        if lens != vs {
            continue;
        }
        let norms: Vec<HashMap<Word, Q>> = k.iter().map(|w| space.norm(w)).collect();
        let par: Vec<bool> = k.iter().map(|w| space.word_parity(w)).collect();
        for sigma in all_permutations(k.len()) {
            if (0..k.len()).any(|i| k[i].len() != valences[sigma[i]]) {
                continue;
            }
            let sign = perm_sign(&sigma) * koszul_unchecked(&sigma, &par);
            let mut tensors: Vec<&HashMap<Word, Q>> = vec![&norms[0]; k.len()];
            for i in 0..k.len() {
                tensors[sigma[i]] = &norms[i];
            }
            let v = contract(space, g, &tensors);
            if !v.is_zero() {
                total += c * qi(sign as i64) * v;
            }
        }
    }
    total
}

/// `<<x, G>> = F_G(x) / |Aut G|`.
pub fn feynman_pairing(space: &SymplecticSpace, x: &CeChain, g: &RibbonGraph) -> Q {
    let can = g.canonical();
    if can.zero {
        return Q::zero();
    }
    feynman(space, x, g) / qi(can.aut as i64)
}

/// The map `I`: sum over chord diagrams oriented from lower to higher position.
pub fn i_map(space: &SymplecticSpace, x: &CeChain) -> GraphChain {
    let mut out = GraphChain::new();
    for (k, c) in &x.terms {
        if k.iter().any(|w| w.len() < 3) {
            continue;
        }
        let valences: Vec<usize> = k.iter().map(Vec::len).collect();
        let letters: Word = k.iter().flatten().copied().collect();
        let mut chords = Vec::new();
        let mut used = vec![false; letters.len()];
        matchings(space, &letters, &mut used, &mut chords, &mut |ch| {
            let b = beta_word(space, ch, &letters);
            if !b.is_zero() {
                let g = RibbonGraph::from_chords(&valences, ch).expect("matching");
                out.add_graph(&g, c * b);
            }
        });
    }
    out
}

fn matchings(
    space: &SymplecticSpace,
    letters: &[Letter],
    used: &mut Vec<bool>,
    cur: &mut Vec<(usize, usize)>,
    f: &mut dyn FnMut(&[(usize, usize)]),
) {
    let Some(a) = used.iter().position(|u| !u) else {
        f(cur);
        return;
    };
    used[a] = true;
    for b in a + 1..letters.len() {
        if used[b] || !space.nonzero(letters[a], letters[b]) {
            continue;
        }
        used[b] = true;
        cur.push((a, b));
        matchings(space, letters, used, cur, f);
        cur.pop();
        used[b] = false;
    }
    used[a] = false;
}

/// Chain whose image under `I` is `+-G`: the ends of chord `r` carry `p_r` and `q_r`,
/// or `x_r` and `x_r` when `odd` is set. Lives on `C^{2k|k}` for `k` edges.
pub fn chain_for_graph(g: &RibbonGraph, odd: bool) -> (SymplecticSpace, CeChain) {
    let (valences, chords) = g.chords();
    let k = chords.len();
    let space = SymplecticSpace::canonical(k, k);
    let mut letters = vec![0 as Letter; 2 * k];
    for (r, &(a, b)) in chords.iter().enumerate() {
        if odd {
            letters[a] = (2 * k + r) as Letter;
            letters[b] = (2 * k + r) as Letter;
        } else {
            letters[a] = r as Letter;
            letters[b] = (k + r) as Letter;
        }
    }
    let mut words = Vec::new();
    let mut pos = 0;
    for v in valences {
        words.push(letters[pos..pos + v].to_vec());
        pos += v;
    }
    let chain = CeChain::monomial(&space, &words);
    (space, chain)
}

/// Stable product: relabel both chains into the direct sum and wedge.
pub fn stable_product(a: &SymplecticSpace, x: &CeChain, b: &SymplecticSpace, y: &CeChain) -> (SymplecticSpace, CeChain) {
    let (s, ma, mb) = a.direct_sum(b);
    let xa = x.relabel(&s, &ma);
    let yb = y.relabel(&s, &mb);
    let p = xa.wedge(&s, &yb);
    (s, p)
}

/// Random chain whose letters come in pairs with nonzero pairing, so that
/// amplitudes are often nonzero. Words have length at least three.
pub fn random_chain<R: Rng>(space: &SymplecticSpace, rng: &mut R, max_terms: usize, max_factors: usize, max_letters: usize) -> CeChain {
    let mut out = CeChain::new();
    let pairs: Vec<(Letter, Letter)> =
        (0..space.dim() as Letter).flat_map(|a| space.partners[a as usize].iter().map(move |(b, _)| (a, *b))).collect();
    let nterms = rng.gen_range(1..=max_terms);
    for _ in 0..nterms {
        let m = rng.gen_range(1..=max_factors);
        let min_letters = 3 * m + (3 * m) % 2;
        if min_letters > max_letters {
            continue;
        }
        let total = 2 * rng.gen_range(min_letters / 2..=max_letters / 2);
        let mut letters = Vec::with_capacity(total);
        for _ in 0..total / 2 {
            let (a, b) = pairs[rng.gen_range(0..pairs.len())];
            letters.push(a);
            letters.push(b);
        }
        letters.shuffle(rng);
        let mut cuts: Vec<usize> = vec![3; m];
        for _ in 0..total - 3 * m {
            let i = rng.gen_range(0..m);
            cuts[i] += 1;
        }
        let mut words = Vec::new();
        let mut pos = 0;
        for c in cuts {
            words.push(letters[pos..pos + c].to_vec());
            pos += c;
        }
        let c = qi(rng.gen_range(1..=5)) * if rng.gen_bool(0.5) { qi(1) } else { qi(-1) };
        out.add_monomial(space, &words, c);
    }
    out
}
