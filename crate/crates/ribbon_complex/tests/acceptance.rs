//! Acceptance runner: one line per criterion, nonzero exit on any failure.
mod common;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ribbon_complex::ainfinity::{perturbed_dual, CyclicAInfinity};
use ribbon_complex::cyclic_lie::*;
use ribbon_complex::graph_complex::*;
use ribbon_complex::linalg::{rank, SparseMatrix};
use ribbon_complex::partition::*;
use ribbon_complex::ribbon_graph::GraphKey;
use ribbon_complex::super_core::*;
use ribbon_complex::tcft::*;
use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

type Outcome = Result<String, String>;

const BUILTINS: [&str; 3] = ["ground", "dual", "ground+ground"];

fn builtins() -> Vec<CyclicAInfinity> {
    BUILTINS.iter().map(|n| CyclicAInfinity::builtin(n).unwrap()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn report(name: &str, r: Result<Report, PartitionError>) -> Result<(usize, usize), String> {
    let r = r.map_err(|e| format!("{name}: {e}"))?;
    ensure(r.passed(), || format!("{name}: {} of {} failed; {}", r.failed, r.checked, r.witnesses.join("; ")))?;
    Ok((r.checked, r.nontrivial))
}

fn is_zero_matrix(m: &SparseMatrix) -> bool {
    m.nnz() == 0
}

fn keys_upto(basis: &GraphBasis, max_edges: usize) -> Vec<(GraphKey, u64)> {
    basis
        .cells
        .iter()
        .filter(|((_, j), _)| *j <= max_edges)
        .flat_map(|(_, c)| c.keys.iter().cloned().zip(c.aut.iter().copied()))
        .collect()
}

fn c1_differentials(basis: &GraphBasis) -> Outcome {
    let mut checked = 0;
    for &(i, j) in basis.cells.keys() {
        if i >= 2 && j >= 2 {
            let d1 = basis.boundary_matrix(i, j).unwrap();
            if let Ok(d2) = basis.boundary_matrix(i - 1, j - 1) {
                ensure(is_zero_matrix(&d2.mul(&d1)), || format!("boundary squared nonzero on ({i},{j})"))?;
                checked += 1;
            }
        }
        if j + 2 > basis.max_edges {
            continue;
        }
        if let (Ok(c1), Ok(c2)) = (basis.coboundary_matrix(i, j), basis.coboundary_matrix(i + 1, j + 1)) {
            ensure(is_zero_matrix(&c2.mul(&c1)), || format!("coboundary squared nonzero on ({i},{j})"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} composites zero"))
}

fn c2_adjointness(basis: &GraphBasis) -> Outcome {
    let mut pairs = 0;
    for &(i, j) in basis.cells.keys() {
        if i == 0 || j == 0 || basis.cell(i - 1, j - 1).is_none() {
            continue;
        }
        let d = basis.boundary_matrix(i, j).unwrap();
        let c = basis.coboundary_matrix(i - 1, j - 1).unwrap();
        ensure(d == c.transpose(), || format!("<dG, G'> != <G, deltaG'> on ({i},{j})"))?;
        pairs += basis.dim(i, j) * basis.dim(i - 1, j - 1);
    }
    Ok(format!("{pairs} basis pairs"))
}

/// Pairings of `x` with every key of a list, skipping keys whose valence
/// profile cannot match.
fn pairings(s: &SymplecticSpace, x: &CeChain, keys: &[(GraphKey, u64)]) -> HashMap<GraphKey, Q> {
    let profiles: Vec<Vec<usize>> = x
        .terms
        .keys()
        .map(|k| {
            let mut l: Vec<usize> = k.iter().map(Vec::len).collect();
            l.sort_unstable();
            l
        })
        .collect();
    keys.iter()
        .filter(|(k, _)| {
            let mut v: Vec<usize> = k.valences().iter().map(|&x| x as usize).collect();
            v.sort_unstable();
            profiles.contains(&v)
        })
        .map(|(k, aut)| (k.clone(), feynman(s, x, &k.to_graph()) / qi(*aut as i64)))
        .filter(|(_, v)| !v.is_zero())
        .collect()
}

fn c3_chain_compatibility(basis: &GraphBasis) -> Outcome {
    let s = SymplecticSpace::canonical(2, 2);
    let graphs = keys_upto(basis, 6);
    let deltas: Vec<GraphChain> = graphs.par_iter().map(|(k, _)| coboundary_graph(&k.to_graph())).collect();
    let targets = keys_upto(basis, 7);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chains: Vec<CeChain> = (0..200).map(|_| random_chain(&s, &mut rng, 4, 4, 12)).collect();
    let results: Vec<Result<usize, String>> = chains
        .par_iter()
        .map(|x| {
            let dx = differential(&s, x);
            let px = pairings(&s, x, &targets);
            let pdx = pairings(&s, &dx, &graphs);
            let ix = i_map(&s, x);
            let mut nonzero = 0;
            for ((k, _), d) in graphs.iter().zip(&deltas) {
                let lhs = pdx.get(k).cloned().unwrap_or_else(Q::zero);
                let mut rhs = Q::zero();
                for (t, c) in &d.terms {
                    if let Some(v) = px.get(t) {
                        rhs += c * v;
                    }
                }
                ensure(lhs == rhs, || format!("<<dx, {k}>> = {} but <<x, delta>> = {}; x = {}", fmt_q(&lhs), fmt_q(&rhs), x.format(&s)))?;
                let a = px.get(k).cloned().unwrap_or_else(Q::zero);
                let b = ix.coeff(k);
                ensure(a == b, || format!("<<x, {k}>> = {} but <I(x), G> = {}; x = {}", fmt_q(&a), fmt_q(&b), x.format(&s)))?;
                nonzero += usize::from(!lhs.is_zero()) + usize::from(!a.is_zero());
            }
            Ok(nonzero)
        })
        .collect();
    let mut nonzero = 0;
    for r in results {
        nonzero += r?;
    }
    ensure(nonzero > 0, || "every pairing vanished".into())?;
    Ok(format!("200 chains x {} graphs, {nonzero} nonzero pairings", graphs.len()))
}

fn c4_osp(basis: &GraphBasis) -> Outcome {
    let s = SymplecticSpace::canonical(2, 2);
    let graphs = keys_upto(basis, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = s.dim() as u16;
    let mut samples = Vec::new();
    for _ in 0..50 {
        let x = random_chain(&s, &mut rng, 4, 4, 12);
        let mut g = CyclicPoly::default();
        while g.is_zero() {
            for _ in 0..3 {
                let w = [rng.gen_range(0..d), rng.gen_range(0..d)];
                g.add_word(&s, &w, qi(rng.gen_range(1..=4)));
            }
        }
        samples.push((g, x));
    }
    let moved: usize = samples
        .par_iter()
        .map(|(g, x)| {
            let ad = adjoint(&s, g, x);
            if let Some((k, v)) = pairings(&s, &ad, &graphs).into_iter().next() {
                return Err(format!("<<ad_g x, {k}>> = {}", fmt_q(&v)));
            }
            Ok(usize::from(!ad.is_zero()))
        })
        .collect::<Result<Vec<_>, String>>()?
        .into_iter()
        .sum();
    ensure(moved > 0, || "every adjoint action vanished".into())?;
    Ok(format!("50 samples, {moved} with ad_g x != 0"))
}

fn c5_hopf(basis: &GraphBasis) -> Outcome {
    let s = SymplecticSpace::canonical(2, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut nonzero = 0;
    for t in 0..60 {
        let x = random_chain(&s, &mut rng, 2, 2, 6);
        let y = random_chain(&s, &mut rng, 2, 2, 6);
        let (sp, p) = stable_product(&s, &x, &s, &y);
        let lhs = i_map(&sp, &p);
        let rhs = i_map(&s, &x).union(&i_map(&s, &y));
        for k in lhs.terms.keys().chain(rhs.terms.keys()) {
            let (a, b) = (pairing(&lhs, &GraphChain::basis(k.clone())), pairing(&rhs, &GraphChain::basis(k.clone())));
            ensure(a == b, || format!("pair {t}: <I(xy), {k}> = {} but <I(x)I(y), {k}> = {}", fmt_q(&a), fmt_q(&b)))?;
        }
        nonzero += usize::from(!lhs.is_zero());
    }
    ensure(nonzero > 0, || "every product vanished".into())?;
    let mut graphs = 0;
    for (k, _) in keys_upto(basis, 6) {
        let g = k.to_graph();
        let d = coproduct_graph(&g);
        for ((a, b), c) in &d {
            let swapped = d.get(&(b.clone(), a.clone())).cloned().unwrap_or_else(Q::zero);
            let sign = if a.vertices() * b.vertices() % 2 == 1 { qi(-1) } else { qi(1) };
            ensure(swapped == c * sign, || format!("coproduct of {k} not cocommutative at ({a}, {b})"))?;
        }
        let mut left: BTreeMap<(GraphKey, GraphKey, GraphKey), Q> = BTreeMap::new();
        let mut right: BTreeMap<(GraphKey, GraphKey, GraphKey), Q> = BTreeMap::new();
        for ((a, b), c) in &d {
            for ((a1, a2), c2) in coproduct_graph(&a.to_graph()) {
                *left.entry((a1, a2, b.clone())).or_insert_with(Q::zero) += c * c2;
            }
            for ((b1, b2), c2) in coproduct_graph(&b.to_graph()) {
                *right.entry((a.clone(), b1, b2)).or_insert_with(Q::zero) += c * c2;
            }
        }
        left.retain(|_, v| !v.is_zero());
        right.retain(|_, v| !v.is_zero());
        ensure(left == right, || format!("coproduct of {k} not coassociative"))?;
        graphs += 1;
    }
    Ok(format!("60 products ({nonzero} nonzero), coproduct on {graphs} graphs"))
}

fn c6_rank(basis: &GraphBasis) -> Outcome {
    let mut cells = 0;
    for (&(i, j), cell) in &basis.cells {
        if j > 5 || j == 0 || cell.keys.is_empty() {
            continue;
        }
        let space = SymplecticSpace::canonical(2 * j, 2 * j);
        let mut cols = Vec::new();
        for k in &cell.keys {
            for odd in [false, true] {
                let (sp, x) = chain_for_graph(&k.to_graph(), odd);
                let map: Vec<u16> = (0..sp.dim() as u16)
                    .map(|l| {
                        let (n, e) = (sp.canonical.unwrap().0 as u16, j as u16);
                        if l < n {
                            l
                        } else if l < 2 * n {
                            2 * e + (l - n)
                        } else {
                            4 * e + (l - 2 * n)
                        }
                    })
                    .collect();
                cols.push(x.relabel(&space, &map));
            }
        }
        let images: Vec<GraphChain> = cols.par_iter().map(|x| i_map(&space, x)).collect();
        let mut m = SparseMatrix::new(cell.dim(), images.len());
        for (c, img) in images.iter().enumerate() {
            for (k, v) in &img.terms {
                let r = *cell.index.get(k).ok_or_else(|| format!("I lands outside cell ({i},{j}): {k}"))?;
                m.add(r, c, v);
            }
        }
        let r = rank(&m);
        ensure(r == cell.dim(), || format!("cell ({i},{j}): rank {r}, dimension {}", cell.dim()))?;
        cells += 1;
    }
    Ok(format!("{cells} cells at full rank"))
}

fn c7_master() -> Outcome {
    for a in builtins() {
        let r = a.master_equation_residual().map_err(|e| e.to_string())?;
        ensure(r.is_zero(), || format!("{{h, h}} != 0 for {}", a.name))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let bad = perturbed_dual(&mut rng);
    let r = bad.master_equation_residual().map_err(|e| e.to_string())?;
    ensure(!r.is_zero(), || "perturbation satisfies the master equation".into())?;
    Ok(format!("3 built-ins zero, perturbation has {} residual terms", r.terms.len()))
}

fn per_builtin(
    basis: &GraphBasis,
    max_edges: usize,
    f: impl Fn(&CyclicAInfinity, &GraphBasis, usize) -> Result<Report, PartitionError>,
) -> Outcome {
    let (mut total, mut nontrivial) = (0, 0);
    for a in builtins() {
        let (c, n) = report(&a.name, f(&a, basis, max_edges))?;
        total += c;
        nontrivial += n;
    }
    Ok(format!("{total} identities over 3 built-ins, {nontrivial} with nonzero values"))
}

fn c11_direct_sums(basis: &GraphBasis) -> Outcome {
    let algs = builtins();
    let (mut total, mut nontrivial) = (0, 0);
    for (x, y) in [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2)] {
        let name = format!("{} + {}", algs[x].name, algs[y].name);
        let (c, n) = report(&name, verify_direct_sum(&algs[x], &algs[y], basis, 5))?;
        total += c;
        nontrivial += n;
    }
    ensure(nontrivial > 0, || "every pairing vanished".into())?;
    Ok(format!("{total} pairings over 5 sums, {nontrivial} nonzero"))
}

fn c12_homotopy(basis: &GraphBasis) -> Outcome {
    let (checked, changed) = report("ground", verify_homotopy(&CyclicAInfinity::ground(), basis, 6, 12, 5))?;
    ensure(changed == checked, || format!("only {changed} of {checked} conjugations changed Z"))?;
    let mut broken = CyclicAInfinity::ground();
    let h3 = broken.h.get_mut(&3).unwrap();
    h3.scale(&qi(2));
    let img = BoundaryImage::new(basis, 6);
    let z0 = PartitionFunction::new(&CyclicAInfinity::ground()).unwrap().chain(basis, 6);
    let z1 = PartitionFunction::new(&broken).unwrap().chain(basis, 6);
    ensure(img.certify(&z0, &z1).is_err(), || "rescaled algebra certified as homotopic".into())?;
    Ok(format!("{checked} conjugations certified, rescaled control rejected"))
}

fn c13_oracles(basis: &GraphBasis) -> Outcome {
    let mut edges = 0;
    for (k, _) in keys_upto(basis, 6) {
        let g = k.to_graph();
        for e in (0..g.edges.len()).filter(|&e| !g.is_loop(e)) {
            let s = common::contract_expand_sign(&g, e);
            ensure(s == Some(1), || format!("{k} edge {e}: roundtrip gives {s:?}"))?;
            edges += 1;
        }
    }
    let mut counts = Vec::new();
    for (i, j) in [(2, 3), (1, 2)] {
        let cell = basis.cell(i, j).unwrap();
        counts.push(common::compare_cell(&cell.keys, &cell.aut, i, j)?);
    }
    Ok(format!("{edges} roundtrips; classes (2,3) = {}, (1,2) = {}", counts[0], counts[1]))
}

fn c14_tcft() -> Outcome {
    let cs: Vec<Correlator> = builtins().iter().map(|a| Correlator::new(a).unwrap()).collect();
    let corpus: Vec<LeggedKey> = [(1, 1), (0, 1), (2, 1), (1, 2), (0, 2), (2, 2)]
        .iter()
        .flat_map(|&(m, n)| enumerate_legged(m, n, 2, 3, true))
        .filter(|k| cs.iter().any(|a| !a.correlation_key(k).is_zero()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let pick = |n_in: usize, rng: &mut ChaCha8Rng| {
        let c: Vec<&LeggedKey> = corpus.iter().filter(|k| k.n_in == n_in).collect();
        common::shuffle_legged(&c.choose(rng).unwrap().to_graph(), rng)
    };
    let (mut pairs, mut nonzero, mut triples, mut flipped) = (0, 0, 0, 0);
    for _ in 0..40 {
        let r1 = common::shuffle_legged(&corpus.choose(&mut rng).unwrap().to_graph(), &mut rng);
        let r2 = pick(r1.n_out(), &mut rng);
        let g = glue(&r1, &r2).map_err(|e| e.to_string())?;
        let sign = qi((g.canonical().tau() * r1.canonical().tau() * r2.canonical().tau()) as i64);
        for a in &cs {
            let mut rhs = a.compose(&a.correlation(&r1), &a.correlation(&r2), r1.n_out());
            rhs.scale(&sign);
            let lhs = a.correlation(&g);
            ensure(lhs == rhs, || format!("correlation of glue({r1}, {r2}) differs from the composition"))?;
            nonzero += usize::from(!lhs.is_zero());
        }
        pairs += 1;
        let r3 = pick(r2.n_out(), &mut rng);
        let left = glue(&g, &r3).map_err(|e| e.to_string())?;
        let right = glue(&r1, &glue(&r2, &r3).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let (cl, cr) = (left.canonical(), right.canonical());
        ensure(cl.key == cr.key && cl.state_sign() == cr.state_sign(), || format!("gluing not associative on {r1}, {r2}, {r3}"))?;
        let eps = qi((cl.sign * cr.sign) as i64);
        for a in &cs {
            ensure(a.state_sum(&left) == a.state_sum(&right), || format!("state sums differ on {r1}, {r2}, {r3}"))?;
            let mut rhs = a.correlation(&right);
            rhs.scale(&eps);
            ensure(a.correlation(&left) == rhs, || format!("correlations differ on {r1}, {r2}, {r3}"))?;
        }
        flipped += usize::from(cl.sign != cr.sign);
        triples += 1;
    }
    ensure(nonzero >= 20, || format!("only {nonzero} nonzero compositions"))?;
    Ok(format!("{pairs} pairs ({nonzero} nonzero correlations), {triples} triples ({flipped} with opposite edge orders)"))
}

fn main() {
    let start = Instant::now();
    let basis = GraphBasis::enumerate(7);
    let small = GraphBasis::enumerate(6);
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("differentials square to zero (edges <= 7)", Box::new(|| c1_differentials(&basis))),
        ("boundary and coboundary are adjoint (edges <= 7)", Box::new(|| c2_adjointness(&basis))),
        ("pairings intertwine d with delta and match I (200 chains, edges <= 6)", Box::new(|| c3_chain_compatibility(&basis))),
        ("coinvariance under linear vector fields", Box::new(|| c4_osp(&small))),
        ("I is multiplicative; coproduct coassociative and cocommutative", Box::new(|| c5_hopf(&small))),
        ("I has full rank on cells with edges <= 5", Box::new(|| c6_rank(&small))),
        ("master equation and negative control", Box::new(c7_master)),
        ("cycle condition Z(delta G) = 0 (edges <= 7)", Box::new(|| per_builtin(&basis, 7, verify_cycle))),
        ("exp of connected part (edges <= 6)", Box::new(|| per_builtin(&small, 6, verify_exp))),
        ("F(c_A) = |Aut| Z (edges <= 6)", Box::new(|| per_builtin(&small, 6, verify_equivalence))),
        ("direct sums (edges <= 5)", Box::new(|| c11_direct_sums(&small))),
        ("homotopy invariance, 5 conjugations (edges <= 6)", Box::new(|| c12_homotopy(&basis))),
        ("roundtrip and enumeration oracles", Box::new(|| c13_oracles(&small))),
        ("TCFT composition and associativity", Box::new(c14_tcft)),
        ("odd-vertex vanishing (edges <= 7)", Box::new(|| per_builtin(&basis, 7, verify_odd_vertices))),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = run();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", n + 1),
            Err(witness) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {witness} [{secs:.1}s]", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
