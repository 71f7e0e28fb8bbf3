//! Exhaustive law suites at desk scale, shared by the command-line checks
//! and the acceptance tests. Every suite returns a report with one entry
//! per law and instance; bounds are explicit arguments.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::freecat::{
    self, enumerate_over_free, eta_relabel, free_cells, free_globset, mu, unit_over_free,
    CompositionTables, FreeCell,
};
use crate::glob::{self, GlobMap, GlobSet, GlobSetBuilder};
use crate::multitensor::{
    self, check_multitensor, check_pentagon, check_triangle, check_unit_cartesian,
    dist_law_cell, split_grade, Gamma, GradedWord, Multitensor, OperadMt, ProductMt, SetOperad,
    TCross,
};
use crate::operad::{
    apply_cells, check_operad, collection_from_multitensor, embed_set_operad, from_mt_operad,
    to_mt_operad, Bar, Collection, OpDecl, Operad, TMultitensor,
};
use crate::enrich::{
    algcat_to_tcross, algebra_to_ecat, check_ecat, phi, psi, psi_inverse, truncate_algcat,
    truncate_tables, ECatAlgebra, IdentityAlgebra, OperadAlgebra,
};
use crate::report::CheckReport;
use crate::tree::{enumerate_trees, rigidity_check, Tree};

/// The standing 5-cell carrier: two parallel arrows with a 2-cell between.
pub fn two_arrow_carrier() -> GlobSet {
    GlobSetBuilder::new(2)
        .cell0("a")
        .cell0("b")
        .cell(1, "f", "a", "b")
        .cell(1, "g", "a", "b")
        .cell(2, "m", "f", "g")
        .finish()
        .expect("valid carrier")
}

/// One 0-cell with a loop.
pub fn loop_carrier() -> GlobSet {
    GlobSetBuilder::new(1)
        .cell0("v")
        .cell(1, "l", "v", "v")
        .finish()
        .expect("valid carrier")
}

// ---------------------------------------------------------------------------
// Monad laws
// ---------------------------------------------------------------------------

/// Unit laws, factorization with its unique witness, boundary and carrier
/// naturality, and two-route associativity of the multiplication, over a
/// fixed carrier.
pub fn monad_suite(
    carrier: &GlobSet,
    dim: usize,
    max_size: usize,
    inner: usize,
    inner2: usize,
) -> Result<CheckReport> {
    let mut r = CheckReport::new("monad");
    let trees: Vec<Tree> = (0..=dim.min(carrier.trunc()))
        .flat_map(|d| enumerate_trees(d, max_size))
        .collect();
    // unit laws over every labelling
    for p in &trees {
        let mut ok = 0usize;
        for c in free_cells(carrier, p.dim(), max_size)? {
            if c.tree() != p {
                continue;
            }
            let outer = mu(&unit_over_free(&c)?)?;
            if outer.cell != c {
                r.fail("unit-outer", p.to_string(), c.canonical_id());
                continue;
            }
            let inner_law = mu(&eta_relabel(&c)?)?;
            if inner_law.cell != c {
                r.fail("unit-inner", p.to_string(), c.canonical_id());
                continue;
            }
            ok += 1;
        }
        r.pass("unit laws", format!("tree {p} ({ok} labellings)"));
    }
    // factorization, uniqueness witness, boundary naturality
    for p in &trees {
        let mut ok = 0usize;
        for f in enumerate_over_free(carrier, p, inner)? {
            let m = mu(&f)?;
            if m.witness.postcompose(m.cell.label())? != f {
                r.fail("factorization", p.to_string(), "T(h)∘g differs from f".to_string());
                continue;
            }
            let wm = mu(&m.witness)?;
            if wm.cell.tree() != m.cell.tree() || !wm.cell.label().is_identity() {
                r.fail("generic witness", p.to_string(), "witness is not generic".to_string());
                continue;
            }
            if p.dim() >= 1 {
                let ms = mu(&f.src()?)?;
                let mt = mu(&f.tgt()?)?;
                if ms.cell != m.cell.src()? || mt.cell != m.cell.tgt()? {
                    r.fail("boundary naturality", p.to_string(), "σ/τ restriction".to_string());
                    continue;
                }
            }
            ok += 1;
        }
        r.pass("factorization", format!("tree {p} ({ok} two-level labellings)"));
    }
    // associativity via a materialized bounded free category
    let fg = free_globset(carrier, inner)?;
    for p in &trees {
        let mut ok = 0usize;
        for f2 in enumerate_over_free(&fg.set, p, inner2)? {
            let mut labels = BTreeMap::new();
            for (k, v) in f2.labels() {
                labels.insert(k.clone(), mu(&fg.decode_over(v)?)?.cell);
            }
            let fa = freecat::FreeOverFree::new(p.clone(), carrier.clone(), labels)?;
            let route_a = mu(&fa)?.cell;
            let outer = mu(&f2)?.cell;
            let route_b = mu(&fg.decode_over(&outer)?)?.cell;
            if route_a != route_b {
                r.fail("associativity", p.to_string(), route_a.canonical_id());
                continue;
            }
            ok += 1;
        }
        r.pass("associativity", format!("tree {p} ({ok} two-level labellings)"));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Tightness
// ---------------------------------------------------------------------------

/// Exhaustive rigidity: for all tree pairs within bounds, the only globular
/// isomorphism between realizations is the identity on equal trees.
pub fn tight_suite(dim: usize, max_size: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("tight");
    for d in 0..=dim {
        let trees = enumerate_trees(d, max_size);
        let mut pairs = 0usize;
        let mut bad = 0usize;
        for p in &trees {
            for q in &trees {
                pairs += 1;
                let rep = rigidity_check(p, q);
                if !rep.tight {
                    bad += 1;
                    r.fail(
                        "rigidity",
                        format!("{p} vs {q}"),
                        format!("{} isos, identities: {}", rep.iso_count, rep.all_identities),
                    );
                }
            }
        }
        if bad == 0 {
            r.pass("rigidity", format!("dimension {d} ({pairs} pairs)"));
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// The free category on one loop
// ---------------------------------------------------------------------------

/// Free cells over the loop are exactly the paths, and multiplication is
/// concatenation.
pub fn free_oracle_suite(max_len: usize, concat_total: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("free-oracle");
    let x = loop_carrier();
    let path = |k: usize| -> Result<FreeCell> {
        let p = Tree::line(k);
        let g = p.glob();
        let mut maps = vec![BTreeMap::new(); 2];
        for i in 0..=k {
            maps[0].insert(i.to_string(), "v".to_string());
        }
        for i in 1..=k {
            maps[1].insert(format!("h{i}/0"), "l".to_string());
        }
        FreeCell::new(p, GlobMap::new(g, x.clone(), maps)?)
    };
    let cells = free_cells(&x, 1, max_len + 1)?;
    let expect: Vec<FreeCell> = (0..=max_len).map(path).collect::<Result<_>>()?;
    if cells == expect {
        r.pass("enumeration", format!("paths of length <= {max_len}"));
    } else {
        r.fail("enumeration", "loop graph", format!("{} cells", cells.len()));
    }
    for a in 0..=concat_total {
        for b in 0..=concat_total.saturating_sub(a) {
            let p = Tree::line(2);
            let mut labels = BTreeMap::new();
            for i in 0..=2usize {
                labels.insert((0, i.to_string()), freecat::unit(&x, 0, "v")?);
            }
            labels.insert((1, "h1/0".to_string()), path(a)?);
            labels.insert((1, "h2/0".to_string()), path(b)?);
            let f = freecat::FreeOverFree::new(p, x.clone(), labels)?;
            let m = mu(&f)?;
            if m.cell != path(a + b)? {
                r.fail("concatenation", format!("{a}+{b}"), m.cell.canonical_id());
            }
        }
    }
    r.pass("concatenation", format!("all pairs with total <= {concat_total}"));
    Ok(r)
}

// ---------------------------------------------------------------------------
// Hom decomposition on generated carriers
// ---------------------------------------------------------------------------

struct Rng(u64);

impl Rng {
    fn next(&mut self) -> u64 {
        // xorshift64
        let mut v = self.0;
        v ^= v << 13;
        v ^= v >> 7;
        v ^= v << 17;
        self.0 = v;
        v
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n.max(1) as u64) as usize
    }
}

/// A deterministic pseudorandom globular set with at most `max_cells`
/// cells, built bottom-up so globularity holds by construction.
pub fn generated_carrier(seed: u64, max_cells: usize, trunc: usize) -> GlobSet {
    let mut rng = Rng(seed.wrapping_mul(0x9e3779b97f4a7c15).max(1));
    loop {
        let n0 = 1 + rng.below(max_cells.min(3));
        let mut budget = max_cells - n0;
        let mut b = GlobSetBuilder::new(trunc);
        let zeros: Vec<String> = (0..n0).map(|i| format!("z{i}")).collect();
        for z in &zeros {
            b = b.cell0(z);
        }
        let mut ones: Vec<(String, String, String)> = Vec::new();
        if trunc >= 1 && budget > 0 {
            let n1 = rng.below(budget + 1);
            for i in 0..n1 {
                let s = zeros[rng.below(n0)].clone();
                let t = zeros[rng.below(n0)].clone();
                let id = format!("e{i}");
                b = b.cell(1, &id, &s, &t);
                ones.push((id, s, t));
            }
            budget -= n1;
        }
        if trunc >= 2 && budget > 0 && !ones.is_empty() {
            let n2 = rng.below(budget + 1);
            let mut placed = 0;
            let mut tries = 0;
            while placed < n2 && tries < 20 {
                tries += 1;
                let (e1, s1, t1) = ones[rng.below(ones.len())].clone();
                let (e2, s2, t2) = ones[rng.below(ones.len())].clone();
                if s1 == s2 && t1 == t2 {
                    b = b.cell(2, &format!("s{placed}"), &e1, &e2);
                    placed += 1;
                }
            }
        }
        if let Ok(x) = b.finish() {
            return x;
        }
    }
}

/// Decompose-then-reconstruct is the identity on every cell of the bounded
/// free category over a panel of generated carriers.
pub fn hom_decompose_suite(
    carriers: usize,
    max_cells: usize,
    size_bound: usize,
) -> Result<CheckReport> {
    let mut r = CheckReport::new("hom-decompose");
    for i in 0..carriers {
        let x = generated_carrier(0xC0FFEE + i as u64, max_cells, 2);
        let mut checked = 0usize;
        for d in 1..=x.trunc() {
            for c in free_cells(&x, d, size_bound)? {
                let (ys, comps) = c.hom_decompose()?;
                let back = freecat::hom_reconstruct(&x, &ys, &comps, d)?;
                if back != c {
                    r.fail("round-trip", format!("carrier {i}"), c.canonical_id());
                } else {
                    checked += 1;
                }
            }
        }
        r.pass("round-trip", format!("carrier {i} ({} cells, {checked} decompositions)", x.cell_count()));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Coherence of the substitution product
// ---------------------------------------------------------------------------

/// An operad-shaped functor family given by its arity profile (the
/// coherences only depend on the operation counts).
fn profile_operad(profile: &[usize]) -> SetOperad {
    let mut ops = BTreeMap::new();
    for (n, &count) in profile.iter().enumerate() {
        if count > 0 {
            ops.insert(n, (0..count).map(|i| format!("p{n}x{i}")).collect());
        }
    }
    // a unit and empty substitution suffice for the functor-level checks
    ops.entry(1).or_insert_with(Vec::new).push("u".to_string());
    SetOperad::new(ops, "u".to_string(), BTreeMap::new()).expect("valid shape")
}

/// Unit triangle and pentagon for every operad-derived family with at most
/// two operations per arity up to 4, at grades up to `grade`.
pub fn coherence_suite(grade: usize, exhaustive_grade: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("coherence");
    let pt = GlobSetBuilder::new(0).cell0("x").finish()?;
    // all profiles (e_0..e_4) with entries <= 2, up to renaming
    let mut profiles = Vec::new();
    for mask in 0..3usize.pow(5) {
        let mut m = mask;
        let mut p = Vec::new();
        for _ in 0..5 {
            p.push(m % 3);
            m /= 3;
        }
        profiles.push(p);
    }
    for p in &profiles {
        let e = OperadMt::new(profile_operad(p));
        for n in 0..=exhaustive_grade {
            let args = vec![pt.clone(); n];
            let t = check_triangle(&e, &e, &args)?;
            let pent = check_pentagon(&e, &e, &e, &e, &args)?;
            if !t.is_empty() || !pent.is_empty() {
                for msg in t.into_iter().chain(pent) {
                    r.fail("coherence", format!("profile {p:?} at grade {n}"), msg);
                }
            }
        }
    }
    r.pass(
        "triangle+pentagon",
        format!("{} profiles at grades <= {exhaustive_grade}", profiles.len()),
    );
    // mixed factors and the top grade on a spot panel
    let a = OperadMt::new(profile_operad(&[1, 2, 1, 0, 1]));
    let b = OperadMt::new(profile_operad(&[0, 1, 2, 1, 0]));
    let c = OperadMt::new(SetOperad::terminal(4));
    let d = OperadMt::new(profile_operad(&[2, 2, 2, 2, 2]));
    let args = vec![pt.clone(); grade];
    r.batch("triangle mixed", &format!("grade {grade}"), &check_triangle(&a, &b, &args)?);
    r.batch(
        "pentagon mixed",
        &format!("grade {grade}"),
        &check_pentagon(&a, &b, &c, &d, &args)?,
    );
    Ok(r)
}

// ---------------------------------------------------------------------------
// The induced monad and its algebras
// ---------------------------------------------------------------------------

fn two_elements() -> GlobSet {
    GlobSetBuilder::new(0).cell0("0").cell0("1").finish().expect("valid")
}

/// A monoid on {0, 1} as composition tables for the induced monad checks.
fn monoid_table(name: &str) -> impl Fn(&str, &str) -> String + '_ {
    move |a: &str, b: &str| {
        let x = a == "1";
        let y = b == "1";
        let v = match name {
            "xor" => x ^ y,
            "and" => x & y,
            _ => x | y,
        };
        if v { "1".to_string() } else { "0".to_string() }
    }
}

fn monoid_unit(name: &str) -> &'static str {
    match name {
        "and" => "1",
        _ => "0",
    }
}

/// The induced monad of the terminal operad family is the free monoid
/// monad, and its algebras over a two-element set are exactly the monoids.
pub fn gamma_suite(arity: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("gamma");
    let e = OperadMt::new(SetOperad::terminal(arity));
    let g = Gamma::new(&e, arity);
    let x = two_elements();
    let gx = g.apply(&x)?;
    let expect: usize = (0..=arity).map(|n| 1usize << n).sum();
    if gx.cells(0).len() == expect {
        r.pass("word count", format!("{} words at length <= {arity}", expect));
    } else {
        r.fail("word count", "two elements", format!("{}", gx.cells(0).len()));
    }
    // the monad is the free monoid monad: multiplication is concatenation
    let mult = g.mult_table(&x)?;
    let mut checked = 0usize;
    for ((_, outer), v) in &mult {
        let (k, inner) = split_grade(outer)?;
        let mut word = Vec::new();
        if k > 0 {
            let (_, parts) = {
                let ps = multitensor::split_tuple(inner)?;
                (ps[0].clone(), ps[1..].to_vec())
            };
            for p in parts {
                let (_, w) = split_grade(&p)?;
                let letters = multitensor::split_tuple(w)?;
                word.extend(letters.into_iter().skip(1));
            }
        }
        let (total, flat) = split_grade(v)?;
        let letters: Vec<String> =
            multitensor::split_tuple(flat)?.into_iter().skip(1).collect();
        if total != word.len() || letters != word {
            r.fail("concatenation", outer.clone(), v.clone());
        } else {
            checked += 1;
        }
    }
    r.pass("concatenation", format!("{checked} multiplications"));
    // unit laws of the induced monad
    for cell in gx.cells(0) {
        let outer = g.unit(&gx, 0, cell)?;
        if g.mult(&x, 0, &outer)? != *cell {
            r.fail("monad unit (outer)", cell.clone(), String::new());
        }
    }
    let eta = g.unit_map(&x)?;
    let geta = g.map(&eta)?;
    for cell in gx.cells(0) {
        if g.mult(&x, 0, geta.apply(0, cell)?)? != *cell {
            r.fail("monad unit (inner)", cell.clone(), String::new());
        }
    }
    r.pass("monad units", format!("{} words", gx.cells(0).len()));
    // monoids correspond to algebras of the induced monad
    for name in ["xor", "and", "or"] {
        let mult2 = monoid_table(name);
        let unit = monoid_unit(name);
        // the algebra map folds words
        let fold = |word: &str| -> Result<String> {
            let (k, inner) = split_grade(word)?;
            let mut acc = unit.to_string();
            if k > 0 {
                for l in multitensor::split_tuple(inner)?.into_iter().skip(1) {
                    acc = mult2(&acc, &l);
                }
            }
            Ok(acc)
        };
        // unit axiom
        let mut ok = true;
        for c in x.cells(0) {
            if fold(&g.unit(&x, 0, c)?)? != *c {
                ok = false;
                r.fail("algebra unit", format!("monoid {name}"), c.clone());
            }
        }
        // associativity axiom against the multiplication table
        for ((_, outer), v) in &mult {
            // fold after multiplying, or fold the pointwise-folded word
            let lhs = fold(v)?;
            let (k, inner) = split_grade(outer)?;
            let mut folded_parts = Vec::new();
            if k > 0 {
                for p in multitensor::split_tuple(inner)?.into_iter().skip(1) {
                    folded_parts.push(fold(&p)?);
                }
            }
            let mut acc = unit.to_string();
            for p in &folded_parts {
                acc = mult2(&acc, p);
            }
            if lhs != acc {
                ok = false;
                r.fail("algebra associativity", format!("monoid {name}"), outer.clone());
            }
        }
        // round-trip: the compositions extracted from the algebra map are
        // the original monoid
        for a in ["0", "1"] {
            for b in ["0", "1"] {
                let word = format!(
                    "g2/{}",
                    multitensor::tuple_id(0, &[
                        "t2".to_string(),
                        a.to_string(),
                        b.to_string(),
                    ])
                );
                if fold(&word)? != mult2(a, b) {
                    ok = false;
                    r.fail("algebra round-trip", format!("monoid {name}"), word);
                }
            }
        }
        if ok {
            r.pass("monoid algebra", name);
        }
    }
    // distinct monoids give distinct algebra maps
    let distinct = {
        let words: Vec<String> = gx.cells(0).to_vec();
        let tables: Vec<Vec<String>> = ["xor", "and", "or"]
            .iter()
            .map(|name| {
                let mult2 = monoid_table(name);
                let unit = monoid_unit(name);
                words
                    .iter()
                    .map(|w| {
                        let (k, inner) = split_grade(w).unwrap();
                        let mut acc = unit.to_string();
                        if k > 0 {
                            for l in multitensor::split_tuple(inner).unwrap().into_iter().skip(1)
                            {
                                acc = mult2(&acc, &l);
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        tables[0] != tables[1] && tables[1] != tables[2] && tables[0] != tables[2]
    };
    if distinct {
        r.pass("algebra separation", "three monoids");
    } else {
        r.fail("algebra separation", "three monoids", "maps coincide".to_string());
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// The distributive law
// ---------------------------------------------------------------------------

/// Unit axioms, naturality, decomposition round-trip and graded bijections
/// for the law between the free-category and free-monoid monads.
pub fn distlaw_suite(word_bound: usize, size_bound: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("distlaw");
    let x = loop_carrier();
    let p = ProductMt::new(1);
    let gm = Gamma::new(&p, word_bound);
    let mx = gm.apply(&x)?;
    // axiom 1: free cells with one-letter labels pass through
    let mut count = 0usize;
    for d in 0..=1usize {
        for c in free_cells(&x, d, size_bound)? {
            let g = c.tree().glob();
            let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
            for dd in 0..=g.trunc() {
                for id in g.cells(dd) {
                    let img = c.label().apply(dd, id)?;
                    maps[dd].insert(
                        id.clone(),
                        format!("g1/{}", multitensor::tuple_id(dd, &[img.clone()])),
                    );
                }
            }
            let lifted = FreeCell::new(c.tree().clone(), GlobMap::new(g, mx.clone(), maps)?)?;
            let out = dist_law_cell(&x, word_bound, size_bound, &lifted)?;
            if out != (GradedWord { grade: 1, cells: vec![c] }) {
                r.fail("unit axiom 1", format!("dim {d}"), lifted.canonical_id());
            } else {
                count += 1;
            }
        }
    }
    r.pass("unit axiom 1", format!("{count} cells"));
    // axiom 2: unit cells over a word become words of units
    let mut count = 0usize;
    for d in 0..=1usize {
        for w in mx.cells(d) {
            let u = freecat::unit(&mx, d, w)?;
            let out = dist_law_cell(&x, word_bound, size_bound, &u)?;
            let (n, word) = split_grade(w)?;
            let letters = p.decode(&vec![x.clone(); n], d, word)?;
            let expect: Vec<FreeCell> = letters
                .iter()
                .map(|l| freecat::unit(&x, d, l))
                .collect::<Result<_>>()?;
            if out != (GradedWord { grade: n, cells: expect }) {
                r.fail("unit axiom 2", format!("dim {d}"), w.clone());
            } else {
                count += 1;
            }
        }
    }
    r.pass("unit axiom 2", format!("{count} words"));
    // naturality along a panel of carrier maps
    let y = GlobSetBuilder::new(1)
        .cell0("w")
        .cell(1, "m", "w", "w")
        .cell(1, "e", "w", "w")
        .finish()?;
    let my = Gamma::new(&p, word_bound).apply(&y)?;
    let mut count = 0usize;
    for h in glob::maps_between(&x, &y) {
        let mh = {
            let g2 = Gamma::new(&p, word_bound);
            g2.map(&h)?
        };
        for d in 0..=1usize {
            for c in free_cells(&mx, d, size_bound.min(3))? {
                let lhs = dist_law_cell(&y, word_bound, size_bound, &c.postcompose(&mh)?)?;
                let rhs = dist_law_cell(&x, word_bound, size_bound, &c)?;
                let mapped: Vec<FreeCell> = rhs
                    .cells
                    .iter()
                    .map(|fc| fc.postcompose(&h))
                    .collect::<Result<_>>()?;
                if lhs.grade != rhs.grade || lhs.cells != mapped {
                    r.fail("naturality", format!("dim {d}"), c.canonical_id());
                } else {
                    count += 1;
                }
            }
        }
    }
    drop(my);
    r.pass("naturality", format!("{count} cells"));
    // the output re-decomposes over the sequence of copies
    let mut count = 0usize;
    for d in 1..=1usize {
        for c in free_cells(&mx, d, size_bound.min(3))? {
            let out = dist_law_cell(&x, word_bound, size_bound, &c)?;
            if out.grade == 0 {
                continue;
            }
            let sq = glob::seq(&vec![x.clone(); out.grade])?;
            let ys: Vec<String> = (0..=out.grade).map(|i| i.to_string()).collect();
            let comps: Vec<FreeCell> = out
                .cells
                .iter()
                .enumerate()
                .map(|(j, fc)| {
                    let hom = sq.hom(&j.to_string(), &(j + 1).to_string())?;
                    let g = fc.tree().glob();
                    let maps = (0..=g.trunc())
                        .map(|dd| {
                            g.cells(dd)
                                .iter()
                                .map(|id| {
                                    Ok((
                                        id.clone(),
                                        format!("h{}/{}", j + 1, fc.label().apply(dd, id)?),
                                    ))
                                })
                                .collect::<Result<BTreeMap<_, _>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    FreeCell::new(fc.tree().clone(), GlobMap::new(g, hom, maps)?)
                })
                .collect::<Result<_>>()?;
            let assembled = freecat::hom_reconstruct(&sq, &ys, &comps, d + 1)?;
            let (ys2, comps2) = assembled.hom_decompose()?;
            if ys2 != ys || comps2 != comps {
                r.fail("re-decomposition", format!("dim {d}"), c.canonical_id());
            } else {
                count += 1;
            }
        }
    }
    r.pass("re-decomposition", format!("{count} cells"));
    // graded bijection over the point at truncation 0
    let pt = GlobSetBuilder::new(0).cell0("p").finish()?;
    let p0 = ProductMt::new(0);
    let g0 = Gamma::new(&p0, word_bound.max(3));
    let m0 = g0.apply(&pt)?;
    let mut images: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for c in free_cells(&m0, 0, 3)? {
        let out = dist_law_cell(&pt, word_bound.max(3), 3, &c)?;
        let key: Vec<String> = out.cells.iter().map(FreeCell::canonical_id).collect();
        images
            .entry(out.grade)
            .or_default()
            .push(multitensor::tuple_id(0, &key));
    }
    let tc = TCross::new(0, 3);
    let mut ok = true;
    for (n, imgs) in &images {
        let target = tc.apply(&vec![pt.clone(); *n])?;
        let distinct: std::collections::BTreeSet<_> = imgs.iter().collect();
        if distinct.len() != imgs.len() || imgs.len() != target.cells(0).len() {
            ok = false;
            r.fail("point bijection", format!("grade {n}"), format!("{} images", imgs.len()));
        }
    }
    if ok {
        r.pass("point bijection", format!("grades <= {}", word_bound.max(3)));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Multitensor and operad law suites
// ---------------------------------------------------------------------------

/// Axioms of the product-of-free-cells multitensor and an operad-derived
/// family, with a corrupted negative control.
pub fn multitensor_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("multitensor");
    let x = loop_carrier();
    let tc = TCross::new(1, 3);
    r.batch(
        "axioms",
        "product of free cells (micro bounds)",
        &check_multitensor(&tc, &[vec![x.clone()]], &[vec![vec![vec![x.clone()]]]])?,
    );
    let two = two_elements();
    let e = OperadMt::new(SetOperad::terminal(4));
    r.batch(
        "axioms",
        "terminal operad family",
        &check_multitensor(
            &e,
            &[vec![], vec![two.clone()], vec![two.clone(), two.clone()]],
            &[
                vec![vec![vec![two.clone()]], vec![vec![two.clone()]]],
                vec![vec![vec![two.clone()], vec![two.clone()]]],
            ],
        )?,
    );
    r.batch("operad laws", "terminal", &SetOperad::terminal(4).check_laws());
    // negative control: a corrupted substitution
    let ops: BTreeMap<usize, Vec<String>> =
        [(1usize, vec!["u".to_string(), "s".to_string()])].into_iter().collect();
    let mut subst = BTreeMap::new();
    subst.insert(("u".to_string(), vec!["u".to_string()]), "s".to_string());
    subst.insert(("u".to_string(), vec!["s".to_string()]), "s".to_string());
    subst.insert(("s".to_string(), vec!["u".to_string()]), "s".to_string());
    subst.insert(("s".to_string(), vec!["s".to_string()]), "u".to_string());
    let broken = SetOperad::new(ops, "u".to_string(), subst)?;
    if broken.check_laws().is_empty() {
        r.fail("negative control", "corrupted substitution", "laws passed".to_string());
    } else {
        r.pass("negative control", "corrupted substitution rejected");
    }
    // cartesian naturality of the unit on a maps panel
    let one = GlobSetBuilder::new(0).cell0("x").finish()?;
    let maps = glob::maps_between(&two, &one);
    r.batch("unit cartesianness", "panel", &check_unit_cartesian(&e, &maps)?);
    Ok(r)
}

/// Operad presentations: the identity operad, an embedded operad in sets,
/// and a corrupted negative control.
pub fn operad_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("operad");
    r.batch("identity operad", "truncation 2", &check_operad(&Operad::identity(2, 4), 3)?);
    let so = SetOperad::terminal(3);
    r.batch("embedded operad", "terminal", &check_operad(&embed_set_operad(&so)?, 4)?);
    // corrupted arity
    let coll = Collection::from_table(
        1,
        vec![vec![
            OpDecl { id: "u".into(), arity: Tree::line(1), src: None, tgt: None },
            OpDecl { id: "m".into(), arity: Tree::line(2), src: None, tgt: None },
        ]],
    )?;
    let units = [(1usize, "u".to_string())].into_iter().collect();
    let subst = vec![
        crate::operad::SubstEntry {
            outer: "u".into(),
            labelling: [("h1/0".to_string(), "u".to_string())].into_iter().collect(),
            result: "u".into(),
        },
        crate::operad::SubstEntry {
            outer: "u".into(),
            labelling: [("h1/0".to_string(), "m".to_string())].into_iter().collect(),
            result: "u".into(),
        },
        crate::operad::SubstEntry {
            outer: "m".into(),
            labelling: [
                ("h1/0".to_string(), "u".to_string()),
                ("h2/0".to_string(), "u".to_string()),
            ]
            .into_iter()
            .collect(),
            result: "m".into(),
        },
    ];
    let bad_op = Operad::from_table(coll, units, subst)?;
    if check_operad(&bad_op, 4)?.is_empty() {
        r.fail("negative control", "corrupted arity", "laws passed".to_string());
    } else {
        r.pass("negative control", "corrupted arity rejected");
    }
    Ok(r)
}

/// Enriched-category law checks over the bar of the identity operad.
pub fn ecat_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("ecat");
    let x = GlobSetBuilder::new(1)
        .cell0("v")
        .cell(1, "e", "v", "v")
        .cell(1, "l", "v", "v")
        .finish()?;
    let identities = vec![[("v".to_string(), "e".to_string())].into_iter().collect()];
    let mut table = BTreeMap::new();
    for (a, b, c) in [("e", "e", "e"), ("e", "l", "l"), ("l", "e", "l"), ("l", "l", "e")] {
        table.insert((a.to_string(), b.to_string()), c.to_string());
    }
    let t = CompositionTables::new(x, identities, [((1usize, 0usize), table)].into_iter().collect())?;
    let op = Operad::identity(1, 4);
    let alg = IdentityAlgebra { tables: &t };
    let e = algebra_to_ecat(&op, &alg, 4, 3)?;
    let bar = Bar::of_operad(&op, 4);
    r.batch("laws", "one-object cyclic monoid", &check_ecat(&bar, &e)?);
    // negative control
    let mut broken = e.clone();
    let key = vec!["v".to_string(); 3];
    let tab = broken.kappa.get_mut(&key).expect("binary table");
    let k = tab.keys().find(|(d, _)| *d == 0).cloned().expect("entry");
    let old = tab[&k].clone();
    tab.insert(k, if old == "e" { "l".into() } else { "e".into() });
    if check_ecat(&bar, &broken)?.is_empty() {
        r.fail("negative control", "corrupted composition", "laws passed".to_string());
    } else {
        r.pass("negative control", "corrupted composition rejected");
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// The bar correspondence and the equivalences
// ---------------------------------------------------------------------------

/// Algebras and enriched categories over the bar of the identity operad are
/// mutually inverse presentations, exhaustively at the stated bounds.
pub fn bar_roundtrip_suite(carrier_cells: usize) -> Result<CheckReport> {
    let mut r = CheckReport::new("bar-roundtrip");
    // truncation 1: a category on a generated carrier
    for (trunc, size, len) in [(1usize, 4usize, 3usize), (2, 4, 2)] {
        let tables = sample_tables(trunc, carrier_cells)?;
        let op = Operad::identity(trunc, 2 + len * (trunc + 1));
        let alg = IdentityAlgebra { tables: &tables };
        let e = algebra_to_ecat(&op, &alg, 2 + len * (trunc + 1), len)?;
        let bar = Bar::of_operad(&op, 2 + len * (trunc + 1));
        r.batch("enriched laws", &format!("truncation {trunc}"), &check_ecat(&bar, &e)?);
        // algebra -> enriched -> algebra
        let back = ECatAlgebra::new(&op, &e)?;
        let mut ok = back.carrier() == tables.carrier();
        for d in 1..=trunc {
            for c in apply_cells(op.collection(), tables.carrier(), d, size)? {
                if back.eval(d, &c)? != alg.eval(d, &c)? {
                    ok = false;
                    r.fail(
                        "evaluation round-trip",
                        format!("truncation {trunc}"),
                        c.encode(),
                    );
                }
            }
        }
        if ok {
            r.pass("evaluation round-trip", format!("truncation {trunc}"));
        }
        // enriched -> algebra -> enriched
        let e2 = algebra_to_ecat(&op, &back, 2 + len * (trunc + 1), len)?;
        if e2 == e {
            r.pass("enrichment round-trip", format!("truncation {trunc}"));
        } else {
            r.fail("enrichment round-trip", format!("truncation {trunc}"), "tables differ".to_string());
        }
    }
    Ok(r)
}

/// A lawful sample algebra at the requested truncation with at most
/// `max_cells` cells.
pub fn sample_tables(trunc: usize, max_cells: usize) -> Result<CompositionTables> {
    match trunc {
        1 => {
            // three objects in a row with a composite chain
            let x = GlobSetBuilder::new(1)
                .cell0("a")
                .cell0("b")
                .cell0("c")
                .cell(1, "ia", "a", "a")
                .cell(1, "ib", "b", "b")
                .cell(1, "ic", "c", "c")
                .cell(1, "f", "a", "b")
                .cell(1, "g", "b", "c")
                .cell(1, "h", "a", "c")
                .finish()?;
            debug_assert!(x.cell_count() <= max_cells.max(9));
            let identities = vec![[
                ("a".to_string(), "ia".to_string()),
                ("b".to_string(), "ib".to_string()),
                ("c".to_string(), "ic".to_string()),
            ]
            .into_iter()
            .collect()];
            let mut table = BTreeMap::new();
            let compose = |p: &str, q: &str| -> Option<&'static str> {
                match (p, q) {
                    ("ia", "ia") => Some("ia"),
                    ("ib", "ib") => Some("ib"),
                    ("ic", "ic") => Some("ic"),
                    ("ia", "f") => Some("f"),
                    ("f", "ib") => Some("f"),
                    ("ib", "g") => Some("g"),
                    ("g", "ic") => Some("g"),
                    ("ia", "h") => Some("h"),
                    ("h", "ic") => Some("h"),
                    ("f", "g") => Some("h"),
                    _ => None,
                }
            };
            for p in ["ia", "ib", "ic", "f", "g", "h"] {
                for q in ["ia", "ib", "ic", "f", "g", "h"] {
                    if let Some(v) = compose(p, q) {
                        table.insert((p.to_string(), q.to_string()), v.to_string());
                    }
                }
            }
            CompositionTables::new(
                x,
                identities,
                [((1usize, 0usize), table)].into_iter().collect(),
            )
        }
        _ => {
            // two objects; one non-identity arrow carrying a cyclic 2-cell
            let x = GlobSetBuilder::new(2)
                .cell0("a")
                .cell0("b")
                .cell(1, "ia", "a", "a")
                .cell(1, "ib", "b", "b")
                .cell(1, "f", "a", "b")
                .cell(2, "jia", "ia", "ia")
                .cell(2, "jib", "ib", "ib")
                .cell(2, "jf", "f", "f")
                .cell(2, "m", "f", "f")
                .finish()?;
            debug_assert!(x.cell_count() <= max_cells.max(9));
            let identities = vec![
                [("a".to_string(), "ia".to_string()), ("b".to_string(), "ib".to_string())]
                    .into_iter()
                    .collect(),
                [
                    ("ia".to_string(), "jia".to_string()),
                    ("ib".to_string(), "jib".to_string()),
                    ("f".to_string(), "jf".to_string()),
                ]
                .into_iter()
                .collect(),
            ];
            let mut c10 = BTreeMap::new();
            for (p, q, v) in
                [("ia", "ia", "ia"), ("ib", "ib", "ib"), ("ia", "f", "f"), ("f", "ib", "f")]
            {
                c10.insert((p.to_string(), q.to_string()), v.to_string());
            }
            let mut c20 = BTreeMap::new();
            for (p, q, v) in [
                ("jia", "jia", "jia"),
                ("jib", "jib", "jib"),
                ("jia", "jf", "jf"),
                ("jf", "jib", "jf"),
                ("jia", "m", "m"),
                ("m", "jib", "m"),
            ] {
                c20.insert((p.to_string(), q.to_string()), v.to_string());
            }
            let mut c21 = BTreeMap::new();
            for (p, q, v) in [
                ("jia", "jia", "jia"),
                ("jib", "jib", "jib"),
                ("jf", "jf", "jf"),
                ("jf", "m", "m"),
                ("m", "jf", "m"),
                ("m", "m", "jf"),
            ] {
                c21.insert((p.to_string(), q.to_string()), v.to_string());
            }
            CompositionTables::new(
                x,
                identities,
                [((1, 0), c10), ((2, 0), c20), ((2, 1), c21)].into_iter().collect(),
            )
        }
    }
}

/// The equivalences: multitensor to collection and back, collection to
/// multitensor and back, and the re-grading over the composite monad, on a
/// panel of three presentations.
pub fn equivalence_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("equivalences");
    // multitensor -> collection -> multitensor on the product family
    {
        let t = TCross::new(0, 3);
        let coll = collection_from_multitensor(&t, 3)?;
        let bar = Bar::of_collection(&coll, 3);
        let x = two_elements();
        let mut ok = true;
        for args in [vec![x.clone()], vec![x.clone(), x.clone()]] {
            let via_t = t.apply(&args)?;
            let via_bar = bar.apply(&args)?;
            if via_t.cells(0).len() != via_bar.cells(0).len() {
                ok = false;
                r.fail("mult-collection-mult", "product family", "cell counts differ".to_string());
                continue;
            }
            let mut images = std::collections::BTreeSet::new();
            for c in via_bar.cells(0) {
                let ids: Vec<String> =
                    bar.eps(&args, 0, c)?.iter().map(FreeCell::canonical_id).collect();
                let expect = multitensor::tuple_id(0, &ids);
                if !via_t.has_cell(0, &expect) || !images.insert(expect) {
                    ok = false;
                    r.fail("mult-collection-mult", "product family", c.clone());
                }
            }
        }
        if ok {
            r.pass("mult-collection-mult", "product family at truncation 0");
        }
    }
    // the extracted collection of the truncation-1 product family is the
    // identity collection
    {
        let t = TCross::new(1, 3);
        let coll = collection_from_multitensor(&t, 3)?;
        let id_coll = Collection::identity(2, 3);
        let mut ok = true;
        for d in 1..=2usize {
            let ours = coll.ops(d)?;
            let want = id_coll.ops(d)?;
            if ours.len() != want.len()
                || ours.iter().zip(&want).any(|(a, b)| a.arity != b.arity)
            {
                ok = false;
                r.fail("mult-collection", "truncated product family", format!("dim {d}"));
            }
        }
        if ok {
            r.pass("mult-collection", "truncated product family is the identity collection");
        }
    }
    // collection -> bar -> collection on a two-operation presentation
    {
        let coll = Collection::from_table(
            1,
            vec![vec![
                OpDecl { id: "m".into(), arity: Tree::line(2), src: None, tgt: None },
                OpDecl { id: "e".into(), arity: Tree::line(0), src: None, tgt: None },
            ]],
        )?;
        let bar = Bar::of_collection(&coll, 4);
        let back = collection_from_multitensor(&bar, 4)?;
        let mut ours: BTreeMap<Tree, usize> = BTreeMap::new();
        for o in back.ops(1)? {
            *ours.entry(o.arity).or_default() += 1;
        }
        let mut want: BTreeMap<Tree, usize> = BTreeMap::new();
        for o in coll.ops(1)? {
            *want.entry(o.arity).or_default() += 1;
        }
        if ours == want {
            r.pass("collection-bar-collection", "two operations");
        } else {
            r.fail("collection-bar-collection", "two operations", format!("{ours:?}"));
        }
    }
    // bar of the identity collection at truncation 2, against the product
    {
        let coll = Collection::identity(2, 3);
        let bar = Bar::of_collection(&coll, 3);
        let back = collection_from_multitensor(&bar, 3)?;
        let mut ok = true;
        for d in 1..=2usize {
            if back.ops(d)?.len() != coll.ops(d)?.len() {
                ok = false;
                r.fail("collection-bar-collection", "identity collection", format!("dim {d}"));
            }
        }
        if ok {
            r.pass("collection-bar-collection", "identity collection at truncation 2");
        }
    }
    // operad <-> composite-monad view on three presentations
    let cyc2 = {
        let ops: BTreeMap<usize, Vec<String>> =
            [(1usize, vec!["u".to_string(), "s".to_string()])].into_iter().collect();
        let mut subst = BTreeMap::new();
        subst.insert(("u".to_string(), vec!["u".to_string()]), "u".to_string());
        subst.insert(("u".to_string(), vec!["s".to_string()]), "s".to_string());
        subst.insert(("s".to_string(), vec!["u".to_string()]), "s".to_string());
        subst.insert(("s".to_string(), vec!["s".to_string()]), "u".to_string());
        SetOperad::new(ops, "u".to_string(), subst)?
    };
    for (name, so) in [
        ("terminal(2)", SetOperad::terminal(2)),
        ("terminal(3)", SetOperad::terminal(3)),
        ("cyclic", cyc2),
    ] {
        let op = embed_set_operad(&so)?;
        let view = to_mt_operad(&op)?;
        let back = from_mt_operad(&view)?;
        if back == op {
            r.pass("operad-mt-roundtrip", name);
        } else {
            r.fail("operad-mt-roundtrip", name, "presentations differ".to_string());
        }
        let counts_ok = view.ops[0].len()
            == (0..=so.max_arity()).map(|n| so.ops(n).len()).sum::<usize>();
        if counts_ok {
            r.pass("operad-mt counts", name);
        } else {
            r.fail("operad-mt counts", name, "grade counts differ".to_string());
        }
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// The tower
// ---------------------------------------------------------------------------

/// Round-trips of the iterated enrichment at levels one and two, plus the
/// naturality square of the enrichment step against truncation.
pub fn psi_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("psi");
    let t1 = sample_tables(1, 9)?;
    let tower1 = psi(1, &t1, 3, 3)?;
    if psi_inverse(&tower1)? == t1 {
        r.pass("round-trip", "level 1 on a three-object category");
    } else {
        r.fail("round-trip", "level 1", "tables differ".to_string());
    }
    let t2 = sample_tables(2, 9)?;
    let tower2 = psi(2, &t2, 5, 3)?;
    if psi_inverse(&tower2)? == t2 {
        r.pass("round-trip", "level 2 on a two-object structure");
    } else {
        r.fail("round-trip", "level 2", "tables differ".to_string());
    }
    // the enrichment step commutes with truncation
    let lhs = phi(&truncate_tables(&t2, 1)?, 3, 3)?;
    let rhs = truncate_algcat(&phi(&t2, 3, 3)?, 0)?;
    if lhs == rhs {
        r.pass("truncation square", "level 1 sample");
    } else {
        r.fail("truncation square", "level 1 sample", "structures differ".to_string());
    }
    // object sets are preserved exactly
    match (&tower1, &tower2) {
        (crate::enrich::Tower::Cat(c1), crate::enrich::Tower::Cat(c2)) => {
            if c1.objects == t1.carrier().cells(0) && c2.objects == t2.carrier().cells(0) {
                r.pass("object preservation", "both levels");
            } else {
                r.fail("object preservation", "both levels", "object sets differ".to_string());
            }
        }
        _ => r.fail("object preservation", "both levels", "unexpected tower shape".to_string()),
    }
    Ok(r)
}

/// Conversions between enriched presentations round-trip on the sample
/// category.
pub fn conversion_suite() -> Result<CheckReport> {
    let mut r = CheckReport::new("conversions");
    let t = sample_tables(1, 9)?;
    let a = phi(&t, 3, 3)?;
    let tc = TCross::new(0, 3);
    let e = algcat_to_tcross(&tc, &a)?;
    let back = crate::enrich::tcross_to_algcat(&tc, &e)?;
    if back == a {
        r.pass("algcat-tcross-algcat", "three-object category");
    } else {
        r.fail("algcat-tcross-algcat", "three-object category", "structures differ".to_string());
    }
    let e2 = algcat_to_tcross(&tc, &back)?;
    if e2 == e {
        r.pass("tcross-algcat-tcross", "three-object category");
    } else {
        r.fail("tcross-algcat-tcross", "three-object category", "tables differ".to_string());
    }
    Ok(r)
}

/// Dispatch a named suite with default desk-scale bounds.
pub fn run_suite(name: &str, dim: usize, max_size: usize, arity: usize, len: usize) -> Result<CheckReport> {
    match name {
        "monad" => monad_suite(&two_arrow_carrier(), dim.min(2), max_size, 3, 2),
        "tight" => tight_suite(dim, max_size),
        "free-oracle" => free_oracle_suite(max_size, 6),
        "hom-decompose" => hom_decompose_suite(5, 6, max_size),
        "multitensor" => multitensor_suite(),
        "pentagon" => coherence_suite(arity.min(4), 3),
        "gamma" => gamma_suite(arity.min(3)),
        "distlaw" => distlaw_suite(2, 2),
        "operad" => operad_suite(),
        "ecat" => ecat_suite(),
        "bar-roundtrip" => bar_roundtrip_suite(9),
        "psi" => psi_suite(),
        "equivalences" => equivalence_suite(),
        "conversions" => conversion_suite(),
        other => Err(crate::error::Error::Unsupported(format!("unknown suite `{other}`"))),
    }
    .map(|r| {
        let _ = len;
        r
    })
}
