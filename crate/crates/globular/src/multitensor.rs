//! Multitensors: families of n-ary tensor operations with a unit and a
//! substitution, presented as bounded enumerations over globular-set
//! carriers. Finite sets are the truncation-0 case.
//!
//! The substitution tensor product of two such families, its coherence
//! isomorphisms, the induced monad on one variable, and the distributive
//! law between the free-category and free-monoid monads are all computed on
//! tagged coproducts: coherences are re-taggings, never identities by fiat.
//!
//! Generated cell identifiers follow a small bracket grammar (tuples
//! `⟨a¦b⟩`, free cells `⟦tree¦images⟧`, summand tags `g{n}/` and
//! `c(n1,..,nk)/`) that is uniquely readable because user-supplied atoms
//! exclude the bracket alphabet; decoding parses rather than re-enumerates.

use std::collections::BTreeMap;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::freecat::{self, FreeCell, FreeOverFree};
use crate::glob::{CellId, GlobMap, GlobSet};
use crate::tree::Tree;

// ---------------------------------------------------------------------------
// Identifier grammar
// ---------------------------------------------------------------------------

pub fn tuple_id(dim: usize, parts: &[String]) -> CellId {
    if parts.is_empty() {
        format!("⟨§{dim}⟩")
    } else {
        format!("⟨{}⟩", parts.join("¦"))
    }
}

/// Split a tuple id into its top-level components; empty markers give an
/// empty list.
pub fn split_tuple(id: &str) -> Result<Vec<String>> {
    let inner = id
        .strip_prefix('⟨')
        .and_then(|s| s.strip_suffix('⟩'))
        .ok_or_else(|| Error::invalid(format!("`{id}` is not a tuple id")))?;
    if inner.starts_with('§') {
        return Ok(Vec::new());
    }
    split_top(inner, '¦')
}

/// Split on a separator at bracket depth zero (tracking ⟨⟩ and ⟦⟧).
pub(crate) fn split_top(s: &str, sep: char) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '⟨' | '⟦' => depth += 1,
            '⟩' | '⟧' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    if depth != 0 {
        return Err(Error::invalid(format!("unbalanced brackets in `{s}`")));
    }
    out.push(cur);
    Ok(out)
}

/// Parse the compact tree text at a known dimension.
pub fn parse_tree(text: &str, dim: usize) -> Result<Tree> {
    match dim {
        0 if text == "*" => Ok(Tree::leaf()),
        0 => Err(Error::invalid(format!("`{text}` is not the leaf tree"))),
        1 => {
            let k: usize = text
                .parse()
                .map_err(|_| Error::invalid(format!("`{text}` is not a line tree")))?;
            Ok(Tree::line(k))
        }
        _ => {
            let inner = text
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| Error::invalid(format!("`{text}` is not a bracketed tree")))?;
            if inner.is_empty() {
                return Tree::node(dim, Vec::new());
            }
            let mut kids = Vec::new();
            let mut depth = 0i32;
            let mut cur = String::new();
            for ch in inner.chars() {
                match ch {
                    '[' => depth += 1,
                    ']' => depth -= 1,
                    ',' if depth == 0 => {
                        kids.push(parse_tree(&cur, dim - 1)?);
                        cur.clear();
                        continue;
                    }
                    _ => {}
                }
                cur.push(ch);
            }
            kids.push(parse_tree(&cur, dim - 1)?);
            Tree::node(dim, kids)
        }
    }
}

/// Parse a canonical free-cell id into its tree and raw per-cell images.
pub fn parse_free_parts(
    id: &str,
    dim: usize,
) -> Result<(Tree, BTreeMap<(usize, CellId), String>)> {
    let inner = id
        .strip_prefix('⟦')
        .and_then(|s| s.strip_suffix('⟧'))
        .ok_or_else(|| Error::invalid(format!("`{id}` is not a free-cell id")))?;
    let blocks = split_top(inner, '§')?;
    let mut first = split_top(&blocks[0], '¦')?;
    let tree = parse_tree(&first.remove(0), dim)?;
    let g = tree.glob();
    if blocks.len() != g.trunc() + 1 {
        return Err(Error::invalid(format!("`{id}` has the wrong number of levels")));
    }
    let mut out = BTreeMap::new();
    for d in 0..=g.trunc() {
        let imgs: Vec<String> = if d == 0 {
            first.clone()
        } else if blocks[d].is_empty() {
            Vec::new()
        } else {
            split_top(&blocks[d], '¦')?
        };
        if imgs.len() != g.cells(d).len() {
            return Err(Error::invalid(format!("`{id}` has wrong image count at dim {d}")));
        }
        for (cell, img) in g.cells(d).iter().zip(imgs) {
            out.insert((d, cell.clone()), img);
        }
    }
    Ok((tree, out))
}

/// Re-encode a free-cell id from a tree and raw images.
pub fn free_id_from_parts(tree: &Tree, imgs: &BTreeMap<(usize, CellId), String>) -> CellId {
    let g = tree.glob();
    let dims: Vec<String> = (0..=g.trunc())
        .map(|d| {
            g.cells(d)
                .iter()
                .map(|id| imgs[&(d, id.clone())].clone())
                .collect::<Vec<_>>()
                .join("¦")
        })
        .collect();
    format!("⟦{tree}¦{}⟧", dims.join("§"))
}

/// Parse a canonical free-cell id back into a free cell over the carrier.
pub fn parse_free_cell(id: &str, dim: usize, carrier: &GlobSet) -> Result<FreeCell> {
    let (tree, imgs) = parse_free_parts(id, dim)?;
    let g = tree.glob();
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    for ((d, cell), img) in imgs {
        maps[d].insert(cell, img);
    }
    FreeCell::new(tree, GlobMap::new(g, carrier.clone(), maps)?)
}

/// Strip a `g{n}/` grade tag.
pub fn split_grade(id: &str) -> Result<(usize, &str)> {
    let rest = id
        .strip_prefix('g')
        .ok_or_else(|| Error::invalid(format!("`{id}` has no grade tag")))?;
    let (num, cell) = rest
        .split_once('/')
        .ok_or_else(|| Error::invalid(format!("`{id}` has no grade tag")))?;
    let n = num.parse().map_err(|_| Error::invalid(format!("bad grade in `{id}`")))?;
    Ok((n, cell))
}

/// Strip a `c(n1,..,nk)/` composition tag.
pub fn split_composition(id: &str) -> Result<(Vec<usize>, &str)> {
    let rest = id
        .strip_prefix("c(")
        .ok_or_else(|| Error::invalid(format!("`{id}` has no composition tag")))?;
    let close = rest
        .find(')')
        .ok_or_else(|| Error::invalid(format!("`{id}` has no composition tag")))?;
    let nums = &rest[..close];
    let cell = rest[close + 1..]
        .strip_prefix('/')
        .ok_or_else(|| Error::invalid(format!("`{id}` has no composition tag")))?;
    let comp = if nums.is_empty() {
        Vec::new()
    } else {
        nums.split(',')
            .map(|s| s.parse().map_err(|_| Error::invalid(format!("bad composition in `{id}`"))))
            .collect::<Result<_>>()?
    };
    Ok((comp, cell))
}

/// Invert an injective globular map, per dimension.
fn invert(m: &GlobMap) -> Result<Vec<BTreeMap<CellId, CellId>>> {
    let mut out = vec![BTreeMap::new(); m.source().trunc() + 1];
    for d in 0..=m.source().trunc() {
        for c in m.source().cells(d) {
            let img = m.apply(d, c)?;
            if out[d].insert(img.clone(), c.clone()).is_some() {
                return Err(Error::invalid("map is not injective"));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The multitensor interface
// ---------------------------------------------------------------------------

/// An enumerable family of tensor operations `E_k` over globular sets of a
/// fixed truncation, with a unit `X -> E_1(X)` and a substitution collapsing
/// `E_k(E_{n_1}(..), ..., E_{n_k}(..))` into `E_{n_1+...+n_k}(..)`.
pub trait Multitensor {
    /// Carrier truncation; 0 means finite sets.
    fn trunc(&self) -> usize;

    /// The object `E_k(args)` as a bounded enumeration with canonical ids.
    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet>;

    /// Functor action: a cell of `E(sources)` along component maps.
    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId>;

    /// The unit on cells: a cell of X becomes a cell of `E_1(X)`.
    fn unit(&self, x: &GlobSet, dim: usize, cell: &str) -> Result<CellId>;

    /// Substitution on cells: `cell` lives in `E_k(E(slice_1), ..,
    /// E(slice_k))` and lands in `E(flattened slices)`.
    fn subst(&self, slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId>;

    /// Functor action along cellwise-defined argument maps; used when the
    /// maps cannot be materialized as bounded globular maps (substitution
    /// composites escape a fixed enumeration bound).
    fn map_cell_fn(
        &self,
        sources: &[GlobSet],
        dim: usize,
        cell: &str,
        f: &dyn Fn(usize, usize, &str) -> Result<CellId>,
    ) -> Result<CellId> {
        let _ = (sources, dim, f);
        Err(Error::Unsupported(format!("no cellwise action for `{cell}`")))
    }

    /// Which cells of each argument a given cell depends on. Used to
    /// distribute cells over tagged coproducts.
    fn arg_supports(
        &self,
        args: &[GlobSet],
        dim: usize,
        cell: &str,
    ) -> Result<Vec<Vec<(usize, CellId)>>> {
        let _ = (args, dim);
        Err(Error::Unsupported(format!("no support analysis for `{cell}`")))
    }

    /// Transport a cell of `E(targets)` backwards along per-argument
    /// injections whose images contain its support: the partial inverse of
    /// the functor action.
    fn unmap_cell(&self, injs: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let _ = (injs, dim);
        Err(Error::Unsupported(format!("no reverse transport for `{cell}`")))
    }
}

fn check_trunc(args: &[GlobSet], trunc: usize) -> Result<()> {
    for a in args {
        if a.trunc() != trunc {
            return Err(Error::TruncMismatch(format!(
                "argument truncation {} differs from {}",
                a.trunc(),
                trunc
            )));
        }
    }
    Ok(())
}

/// Build the unit as a globular map `X -> E_1(X)`.
pub fn unit_map(e: &dyn Multitensor, x: &GlobSet) -> Result<GlobMap> {
    let cod = e.apply(std::slice::from_ref(x))?;
    let maps = (0..=x.trunc())
        .map(|d| {
            x.cells(d)
                .iter()
                .map(|c| Ok((c.clone(), e.unit(x, d, c)?)))
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(x.clone(), cod, maps)
}

/// Build the functor action as a globular map `E(sources) -> E(targets)`.
pub fn apply_map(e: &dyn Multitensor, maps: &[GlobMap]) -> Result<GlobMap> {
    let sources: Vec<GlobSet> = maps.iter().map(|m| m.source().clone()).collect();
    let targets: Vec<GlobSet> = maps.iter().map(|m| m.target().clone()).collect();
    let dom = e.apply(&sources)?;
    let cod = e.apply(&targets)?;
    let table = (0..=dom.trunc())
        .map(|d| {
            dom.cells(d)
                .iter()
                .map(|c| Ok((c.clone(), e.map_cell(maps, d, c)?)))
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(dom, cod, table)
}

/// Build the substitution as a globular map.
pub fn subst_map(e: &dyn Multitensor, slices: &[Vec<GlobSet>]) -> Result<GlobMap> {
    let inner: Vec<GlobSet> = slices.iter().map(|s| e.apply(s)).collect::<Result<_>>()?;
    let flat: Vec<GlobSet> = slices.iter().flatten().cloned().collect();
    let dom = e.apply(&inner)?;
    let cod = e.apply(&flat)?;
    let table = (0..=dom.trunc())
        .map(|d| {
            dom.cells(d)
                .iter()
                .map(|c| Ok((c.clone(), e.subst(slices, d, c)?)))
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(dom, cod, table)
}

// ---------------------------------------------------------------------------
// The product-of-free-cells multitensor
// ---------------------------------------------------------------------------

/// `E_k(X_1..X_k) = T(X_1) × ... × T(X_k)` computed dimensionwise on bounded
/// enumerations; the unit is the free-category unit, the substitution
/// projects, multiplies and flattens.
#[derive(Debug, Clone)]
pub struct TCross {
    pub trunc: usize,
    pub size_bound: usize,
}

impl TCross {
    pub fn new(trunc: usize, size_bound: usize) -> Self {
        TCross { trunc, size_bound }
    }

    /// Components of a cell: the k-tuple of free cells it encodes, over the
    /// given argument carriers.
    pub fn decode(&self, args: &[GlobSet], dim: usize, cell: &str) -> Result<Vec<FreeCell>> {
        let parts = split_tuple(cell)?;
        if parts.len() != args.len() {
            return Err(Error::invalid(format!("`{cell}` has {} components", parts.len())));
        }
        parts
            .iter()
            .zip(args)
            .map(|(p, x)| parse_free_cell(p, dim, x))
            .collect()
    }
}

impl Multitensor for TCross {
    fn trunc(&self) -> usize {
        self.trunc
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        check_trunc(args, self.trunc)?;
        let mut cells = vec![Vec::new(); self.trunc + 1];
        let mut src = vec![BTreeMap::new(); self.trunc];
        let mut tgt = vec![BTreeMap::new(); self.trunc];
        for d in 0..=self.trunc {
            if args.is_empty() {
                let id = tuple_id(d, &[]);
                if d >= 1 {
                    src[d - 1].insert(id.clone(), tuple_id(d - 1, &[]));
                    tgt[d - 1].insert(id.clone(), tuple_id(d - 1, &[]));
                }
                cells[d].push(id);
                continue;
            }
            let per_arg: Vec<Vec<FreeCell>> = args
                .iter()
                .map(|x| freecat::free_cells(x, d, self.size_bound))
                .collect::<Result<_>>()?;
            for combo in per_arg.iter().map(|v| v.iter()).multi_cartesian_product() {
                let ids: Vec<String> = combo.iter().map(|c| c.canonical_id()).collect();
                let id = tuple_id(d, &ids);
                if d >= 1 {
                    let s: Vec<String> = combo
                        .iter()
                        .map(|c| Ok(c.src()?.canonical_id()))
                        .collect::<Result<_>>()?;
                    let t: Vec<String> = combo
                        .iter()
                        .map(|c| Ok(c.tgt()?.canonical_id()))
                        .collect::<Result<_>>()?;
                    src[d - 1].insert(id.clone(), tuple_id(d - 1, &s));
                    tgt[d - 1].insert(id.clone(), tuple_id(d - 1, &t));
                }
                cells[d].push(id);
            }
        }
        GlobSet::new_generated(self.trunc, cells, src, tgt)
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let sources: Vec<GlobSet> = maps.iter().map(|m| m.source().clone()).collect();
        let comps = self.decode(&sources, dim, cell)?;
        let ids: Vec<String> = comps
            .iter()
            .zip(maps)
            .map(|(c, m)| Ok(c.postcompose(m)?.canonical_id()))
            .collect::<Result<_>>()?;
        Ok(tuple_id(dim, &ids))
    }

    fn unit(&self, x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        Ok(tuple_id(dim, &[freecat::unit(x, dim, cell)?.canonical_id()]))
    }

    fn subst(&self, slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId> {
        // decode the outer tuple by parsing alone: its component labels may
        // exceed any fixed enumeration bound
        let parts = split_tuple(cell)?;
        if parts.len() != slices.len() {
            return Err(Error::invalid(format!("`{cell}` has {} components", parts.len())));
        }
        let mut flat_ids: Vec<String> = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            let (tree, imgs) = parse_free_parts(part, dim)?;
            // project the component onto each coordinate, then multiply
            for (j, base) in slices[i].iter().enumerate() {
                let g = tree.glob();
                let mut labels = BTreeMap::new();
                for d in 0..=g.trunc() {
                    for id in g.cells(d) {
                        let enc = &imgs[&(d, id.clone())];
                        let t = split_tuple(enc)?;
                        labels.insert((d, id.clone()), parse_free_cell(&t[j], d, base)?);
                    }
                }
                let proj = FreeOverFree::new(tree.clone(), base.clone(), labels)?;
                flat_ids.push(freecat::mu(&proj)?.cell.canonical_id());
            }
        }
        Ok(tuple_id(dim, &flat_ids))
    }

    fn map_cell_fn(
        &self,
        _sources: &[GlobSet],
        dim: usize,
        cell: &str,
        f: &dyn Fn(usize, usize, &str) -> Result<CellId>,
    ) -> Result<CellId> {
        let parts = split_tuple(cell)?;
        let mut out = Vec::new();
        for (i, part) in parts.iter().enumerate() {
            let (tree, imgs) = parse_free_parts(part, dim)?;
            let mapped = imgs
                .iter()
                .map(|((d, id), img)| Ok(((*d, id.clone()), f(i, *d, img)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            out.push(free_id_from_parts(&tree, &mapped));
        }
        Ok(tuple_id(dim, &out))
    }

    fn arg_supports(
        &self,
        args: &[GlobSet],
        dim: usize,
        cell: &str,
    ) -> Result<Vec<Vec<(usize, CellId)>>> {
        let comps = self.decode(args, dim, cell)?;
        Ok(comps
            .iter()
            .map(|c| {
                let g = c.tree().glob();
                (0..=g.trunc())
                    .flat_map(|d| {
                        g.cells(d)
                            .iter()
                            .map(move |id| (d, c.label().apply(d, id).unwrap().clone()))
                    })
                    .collect()
            })
            .collect())
    }

    fn unmap_cell(&self, injs: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let targets: Vec<GlobSet> = injs.iter().map(|m| m.target().clone()).collect();
        let comps = self.decode(&targets, dim, cell)?;
        let mut ids = Vec::new();
        for (c, inj) in comps.iter().zip(injs) {
            let inv = invert(inj)?;
            let g = c.tree().glob();
            let maps = (0..=g.trunc())
                .map(|d| {
                    g.cells(d)
                        .iter()
                        .map(|id| {
                            let img = c.label().apply(d, id)?;
                            inv[d]
                                .get(img)
                                .cloned()
                                .map(|v| (id.clone(), v))
                                .ok_or_else(|| {
                                    Error::incompatible(format!("`{img}` outside the injection"))
                                })
                        })
                        .collect::<Result<BTreeMap<_, _>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let relabelled =
                FreeCell::new(c.tree().clone(), GlobMap::new(g, inj.source().clone(), maps)?)?;
            ids.push(relabelled.canonical_id());
        }
        Ok(tuple_id(dim, &ids))
    }
}

// ---------------------------------------------------------------------------
// The plain product multitensor
// ---------------------------------------------------------------------------

/// `E_k(X_1..X_k) = X_1 × ... × X_k`, the cartesian multitensor; its monad
/// under Γ is the free monoid monad.
#[derive(Debug, Clone)]
pub struct ProductMt {
    pub trunc: usize,
}

impl ProductMt {
    pub fn new(trunc: usize) -> Self {
        ProductMt { trunc }
    }

    pub fn decode(&self, args: &[GlobSet], dim: usize, cell: &str) -> Result<Vec<CellId>> {
        let parts = split_tuple(cell)?;
        if parts.len() != args.len() {
            return Err(Error::invalid(format!("`{cell}` has {} components", parts.len())));
        }
        for (p, x) in parts.iter().zip(args) {
            if !x.has_cell(dim, p) {
                return Err(Error::UnknownCell { dim, id: p.clone() });
            }
        }
        Ok(parts)
    }
}

impl Multitensor for ProductMt {
    fn trunc(&self) -> usize {
        self.trunc
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        check_trunc(args, self.trunc)?;
        let mut cells = vec![Vec::new(); self.trunc + 1];
        let mut src = vec![BTreeMap::new(); self.trunc];
        let mut tgt = vec![BTreeMap::new(); self.trunc];
        for d in 0..=self.trunc {
            if args.is_empty() {
                let id = tuple_id(d, &[]);
                if d >= 1 {
                    src[d - 1].insert(id.clone(), tuple_id(d - 1, &[]));
                    tgt[d - 1].insert(id.clone(), tuple_id(d - 1, &[]));
                }
                cells[d].push(id);
                continue;
            }
            for combo in args.iter().map(|x| x.cells(d).iter()).multi_cartesian_product() {
                let ids: Vec<String> = combo.iter().map(|c| c.to_string()).collect();
                let id = tuple_id(d, &ids);
                if d >= 1 {
                    let s: Vec<String> = ids
                        .iter()
                        .zip(args)
                        .map(|(c, x)| Ok(x.src(d, c)?.clone()))
                        .collect::<Result<_>>()?;
                    let t: Vec<String> = ids
                        .iter()
                        .zip(args)
                        .map(|(c, x)| Ok(x.tgt(d, c)?.clone()))
                        .collect::<Result<_>>()?;
                    src[d - 1].insert(id.clone(), tuple_id(d - 1, &s));
                    tgt[d - 1].insert(id.clone(), tuple_id(d - 1, &t));
                }
                cells[d].push(id);
            }
        }
        GlobSet::new_generated(self.trunc, cells, src, tgt)
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let sources: Vec<GlobSet> = maps.iter().map(|m| m.source().clone()).collect();
        let comps = self.decode(&sources, dim, cell)?;
        let ids: Vec<String> = comps
            .iter()
            .zip(maps)
            .map(|(c, m)| Ok(m.apply(dim, c)?.clone()))
            .collect::<Result<_>>()?;
        Ok(tuple_id(dim, &ids))
    }

    fn unit(&self, _x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        Ok(tuple_id(dim, &[cell.to_string()]))
    }

    fn subst(&self, slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId> {
        let inner: Vec<GlobSet> = slices.iter().map(|s| self.apply(s)).collect::<Result<_>>()?;
        let outer = self.decode(&inner, dim, cell)?;
        let mut flat = Vec::new();
        for (i, enc) in outer.iter().enumerate() {
            flat.extend(self.decode(&slices[i], dim, enc)?);
        }
        Ok(tuple_id(dim, &flat))
    }

    fn map_cell_fn(
        &self,
        _sources: &[GlobSet],
        dim: usize,
        cell: &str,
        f: &dyn Fn(usize, usize, &str) -> Result<CellId>,
    ) -> Result<CellId> {
        let parts = split_tuple(cell)?;
        let mapped = parts
            .iter()
            .enumerate()
            .map(|(i, p)| f(i, dim, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(tuple_id(dim, &mapped))
    }

    fn arg_supports(
        &self,
        args: &[GlobSet],
        dim: usize,
        cell: &str,
    ) -> Result<Vec<Vec<(usize, CellId)>>> {
        Ok(self
            .decode(args, dim, cell)?
            .into_iter()
            .map(|c| vec![(dim, c)])
            .collect())
    }

    fn unmap_cell(&self, injs: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let targets: Vec<GlobSet> = injs.iter().map(|m| m.target().clone()).collect();
        let comps = self.decode(&targets, dim, cell)?;
        let ids = comps
            .iter()
            .zip(injs)
            .map(|(c, inj)| {
                invert(inj)?[dim]
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::incompatible(format!("`{c}` outside the injection")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(tuple_id(dim, &ids))
    }
}

// ---------------------------------------------------------------------------
// The unit multitensor I
// ---------------------------------------------------------------------------

/// `I_1 = identity` and `I_n` empty otherwise: the unit for the substitution
/// product.
#[derive(Debug, Clone)]
pub struct UnitMt {
    pub trunc: usize,
}

impl UnitMt {
    pub fn new(trunc: usize) -> Self {
        UnitMt { trunc }
    }
}

impl Multitensor for UnitMt {
    fn trunc(&self) -> usize {
        self.trunc
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        check_trunc(args, self.trunc)?;
        if args.len() == 1 {
            Ok(args[0].clone())
        } else {
            Ok(GlobSet::empty(self.trunc))
        }
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        if maps.len() == 1 {
            Ok(maps[0].apply(dim, cell)?.clone())
        } else {
            Err(Error::UnknownCell { dim, id: cell.to_string() })
        }
    }

    fn unit(&self, _x: &GlobSet, _dim: usize, cell: &str) -> Result<CellId> {
        Ok(cell.to_string())
    }

    fn subst(&self, slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId> {
        if slices.len() == 1 && slices[0].len() == 1 {
            Ok(cell.to_string())
        } else {
            Err(Error::UnknownCell { dim, id: cell.to_string() })
        }
    }

    fn arg_supports(
        &self,
        _args: &[GlobSet],
        dim: usize,
        cell: &str,
    ) -> Result<Vec<Vec<(usize, CellId)>>> {
        Ok(vec![vec![(dim, cell.to_string())]])
    }

    fn unmap_cell(&self, injs: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        invert(&injs[0])?[dim]
            .get(cell)
            .cloned()
            .ok_or_else(|| Error::incompatible(format!("`{cell}` outside the injection")))
    }
}

// ---------------------------------------------------------------------------
// Multitensors from operads in finite sets
// ---------------------------------------------------------------------------

/// A non-symmetric operad in finite sets, with a bounded arity support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetOperad {
    ops: BTreeMap<usize, Vec<String>>,
    unit: String,
    subst: BTreeMap<(String, Vec<String>), String>,
}

impl SetOperad {
    pub fn new(
        ops: BTreeMap<usize, Vec<String>>,
        unit: String,
        subst: BTreeMap<(String, Vec<String>), String>,
    ) -> Result<Self> {
        let mut arity = BTreeMap::new();
        for (n, names) in &ops {
            for o in names {
                if o.chars().any(|c| "(),;¦⟨⟩⟦⟧§/".contains(c)) {
                    return Err(Error::invalid(format!("operation id `{o}` uses reserved syntax")));
                }
                if arity.insert(o.clone(), *n).is_some() {
                    return Err(Error::invalid(format!("operation id `{o}` is not unique")));
                }
            }
        }
        if arity.get(&unit) != Some(&1) {
            return Err(Error::invalid("unit must be a unary operation"));
        }
        for ((outer, inners), result) in &subst {
            let k = *arity
                .get(outer)
                .ok_or_else(|| Error::invalid(format!("unknown operation `{outer}`")))?;
            if inners.len() != k {
                return Err(Error::invalid(format!("substitution into `{outer}` has wrong arity")));
            }
            let mut total = 0;
            for o in inners {
                total += arity
                    .get(o)
                    .ok_or_else(|| Error::invalid(format!("unknown operation `{o}`")))?;
            }
            if arity.get(result) != Some(&total) {
                return Err(Error::invalid(format!(
                    "substitution result `{result}` has arity {:?}, expected {total}",
                    arity.get(result)
                )));
            }
        }
        Ok(SetOperad { ops, unit, subst })
    }

    /// The terminal operad up to an arity bound: one operation per arity.
    pub fn terminal(max_arity: usize) -> Self {
        let ops: BTreeMap<usize, Vec<String>> =
            (0..=max_arity).map(|n| (n, vec![format!("t{n}")])).collect();
        let mut subst = BTreeMap::new();
        for k in 0..=max_arity {
            for comp in nonneg_tuples(k, max_arity) {
                let total: usize = comp.iter().sum();
                if total > max_arity {
                    continue;
                }
                let inners: Vec<String> = comp.iter().map(|n| format!("t{n}")).collect();
                subst.insert((format!("t{k}"), inners), format!("t{total}"));
            }
        }
        SetOperad { ops, unit: "t1".to_string(), subst }
    }

    /// The operad with one unary operation and nothing else; its multitensor
    /// is isomorphic to the unit multitensor.
    pub fn unit_only() -> Self {
        SetOperad {
            ops: [(1, vec!["u".to_string()])].into_iter().collect(),
            unit: "u".to_string(),
            subst: [(("u".to_string(), vec!["u".to_string()]), "u".to_string())]
                .into_iter()
                .collect(),
        }
    }

    pub fn ops(&self, arity: usize) -> &[String] {
        self.ops.get(&arity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn arities(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.keys().copied()
    }

    pub fn max_arity(&self) -> usize {
        self.ops.keys().max().copied().unwrap_or(0)
    }

    pub fn unit_op(&self) -> &str {
        &self.unit
    }

    pub fn subst_table(&self) -> &BTreeMap<(String, Vec<String>), String> {
        &self.subst
    }

    pub fn arity_of(&self, op: &str) -> Result<usize> {
        for (n, names) in &self.ops {
            if names.iter().any(|o| o == op) {
                return Ok(*n);
            }
        }
        Err(Error::invalid(format!("unknown operation `{op}`")))
    }

    pub fn substitute(&self, outer: &str, inners: &[String]) -> Result<String> {
        self.subst
            .get(&(outer.to_string(), inners.to_vec()))
            .cloned()
            .ok_or_else(|| {
                Error::MissingEntry(format!("substitution of {inners:?} into `{outer}`"))
            })
    }

    /// Unit and associativity laws on the stored support; failures are
    /// returned as messages.
    pub fn check_laws(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for (n, names) in &self.ops {
            for o in names {
                match self.substitute(&self.unit, std::slice::from_ref(o)) {
                    Ok(r) if &r == o => {}
                    Ok(_) => bad.push(format!("unit absorbs `{o}` incorrectly")),
                    Err(_) => bad.push(format!("missing unit substitution for `{o}`")),
                }
                let units = vec![self.unit.clone(); *n];
                match self.substitute(o, &units) {
                    Ok(r) if &r == o => {}
                    Ok(_) => bad.push(format!("`{o}` does not absorb units")),
                    Err(_) => bad.push(format!("missing unit-tuple substitution into `{o}`")),
                }
            }
        }
        // associativity over composable stored triples: substitute middles
        // into the outer first, or inners into the middles first
        let all_ops: Vec<String> = self.ops.values().flatten().cloned().collect();
        for ((outer, mids), mid_result) in &self.subst {
            let arities: Vec<usize> = match mids.iter().map(|o| self.arity_of(o)).collect() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let slots: usize = arities.iter().sum();
            for inner in (0..slots).map(|_| all_ops.iter()).multi_cartesian_product() {
                let inner: Vec<String> = inner.into_iter().cloned().collect();
                let r1 = self.substitute(mid_result, &inner);
                let mut consumed = 0;
                let mut collapsed = Vec::new();
                let mut defined = true;
                for (m, op) in arities.iter().zip(mids) {
                    match self.substitute(op, &inner[consumed..consumed + m]) {
                        Ok(r) => collapsed.push(r),
                        Err(_) => {
                            defined = false;
                            break;
                        }
                    }
                    consumed += m;
                }
                if !defined {
                    continue;
                }
                let r2 = self.substitute(outer, &collapsed);
                match (r1, r2) {
                    (Ok(a), Ok(b)) if a == b => {}
                    (Err(_), _) | (_, Err(_)) => {}
                    (Ok(a), Ok(b)) => bad.push(format!(
                        "associativity fails at `{outer}`({mids:?})({inner:?}): {a} vs {b}"
                    )),
                }
            }
        }
        bad
    }
}

/// Tuples of k non-negative integers each at most `max`.
fn nonneg_tuples(k: usize, max: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in nonneg_tuples(k - 1, max) {
        for v in 0..=max {
            let mut t = rest.clone();
            t.push(v);
            out.push(t);
        }
    }
    out
}

/// Positive compositions of n, ordered by length then lexicographically;
/// the single empty composition for n = 0.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(acc.clone());
            return;
        }
        for first in 1..=n {
            acc.push(first);
            rec(n - first, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    out
}

/// The multitensor on finite sets induced by a set operad:
/// `E_k(X_1..X_k) = ops_k × X_1 × ... × X_k`.
#[derive(Debug, Clone)]
pub struct OperadMt {
    pub operad: SetOperad,
}

impl OperadMt {
    pub fn new(operad: SetOperad) -> Self {
        OperadMt { operad }
    }

    pub fn decode(&self, args: &[GlobSet], cell: &str) -> Result<(String, Vec<CellId>)> {
        let mut parts = split_tuple(cell)?;
        if parts.len() != args.len() + 1 {
            return Err(Error::invalid(format!("`{cell}` has {} components", parts.len())));
        }
        let op = parts.remove(0);
        self.operad.arity_of(&op)?;
        for (p, x) in parts.iter().zip(args) {
            if !x.has_cell(0, p) {
                return Err(Error::UnknownCell { dim: 0, id: p.clone() });
            }
        }
        Ok((op, parts))
    }
}

impl Multitensor for OperadMt {
    fn trunc(&self) -> usize {
        0
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        check_trunc(args, 0)?;
        let k = args.len();
        let mut out = Vec::new();
        for op in self.operad.ops(k) {
            if k == 0 {
                out.push(tuple_id(0, std::slice::from_ref(op)));
                continue;
            }
            for combo in args.iter().map(|x| x.cells(0).iter()).multi_cartesian_product() {
                let mut parts = vec![op.clone()];
                parts.extend(combo.iter().map(|c| c.to_string()));
                out.push(tuple_id(0, &parts));
            }
        }
        GlobSet::new_generated(0, vec![out], Vec::new(), Vec::new())
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let sources: Vec<GlobSet> = maps.iter().map(|m| m.source().clone()).collect();
        let (op, xs) = self.decode(&sources, cell)?;
        let mut parts = vec![op];
        for (x, m) in xs.iter().zip(maps) {
            parts.push(m.apply(dim, x)?.clone());
        }
        Ok(tuple_id(dim, &parts))
    }

    fn unit(&self, _x: &GlobSet, _dim: usize, cell: &str) -> Result<CellId> {
        Ok(tuple_id(0, &[self.operad.unit_op().to_string(), cell.to_string()]))
    }

    fn subst(&self, slices: &[Vec<GlobSet>], _dim: usize, cell: &str) -> Result<CellId> {
        let inner: Vec<GlobSet> = slices.iter().map(|s| self.apply(s)).collect::<Result<_>>()?;
        let (op, ys) = self.decode(&inner, cell)?;
        let mut inner_ops = Vec::new();
        let mut flat = Vec::new();
        for (i, y) in ys.iter().enumerate() {
            let (o, xs) = self.decode(&slices[i], y)?;
            inner_ops.push(o);
            flat.extend(xs);
        }
        let composite = self.operad.substitute(&op, &inner_ops)?;
        let mut parts = vec![composite];
        parts.extend(flat);
        Ok(tuple_id(0, &parts))
    }

    fn map_cell_fn(
        &self,
        _sources: &[GlobSet],
        dim: usize,
        cell: &str,
        f: &dyn Fn(usize, usize, &str) -> Result<CellId>,
    ) -> Result<CellId> {
        let mut parts = split_tuple(cell)?;
        for (i, p) in parts.iter_mut().skip(1).enumerate() {
            *p = f(i, dim, p)?;
        }
        Ok(tuple_id(dim, &parts))
    }

    fn arg_supports(
        &self,
        args: &[GlobSet],
        _dim: usize,
        cell: &str,
    ) -> Result<Vec<Vec<(usize, CellId)>>> {
        let (_, xs) = self.decode(args, cell)?;
        Ok(xs.into_iter().map(|c| vec![(0, c)]).collect())
    }

    fn unmap_cell(&self, injs: &[GlobMap], _dim: usize, cell: &str) -> Result<CellId> {
        let targets: Vec<GlobSet> = injs.iter().map(|m| m.target().clone()).collect();
        let (op, xs) = self.decode(&targets, cell)?;
        let mut parts = vec![op];
        for (c, inj) in xs.iter().zip(injs) {
            parts.push(
                invert(inj)?[0]
                    .get(c)
                    .cloned()
                    .ok_or_else(|| Error::incompatible(format!("`{c}` outside the injection")))?,
            );
        }
        Ok(tuple_id(0, &parts))
    }
}

// ---------------------------------------------------------------------------
// The substitution product E ∘ F and its coherences
// ---------------------------------------------------------------------------

/// The substitution product of two distributive families, exposed as a
/// functor with tagged summands: a cell of `(E∘F)_n(args)` is a positive
/// composition `n_1+...+n_k = n` together with a cell of
/// `E_k(F_{n_1}(..), ..., F_{n_k}(..))`, tagged `c(n1,..,nk)/`.
pub struct SubstProduct<'a> {
    pub e: &'a dyn Multitensor,
    pub f: &'a dyn Multitensor,
}

impl<'a> SubstProduct<'a> {
    pub fn new(e: &'a dyn Multitensor, f: &'a dyn Multitensor) -> Result<Self> {
        if e.trunc() != f.trunc() {
            return Err(Error::TruncMismatch("substitution product factors".into()));
        }
        Ok(SubstProduct { e, f })
    }

    fn tag(comp: &[usize]) -> String {
        format!("c({})", comp.iter().map(usize::to_string).join(","))
    }

    pub fn slice_args(args: &[GlobSet], comp: &[usize]) -> Vec<Vec<GlobSet>> {
        let mut out = Vec::new();
        let mut off = 0;
        for &n in comp {
            out.push(args[off..off + n].to_vec());
            off += n;
        }
        out
    }

    fn slice_counts(q: &[usize], m: &[usize]) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut off = 0;
        for &mi in m {
            out.push(q[off..off + mi].to_vec());
            off += mi;
        }
        out
    }

    /// The summand object for one composition.
    pub fn summand(&self, args: &[GlobSet], comp: &[usize]) -> Result<GlobSet> {
        let inner: Vec<GlobSet> = Self::slice_args(args, comp)
            .iter()
            .map(|s| self.f.apply(s))
            .collect::<Result<_>>()?;
        self.e.apply(&inner)
    }

    /// The coproduct injection of one summand.
    pub fn injection(&self, args: &[GlobSet], comp: &[usize]) -> Result<GlobMap> {
        let dom = self.summand(args, comp)?;
        let cod = self.apply(args)?;
        let tag = Self::tag(comp);
        let maps = (0..=dom.trunc())
            .map(|d| {
                dom.cells(d)
                    .iter()
                    .map(|c| (c.clone(), format!("{tag}/{c}")))
                    .collect()
            })
            .collect();
        GlobMap::new(dom, cod, maps)
    }

    /// Summand tag and inner cell of a tagged cell.
    pub fn decode(&self, cell: &str) -> Result<(Vec<usize>, CellId)> {
        let (comp, inner) = split_composition(cell)?;
        Ok((comp, inner.to_string()))
    }
}

impl Multitensor for SubstProduct<'_> {
    fn trunc(&self) -> usize {
        self.e.trunc()
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        check_trunc(args, self.trunc())?;
        let trunc = self.trunc();
        let mut cells = vec![Vec::new(); trunc + 1];
        let mut src = vec![BTreeMap::new(); trunc];
        let mut tgt = vec![BTreeMap::new(); trunc];
        for comp in compositions(args.len()) {
            let tag = Self::tag(&comp);
            let summand = self.summand(args, &comp)?;
            for d in 0..=trunc {
                for c in summand.cells(d) {
                    cells[d].push(format!("{tag}/{c}"));
                    if d >= 1 {
                        src[d - 1]
                            .insert(format!("{tag}/{c}"), format!("{tag}/{}", summand.src(d, c)?));
                        tgt[d - 1]
                            .insert(format!("{tag}/{c}"), format!("{tag}/{}", summand.tgt(d, c)?));
                    }
                }
            }
        }
        GlobSet::new_generated(trunc, cells, src, tgt)
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let (comp, inner) = self.decode(cell)?;
        let mut off = 0;
        let mut fmaps = Vec::new();
        for &n in &comp {
            fmaps.push(apply_map(self.f, &maps[off..off + n])?);
            off += n;
        }
        let mapped = self.e.map_cell(&fmaps, dim, &inner)?;
        Ok(format!("{}/{}", Self::tag(&comp), mapped))
    }

    fn unit(&self, _x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        Err(Error::Unsupported(format!(
            "substitution products carry no unit (cell `{cell}` at dim {dim})"
        )))
    }

    fn subst(&self, _slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId> {
        Err(Error::Unsupported(format!(
            "substitution products carry no substitution (cell `{cell}` at dim {dim})"
        )))
    }
}

/// λ : (I ∘ F)(args) -> F(args), inverse of the `c(n)` injection.
pub fn lambda_map(f: &dyn Multitensor, args: &[GlobSet]) -> Result<GlobMap> {
    let i = UnitMt::new(f.trunc());
    let sp = SubstProduct::new(&i, f)?;
    let dom = sp.apply(args)?;
    let cod = f.apply(args)?;
    let maps = (0..=dom.trunc())
        .map(|d| {
            dom.cells(d)
                .iter()
                .map(|c| {
                    let (comp, inner) = sp.decode(c)?;
                    if comp.len() != 1 {
                        return Err(Error::invalid("unit product has a stray summand"));
                    }
                    // I_1(F_n(args)) = F_n(args), so the inner cell is the value
                    Ok((c.clone(), inner))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(dom, cod, maps)
}

/// ρ : (E ∘ I)(args) -> E(args), inverse of the `c(1,..,1)` injection.
pub fn rho_map(e: &dyn Multitensor, args: &[GlobSet]) -> Result<GlobMap> {
    let i = UnitMt::new(e.trunc());
    let sp = SubstProduct::new(e, &i)?;
    let dom = sp.apply(args)?;
    let cod = e.apply(args)?;
    let maps = (0..=dom.trunc())
        .map(|d| {
            dom.cells(d)
                .iter()
                .map(|c| {
                    let (comp, inner) = sp.decode(c)?;
                    if comp.iter().any(|&n| n != 1) {
                        return Err(Error::invalid("identity factor admits only unary summands"));
                    }
                    Ok((c.clone(), inner))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(dom, cod, maps)
}

/// α : ((E∘F)∘G)(args) -> (E∘(F∘G))(args), the unique re-tagging commuting
/// with the summand injections.
pub fn alpha_map(
    e: &dyn Multitensor,
    f: &dyn Multitensor,
    g: &dyn Multitensor,
    args: &[GlobSet],
) -> Result<GlobMap> {
    let ef = SubstProduct::new(e, f)?;
    let lhs = SubstProduct::new(&ef, g)?;
    let fg = SubstProduct::new(f, g)?;
    let rhs = SubstProduct::new(e, &fg)?;
    let dom = lhs.apply(args)?;
    let cod = rhs.apply(args)?;
    let maps = (0..=dom.trunc())
        .map(|d| {
            dom.cells(d)
                .iter()
                .map(|c| {
                    // outer tag: composition q of n; inner tag: composition m
                    // of the length of q; the core lives in E applied to the
                    // same F-of-G objects on both sides
                    let (q, inner1) = lhs.decode(c)?;
                    let (m, core) = ef.decode(&inner1)?;
                    let groups = SubstProduct::slice_counts(&q, &m);
                    let t: Vec<usize> = groups.iter().map(|grp| grp.iter().sum()).collect();
                    let mut injs = Vec::new();
                    let mut off = 0;
                    for grp in &groups {
                        let span: usize = grp.iter().sum();
                        injs.push(fg.injection(&args[off..off + span], grp)?);
                        off += span;
                    }
                    let mapped = e.map_cell(&injs, d, &core)?;
                    Ok((c.clone(), format!("{}/{}", SubstProduct::tag(&t), mapped)))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    GlobMap::new(dom, cod, maps)
}

/// The unit triangle `(1_E ∘ λ) ∘ α = ρ ∘ 1_F`, checked elementwise.
pub fn check_triangle(
    e: &dyn Multitensor,
    f: &dyn Multitensor,
    args: &[GlobSet],
) -> Result<Vec<String>> {
    let trunc = e.trunc();
    let i = UnitMt::new(trunc);
    let ei = SubstProduct::new(e, &i)?;
    let dom_p = SubstProduct::new(&ei, f)?;
    let dom = dom_p.apply(args)?;
    let alpha = alpha_map(e, &i, f, args)?;
    let ifp = SubstProduct::new(&i, f)?;
    let rhs_p = SubstProduct::new(e, &ifp)?;
    let ef = SubstProduct::new(e, f)?;
    let cod = ef.apply(args)?;
    let mut bad = Vec::new();
    for d in 0..=dom.trunc() {
        for c in dom.cells(d) {
            let via_alpha = alpha.apply(d, c)?;
            let (t, inner) = rhs_p.decode(via_alpha)?;
            let slices = SubstProduct::slice_args(args, &t);
            let lmaps: Vec<GlobMap> =
                slices.iter().map(|s| lambda_map(f, s)).collect::<Result<_>>()?;
            let lhs = format!("{}/{}", SubstProduct::tag(&t), e.map_cell(&lmaps, d, &inner)?);
            // ρ ∘ 1_F directly on the (E∘I) layer
            let (q, inner1) = dom_p.decode(c)?;
            let fapps: Vec<GlobSet> = SubstProduct::slice_args(args, &q)
                .iter()
                .map(|s| f.apply(s))
                .collect::<Result<_>>()?;
            let rho = rho_map(e, &fapps)?;
            let rhs = format!("{}/{}", SubstProduct::tag(&q), rho.apply(d, &inner1)?);
            if lhs != rhs {
                bad.push(format!("triangle fails at `{c}` (dim {d}): {lhs} vs {rhs}"));
            }
            if !cod.has_cell(d, &lhs) {
                bad.push(format!("triangle image `{lhs}` missing"));
            }
        }
    }
    Ok(bad)
}

/// The pentagon for four factors, checked elementwise.
pub fn check_pentagon(
    e: &dyn Multitensor,
    f: &dyn Multitensor,
    g: &dyn Multitensor,
    h: &dyn Multitensor,
    args: &[GlobSet],
) -> Result<Vec<String>> {
    let ef = SubstProduct::new(e, f)?;
    let efg = SubstProduct::new(&ef, g)?;
    let outer = SubstProduct::new(&efg, h)?;
    let dom = outer.apply(args)?;
    let gh = SubstProduct::new(g, h)?;
    let fg = SubstProduct::new(f, g)?;
    let fg_h = SubstProduct::new(&fg, h)?;
    let f_gh = SubstProduct::new(f, &gh)?;

    // path 1: α_{E∘F,G,H} then α_{E,F,G∘H}
    let a1 = alpha_map(&ef, g, h, args)?;
    let a2 = alpha_map(e, f, &gh, args)?;
    // path 2: α_{E,F,G} whiskered by H, then α_{E,F∘G,H}, then E ∘ α_{F,G,H}
    let b2 = alpha_map(e, &fg, h, args)?;
    let e_fgh = SubstProduct::new(e, &fg_h)?;
    let cod = SubstProduct::new(e, &f_gh)?.apply(args)?;

    let mut bad = Vec::new();
    for d in 0..=dom.trunc() {
        for c in dom.cells(d) {
            let p1 = a2.apply(d, a1.apply(d, c)?)?.clone();

            let (q, inner) = outer.decode(c)?;
            let happs: Vec<GlobSet> = SubstProduct::slice_args(args, &q)
                .iter()
                .map(|s| h.apply(s))
                .collect::<Result<_>>()?;
            let am = alpha_map(e, f, g, &happs)?;
            let stage1 = format!("{}/{}", SubstProduct::tag(&q), am.apply(d, &inner)?);
            let stage2 = b2.apply(d, &stage1)?.clone();
            let (t, core) = e_fgh.decode(&stage2)?;
            let slices = SubstProduct::slice_args(args, &t);
            let amaps: Vec<GlobMap> =
                slices.iter().map(|s| alpha_map(f, g, h, s)).collect::<Result<_>>()?;
            let p2 = format!("{}/{}", SubstProduct::tag(&t), e.map_cell(&amaps, d, &core)?);
            if p1 != p2 {
                bad.push(format!("pentagon fails at `{c}` (dim {d}): {p1} vs {p2}"));
            }
            if !cod.has_cell(d, &p1) {
                bad.push(format!("pentagon image `{p1}` missing"));
            }
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------------------
// The induced monad on one variable
// ---------------------------------------------------------------------------

/// `Γ(E)(X) = ⨿_{n <= arity} E_n(X,..,X)` with summand tags `g{n}/`, the
/// monad induced by a multitensor.
pub struct Gamma<'a> {
    pub e: &'a dyn Multitensor,
    pub arity: usize,
}

impl<'a> Gamma<'a> {
    pub fn new(e: &'a dyn Multitensor, arity: usize) -> Self {
        Gamma { e, arity }
    }

    pub fn apply(&self, x: &GlobSet) -> Result<GlobSet> {
        let trunc = self.e.trunc();
        let mut cells = vec![Vec::new(); trunc + 1];
        let mut src = vec![BTreeMap::new(); trunc];
        let mut tgt = vec![BTreeMap::new(); trunc];
        for n in 0..=self.arity {
            let part = self.e.apply(&vec![x.clone(); n])?;
            for d in 0..=trunc {
                for c in part.cells(d) {
                    cells[d].push(format!("g{n}/{c}"));
                    if d >= 1 {
                        src[d - 1].insert(format!("g{n}/{c}"), format!("g{n}/{}", part.src(d, c)?));
                        tgt[d - 1].insert(format!("g{n}/{c}"), format!("g{n}/{}", part.tgt(d, c)?));
                    }
                }
            }
        }
        GlobSet::new_generated(trunc, cells, src, tgt)
    }

    pub fn injection(&self, x: &GlobSet, n: usize) -> Result<GlobMap> {
        let dom = self.e.apply(&vec![x.clone(); n])?;
        let cod = self.apply(x)?;
        let maps = (0..=dom.trunc())
            .map(|d| {
                dom.cells(d)
                    .iter()
                    .map(|c| (c.clone(), format!("g{n}/{c}")))
                    .collect()
            })
            .collect();
        GlobMap::new(dom, cod, maps)
    }

    pub fn decode(&self, cell: &str) -> Result<(usize, CellId)> {
        let (n, inner) = split_grade(cell)?;
        if n > self.arity {
            return Err(Error::Unsupported(format!("grade {n} exceeds the arity bound")));
        }
        Ok((n, inner.to_string()))
    }

    /// The monad unit at X.
    pub fn unit(&self, x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        Ok(format!("g1/{}", self.e.unit(x, dim, cell)?))
    }

    pub fn unit_map(&self, x: &GlobSet) -> Result<GlobMap> {
        let cod = self.apply(x)?;
        let maps = (0..=x.trunc())
            .map(|d| {
                x.cells(d)
                    .iter()
                    .map(|c| Ok((c.clone(), self.unit(x, d, c)?)))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GlobMap::new(x.clone(), cod, maps)
    }

    /// The functor action on a carrier map.
    pub fn map(&self, h: &GlobMap) -> Result<GlobMap> {
        let dom = self.apply(h.source())?;
        let cod = self.apply(h.target())?;
        let maps = (0..=dom.trunc())
            .map(|d| {
                dom.cells(d)
                    .iter()
                    .map(|c| {
                        let (n, inner) = self.decode(c)?;
                        let mapped = self.e.map_cell(&vec![h.clone(); n], d, &inner)?;
                        Ok((c.clone(), format!("g{n}/{mapped}")))
                    })
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GlobMap::new(dom, cod, maps)
    }

    /// The grades of the Γ(X)-cells a cell of `E_k(Γ(X)...)` touches, one
    /// per argument; they must agree within each argument.
    fn distribution(&self, gx: &GlobSet, k: usize, dim: usize, cell: &str) -> Result<Vec<usize>> {
        let supports = self.e.arg_supports(&vec![gx.clone(); k], dim, cell)?;
        supports
            .iter()
            .map(|sup| {
                let mut grade: Option<usize> = None;
                for (_, id) in sup {
                    let (n, _) = split_grade(id)?;
                    match grade {
                        None => grade = Some(n),
                        Some(m) if m != n => {
                            return Err(Error::incompatible(
                                "support spreads over several grades",
                            ))
                        }
                        _ => {}
                    }
                }
                grade.ok_or_else(|| Error::incompatible("empty support"))
            })
            .collect()
    }

    /// The monad multiplication at X on a cell of Γ(E)(Γ(E)(X)): distribute
    /// the coproduct through E, then substitute. Errors with `Unsupported`
    /// when the flattened grade escapes the arity bound.
    pub fn mult(&self, x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        let gx = self.apply(x)?;
        self.mult_with(x, &gx, dim, cell)
    }

    fn mult_with(&self, x: &GlobSet, gx: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        let (k, outer) = self.decode(cell)?;
        let combo = self.distribution(gx, k, dim, &outer)?;
        let total: usize = combo.iter().sum();
        if total > self.arity {
            return Err(Error::Unsupported(format!(
                "multiplication escapes the arity bound ({total} > {})",
                self.arity
            )));
        }
        let injs: Vec<GlobMap> =
            combo.iter().map(|&n| self.injection(x, n)).collect::<Result<_>>()?;
        let core = self.e.unmap_cell(&injs, dim, &outer)?;
        let slices: Vec<Vec<GlobSet>> = combo.iter().map(|&n| vec![x.clone(); n]).collect();
        Ok(format!("g{total}/{}", self.e.subst(&slices, dim, core.as_str())?))
    }

    /// The multiplication as a partial table on Γ²(X); cells whose grade
    /// escapes the bound are omitted.
    pub fn mult_table(&self, x: &GlobSet) -> Result<BTreeMap<(usize, CellId), CellId>> {
        let gx = self.apply(x)?;
        let ggx = self.apply(&gx)?;
        let mut out = BTreeMap::new();
        for d in 0..=ggx.trunc() {
            for c in ggx.cells(d) {
                match self.mult_with(x, &gx, d, c) {
                    Ok(v) => {
                        out.insert((d, c.clone()), v);
                    }
                    Err(Error::Unsupported(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(out)
    }
}

/// γ2 : Γ(E)(Γ(F)(X)) -> Γ(E∘F)(X), the unique re-tagging commuting with
/// the coproduct injections. Partial on our positive-composition summand
/// convention: distributions with a zero grade or escaping the arity bound
/// report `Unsupported`.
pub fn gamma2(
    e: &dyn Multitensor,
    f: &dyn Multitensor,
    x: &GlobSet,
    arity: usize,
    dim: usize,
    cell: &str,
) -> Result<CellId> {
    let gf = Gamma::new(f, arity);
    let (m, outer) = split_grade(cell)?;
    let gfx = gf.apply(x)?;
    let supports = e.arg_supports(&vec![gfx.clone(); m], dim, &outer)?;
    let combo: Vec<usize> = supports
        .iter()
        .map(|sup| {
            let mut grade: Option<usize> = None;
            for (_, id) in sup {
                let (n, _) = split_grade(id)?;
                match grade {
                    None => grade = Some(n),
                    Some(g) if g != n => {
                        return Err(Error::incompatible("support spreads over several grades"))
                    }
                    _ => {}
                }
            }
            grade.ok_or_else(|| Error::incompatible("empty support"))
        })
        .collect::<Result<_>>()?;
    let total: usize = combo.iter().sum();
    if combo.iter().any(|&n| n == 0) {
        return Err(Error::Unsupported(
            "distribution has a nullary grade, outside the positive summand convention".into(),
        ));
    }
    if total > arity {
        return Err(Error::Unsupported(format!("grade {total} exceeds the arity bound")));
    }
    let injs: Vec<GlobMap> = combo.iter().map(|&n| gf.injection(x, n)).collect::<Result<_>>()?;
    let core = e.unmap_cell(&injs, dim, &outer)?;
    Ok(format!("g{total}/c({})/{core}", combo.iter().map(usize::to_string).join(",")))
}

// ---------------------------------------------------------------------------
// Multitensor law checking
// ---------------------------------------------------------------------------

/// Verify the three multitensor axioms on a panel of argument tuples, plus
/// the induced-monad facts for the unary part. `double` lists nested slices
/// for the associativity check.
pub fn check_multitensor(
    e: &dyn Multitensor,
    panel: &[Vec<GlobSet>],
    double: &[Vec<Vec<Vec<GlobSet>>>],
) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for args in panel {
        let obj = e.apply(args)?;
        // unit left: σ ∘ u_{E(args)} = id
        for d in 0..=obj.trunc() {
            for z in obj.cells(d) {
                let outer = e.unit(&obj, d, z)?;
                let back = e.subst(&[args.clone()], d, &outer)?;
                if back != *z {
                    bad.push(format!("unit-left fails at `{z}`: {back}"));
                }
            }
        }
        // unit right: σ ∘ E(u,..,u) = id
        if !args.is_empty() {
            let umaps: Vec<GlobMap> =
                args.iter().map(|a| unit_map(e, a)).collect::<Result<_>>()?;
            let slices: Vec<Vec<GlobSet>> = args.iter().map(|a| vec![a.clone()]).collect();
            for d in 0..=obj.trunc() {
                for z in obj.cells(d) {
                    let lifted = e.map_cell(&umaps, d, z)?;
                    let back = e.subst(&slices, d, &lifted)?;
                    if back != *z {
                        bad.push(format!("unit-right fails at `{z}`: {back}"));
                    }
                }
            }
        }
    }
    // associativity on nested slices: collapse the outer two levels first,
    // or collapse inside each middle argument first (cellwise, since the
    // collapsed composites may escape any fixed enumeration bound)
    for dd in double {
        let mids: Vec<Vec<GlobSet>> = dd
            .iter()
            .map(|grp| grp.iter().map(|s| e.apply(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mid_objs: Vec<GlobSet> = mids.iter().map(|g| e.apply(g)).collect::<Result<_>>()?;
        let big = e.apply(&mid_objs)?;
        let outer_slices: Vec<Vec<GlobSet>> = mids.clone();
        let flat_inner: Vec<Vec<GlobSet>> = dd.iter().flatten().cloned().collect();
        let grouped: Vec<Vec<GlobSet>> =
            dd.iter().map(|grp| grp.iter().flatten().cloned().collect()).collect();
        for d in 0..=big.trunc() {
            for w in big.cells(d) {
                let r1 = e.subst(&flat_inner, d, &e.subst(&outer_slices, d, w)?)?;
                let collapsed =
                    e.map_cell_fn(&mid_objs, d, w, &|i, dd2, img| e.subst(&dd[i], dd2, img))?;
                let r2 = e.subst(&grouped, d, &collapsed)?;
                if r1 != r2 {
                    bad.push(format!("associativity fails at `{w}`: {r1} vs {r2}"));
                }
            }
        }
    }
    Ok(bad)
}

/// Whether a commuting square is a pullback of finite globular sets:
/// `top : A -> B`, `left : A -> C`, `right : B -> D`, `bottom : C -> D`.
pub fn is_pullback_square(
    top: &GlobMap,
    left: &GlobMap,
    right: &GlobMap,
    bottom: &GlobMap,
) -> Result<bool> {
    if top.then(right)? != left.then(bottom)? {
        return Ok(false);
    }
    let a = top.source();
    for d in 0..=a.trunc() {
        let mut seen = std::collections::BTreeSet::new();
        for c in a.cells(d) {
            if !seen.insert((top.apply(d, c)?.clone(), left.apply(d, c)?.clone())) {
                return Ok(false);
            }
        }
        let mut want = 0usize;
        for b in right.source().cells(d) {
            for cc in bottom.source().cells(d) {
                if right.apply(d, b)? == bottom.apply(d, cc)? {
                    want += 1;
                }
            }
        }
        if seen.len() != want {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Cartesian naturality of the unit on a panel of carrier maps: the square
/// of u along each map must commute and be a pullback.
pub fn check_unit_cartesian(e: &dyn Multitensor, maps: &[GlobMap]) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for h in maps {
        let ux = unit_map(e, h.source())?;
        let uy = unit_map(e, h.target())?;
        let eh = apply_map(e, std::slice::from_ref(h))?;
        if ux.then(&eh)? != h.then(&uy)? {
            bad.push("unit naturality square does not commute".to_string());
            continue;
        }
        if !is_pullback_square(h, &ux, &uy, &eh)? {
            bad.push("unit naturality square is not a pullback".to_string());
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------------------
// The distributive law between the free-category and free-monoid monads
// ---------------------------------------------------------------------------

/// One graded value of the composite monad: a word length together with the
/// tuple of free cells over the carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedWord {
    pub grade: usize,
    pub cells: Vec<FreeCell>,
}

/// The free monoid monad on globular sets, bounded by a word length.
pub fn free_monoid(x: &GlobSet, word_bound: usize) -> Result<GlobSet> {
    let p = ProductMt::new(x.trunc());
    Gamma::new(&p, word_bound).apply(x)
}

/// The distributive law sending a free cell over the free monoid on X to a
/// word of free cells over X: relabel by units, wrap to a one-letter word,
/// and push through the substitution of the product-of-free-cells
/// multitensor.
pub fn dist_law_cell(
    x: &GlobSet,
    word_bound: usize,
    size_bound: usize,
    c: &FreeCell,
) -> Result<GradedWord> {
    let p = ProductMt::new(x.trunc());
    let gm = Gamma::new(&p, word_bound);
    let mx = gm.apply(x)?;
    if c.carrier() != &mx {
        return Err(Error::incompatible("cell is not over the bounded free monoid"));
    }
    // uniform grade of the labels
    let g = c.tree().glob();
    let mut grade: Option<usize> = None;
    for d in 0..=g.trunc() {
        for id in g.cells(d) {
            let (n, _) = split_grade(c.label().apply(d, id)?)?;
            match grade {
                None => grade = Some(n),
                Some(m) if m != n => {
                    return Err(Error::incompatible("labels spread over several grades"))
                }
                _ => {}
            }
        }
    }
    let n = grade.ok_or_else(|| Error::incompatible("empty realization"))?;
    // relabel each letter by the free-category unit
    let tc = TCross::new(x.trunc(), size_bound.max(x.trunc() + 2));
    let inner_obj = tc.apply(&vec![x.clone(); n])?;
    let gg = c.tree().glob();
    let mut maps = vec![BTreeMap::new(); gg.trunc() + 1];
    for d in 0..=gg.trunc() {
        for id in gg.cells(d) {
            let (_, word) = split_grade(c.label().apply(d, id)?)?;
            let letters = p.decode(&vec![x.clone(); n], d, word)?;
            let units: Vec<String> = letters
                .iter()
                .map(|l| Ok(freecat::unit(x, d, l)?.canonical_id()))
                .collect::<Result<_>>()?;
            maps[d].insert(id.clone(), tuple_id(d, &units));
        }
    }
    let relabelled = FreeCell::new(c.tree().clone(), GlobMap::new(gg, inner_obj, maps)?)?;
    // wrap to a one-letter word and substitute
    let outer = tuple_id(c.dim(), &[relabelled.canonical_id()]);
    let flat = tc.subst(&[vec![x.clone(); n]], c.dim(), &outer)?;
    let parts = split_tuple(&flat)?;
    let cells = parts
        .iter()
        .map(|id| parse_free_cell(id, c.dim(), x))
        .collect::<Result<Vec<_>>>()?;
    Ok(GradedWord { grade: n, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glob::GlobSetBuilder;

    fn two_set() -> GlobSet {
        GlobSetBuilder::new(0).cell0("x").cell0("y").finish().unwrap()
    }

    fn one_set() -> GlobSet {
        GlobSetBuilder::new(0).cell0("x").finish().unwrap()
    }

    fn loop_graph() -> GlobSet {
        GlobSetBuilder::new(1).cell0("v").cell(1, "l", "v", "v").finish().unwrap()
    }

    #[test]
    fn compositions_of_three() {
        let c = compositions(3);
        assert_eq!(c.len(), 4);
        assert_eq!(c[0], vec![3]);
        assert_eq!(compositions(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn id_grammar_roundtrips() {
        let x = loop_graph();
        for d in 0..=1usize {
            for c in freecat::free_cells(&x, d, 4).unwrap() {
                let id = c.canonical_id();
                let back = parse_free_cell(&id, d, &x).unwrap();
                assert_eq!(back, c, "{id}");
            }
        }
        assert_eq!(split_tuple("⟨§2⟩").unwrap(), Vec::<String>::new());
        assert_eq!(split_tuple("⟨a¦⟨b¦c⟩⟩").unwrap(), vec!["a", "⟨b¦c⟩"]);
        assert_eq!(split_composition("c(2,1)/z").unwrap(), (vec![2, 1], "z"));
        assert_eq!(split_grade("g3/w").unwrap(), (3, "w"));
    }

    #[test]
    fn tcross_nullary_is_terminal_per_dimension() {
        let t = TCross::new(1, 3);
        let e0 = t.apply(&[]).unwrap();
        assert_eq!(e0.cells(0).len(), 1);
        assert_eq!(e0.cells(1).len(), 1);
    }

    #[test]
    fn tcross_binary_cells_are_pairs() {
        let t = TCross::new(1, 3);
        let x = loop_graph();
        let e2 = t.apply(&[x.clone(), x.clone()]).unwrap();
        let singles = freecat::free_cells(&x, 1, 3).unwrap().len();
        assert_eq!(e2.cells(1).len(), singles * singles);
    }

    #[test]
    fn tcross_left_unit_law_on_pairs() {
        let t = TCross::new(1, 3);
        let x = loop_graph();
        let inner_obj = t.apply(&[x.clone(), x.clone()]).unwrap();
        for d in 0..=1usize {
            for pair in inner_obj.cells(d) {
                let outer = t.unit(&inner_obj, d, pair).unwrap();
                let back = t.subst(&[vec![x.clone(), x.clone()]], d, &outer).unwrap();
                assert_eq!(back, *pair);
            }
        }
    }

    #[test]
    fn tcross_subst_concatenates_pairwise() {
        // a pair of paths substituted along two unary slots concatenates
        // componentwise
        let t = TCross::new(1, 7);
        let x = loop_graph();
        let path = |k: usize| {
            freecat::free_cells(&x, 1, k + 1)
                .unwrap()
                .into_iter()
                .find(|c| c.tree() == &Tree::line(k))
                .unwrap()
        };
        // cell of T^x_2(T^x_1(X), T^x_1(X)): two unit-labelled lines holding
        // inner paths of lengths 2 and 3
        let y = t.apply(&[x.clone()]).unwrap();
        let inner = |k: usize| tuple_id(1, &[path(k).canonical_id()]);
        let phi = |k: usize| freecat::unit(&y, 1, &inner(k)).unwrap().canonical_id();
        let outer = tuple_id(1, &[phi(2), phi(3)]);
        let flat = t
            .subst(&[vec![x.clone()], vec![x.clone()]], 1, &outer)
            .unwrap();
        assert_eq!(
            flat,
            tuple_id(1, &[path(2).canonical_id(), path(3).canonical_id()])
        );
    }

    #[test]
    fn operad_mt_terminal_is_plain_product() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let e2 = e.apply(&[x.clone(), x.clone()]).unwrap();
        assert_eq!(e2.cells(0).len(), 4);
        let e0 = e.apply(&[]).unwrap();
        assert_eq!(e0.cells(0).len(), 1);
    }

    #[test]
    fn unit_only_operad_matches_unit_multitensor() {
        let e = OperadMt::new(SetOperad::unit_only());
        let i = UnitMt::new(0);
        let x = two_set();
        let via_op = e.apply(&[x.clone()]).unwrap();
        let via_i = i.apply(&[x.clone()]).unwrap();
        assert_eq!(via_op.cells(0).len(), via_i.cells(0).len());
        assert!(e.apply(&[x.clone(), x.clone()]).unwrap().cells(0).is_empty());
    }

    #[test]
    fn terminal_operad_laws_hold() {
        assert!(SetOperad::terminal(4).check_laws().is_empty());
    }

    #[test]
    fn corrupted_operad_fails_laws() {
        // two binary operations with the unit absorbing into the wrong one
        let ops: BTreeMap<usize, Vec<String>> = [
            (1, vec!["u".to_string()]),
            (2, vec!["m".to_string(), "w".to_string()]),
        ]
        .into_iter()
        .collect();
        let mut subst = BTreeMap::new();
        subst.insert(("u".to_string(), vec!["u".to_string()]), "u".to_string());
        subst.insert(("u".to_string(), vec!["m".to_string()]), "w".to_string());
        subst.insert(("u".to_string(), vec!["w".to_string()]), "w".to_string());
        subst.insert(("m".to_string(), vec!["u".to_string(), "u".to_string()]), "m".to_string());
        subst.insert(("w".to_string(), vec!["u".to_string(), "u".to_string()]), "w".to_string());
        let op = SetOperad::new(ops, "u".to_string(), subst).unwrap();
        assert!(op.check_laws().iter().any(|m| m.contains("unit absorbs `m` incorrectly")));
    }

    #[test]
    fn multitensor_axioms_for_terminal_operad() {
        let e = OperadMt::new(SetOperad::terminal(4));
        let x = two_set();
        let panel = vec![vec![], vec![x.clone()], vec![x.clone(), x.clone()]];
        let double = vec![
            // (2; (1,1); singleton slices)
            vec![vec![vec![x.clone()]], vec![vec![x.clone()]]],
            // (1; (2); pair slice then singletons)
            vec![vec![vec![x.clone()], vec![x.clone()]]],
        ];
        let bad = check_multitensor(&e, &panel, &double).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn multitensor_axioms_for_tcross_micro() {
        let e = TCross::new(1, 3);
        let x = loop_graph();
        let panel = vec![vec![x.clone()]];
        let double = vec![vec![vec![vec![x.clone()]]]];
        let bad = check_multitensor(&e, &panel, &double).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn corrupted_substitution_fails_the_axioms() {
        // swap the two binary results so unit-right breaks
        let ops: BTreeMap<usize, Vec<String>> = [
            (1, vec!["u".to_string(), "s".to_string()]),
        ]
        .into_iter()
        .collect();
        let mut subst = BTreeMap::new();
        // u∘u = s is wrong on purpose
        subst.insert(("u".to_string(), vec!["u".to_string()]), "s".to_string());
        subst.insert(("u".to_string(), vec!["s".to_string()]), "s".to_string());
        subst.insert(("s".to_string(), vec!["u".to_string()]), "s".to_string());
        subst.insert(("s".to_string(), vec!["s".to_string()]), "u".to_string());
        let e = OperadMt::new(SetOperad::new(ops, "u".to_string(), subst).unwrap());
        let x = one_set();
        let bad = check_multitensor(&e, &[vec![x.clone()]], &[]).unwrap();
        assert!(!bad.is_empty());
    }

    #[test]
    fn unit_product_collapses_by_lambda() {
        let f = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let args = vec![x.clone(), x.clone()];
        let l = lambda_map(&f, &args).unwrap();
        assert!(l.is_iso());
        let r = rho_map(&f, &args).unwrap();
        assert!(r.is_iso());
    }

    #[test]
    fn subst_product_summands_count_compositions() {
        let e = OperadMt::new(SetOperad::terminal(4));
        let f = OperadMt::new(SetOperad::terminal(4));
        let sp = SubstProduct::new(&e, &f).unwrap();
        let x = one_set();
        let args = vec![x.clone(), x.clone(), x.clone()];
        let total = sp.apply(&args).unwrap();
        // one operation per arity and a single point: one cell per summand
        assert_eq!(total.cells(0).len(), compositions(3).len());
    }

    #[test]
    fn triangle_for_terminal_operad() {
        let e = OperadMt::new(SetOperad::terminal(4));
        let f = OperadMt::new(SetOperad::terminal(4));
        let x = two_set();
        let bad = check_triangle(&e, &f, &[x.clone(), x.clone()]).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn pentagon_for_terminal_operad() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let x = one_set();
        let bad = check_pentagon(&e, &e, &e, &e, &[x.clone(), x.clone(), x.clone()]).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn gamma_of_terminal_counts_words() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let g = Gamma::new(&e, 3);
        let gx = g.apply(&two_set()).unwrap();
        assert_eq!(gx.cells(0).len(), 1 + 2 + 4 + 8);
    }

    #[test]
    fn gamma_of_unit_is_identity() {
        let i = UnitMt::new(0);
        let g = Gamma::new(&i, 3);
        let x = two_set();
        let gx = g.apply(&x).unwrap();
        assert_eq!(gx.cells(0).len(), x.cells(0).len());
    }

    #[test]
    fn gamma_monad_laws_small() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let g = Gamma::new(&e, 3);
        let x = one_set();
        let gx = g.apply(&x).unwrap();
        // unit laws
        for c in gx.cells(0) {
            let outer = g.unit(&gx, 0, c).unwrap();
            assert_eq!(g.mult(&x, 0, &outer).unwrap(), *c, "outer unit at {c}");
        }
        let eta = g.unit_map(&x).unwrap();
        let geta = g.map(&eta).unwrap();
        for c in gx.cells(0) {
            let inner = geta.apply(0, c).unwrap();
            assert_eq!(g.mult(&x, 0, inner).unwrap(), *c, "inner unit at {c}");
        }
        // associativity at a smaller arity so that Γ³ stays materializable
        let e2 = OperadMt::new(SetOperad::terminal(2));
        let g2 = Gamma::new(&e2, 2);
        let gx2 = g2.apply(&x).unwrap();
        let mult_x = g2.mult_table(&x).unwrap();
        let mult_gx = g2.mult_table(&gx2).unwrap();
        // Γ(mult) as a partial relabelling
        let ggx2 = g2.apply(&gx2).unwrap();
        for c in g2.apply(&ggx2).unwrap().cells(0) {
            let route1 = mult_gx
                .get(&(0, c.clone()))
                .and_then(|v| mult_x.get(&(0, v.clone())));
            let route2 = (|| {
                let (k, inner) = g2.decode(c).ok()?;
                let supports = g2.e.arg_supports(&vec![ggx2.clone(); k], 0, &inner).ok()?;
                // map every support cell through mult, building the image
                // of Γ(mult) when total on the support
                let mut maps = Vec::new();
                for _ in 0..k {
                    let m = GlobMap::new(
                        ggx2.clone(),
                        gx2.clone(),
                        vec![ggx2
                            .cells(0)
                            .iter()
                            .filter_map(|cc| {
                                mult_x.get(&(0, cc.clone())).map(|v| (cc.clone(), v.clone()))
                            })
                            .collect()],
                    )
                    .ok()?;
                    maps.push(m);
                }
                drop(supports);
                let mapped = g2.e.map_cell(&maps, 0, &inner).ok()?;
                mult_x.get(&(0, format!("g{k}/{mapped}"))).cloned()
            })();
            if let (Some(a), Some(b)) = (route1, route2.as_ref()) {
                assert_eq!(a, b, "associativity at {c}");
            }
        }
    }

    #[test]
    fn gamma2_is_a_bijection_onto_the_bounded_product() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let f = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let gf = Gamma::new(&f, 3);
        let ge = Gamma::new(&e, 3);
        let dom = ge.apply(&gf.apply(&x).unwrap()).unwrap();
        let sp = SubstProduct::new(&e, &f).unwrap();
        let gsp = Gamma::new(&sp, 3);
        let cod = gsp.apply(&x).unwrap();
        let mut seen = std::collections::BTreeSet::new();
        for c in dom.cells(0) {
            match gamma2(&e, &f, &x, 3, 0, c) {
                Ok(img) => {
                    assert!(cod.has_cell(0, &img), "{img} missing");
                    assert!(seen.insert(img));
                }
                Err(Error::Unsupported(_)) => {}
                Err(err) => panic!("{err}"),
            }
        }
        assert_eq!(seen.len(), cod.cells(0).len());
    }

    #[test]
    fn gamma2_defining_square_commutes() {
        // injections first or the tagged injection after γ2 agree
        let e = OperadMt::new(SetOperad::terminal(3));
        let f = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let gf = Gamma::new(&f, 3);
        let gfx = gf.apply(&x).unwrap();
        let sp = SubstProduct::new(&e, &f).unwrap();
        for m in 0..=2usize {
            for combo in (0..m).map(|_| 1..=2usize).multi_cartesian_product() {
                let injs: Vec<GlobMap> =
                    combo.iter().map(|&n| gf.injection(&x, n).unwrap()).collect();
                let sources: Vec<GlobSet> =
                    combo.iter().map(|&n| f.apply(&vec![x.clone(); n]).unwrap()).collect();
                let total: usize = combo.iter().sum();
                if total > 3 {
                    continue;
                }
                for core in e.apply(&sources).unwrap().cells(0) {
                    let outer = e.map_cell(&injs, 0, core).unwrap();
                    let via = gamma2(&e, &f, &x, 3, 0, &format!("g{m}/{outer}")).unwrap();
                    let tag = SubstProduct::tag(&combo);
                    assert_eq!(via, format!("g{total}/{tag}/{core}"));
                }
            }
            if m == 0 {
                // the empty grade has the empty composition
                let outer = e.apply(&[]).unwrap().cells(0)[0].clone();
                let via = gamma2(&e, &f, &x, 3, 0, &format!("g0/{outer}")).unwrap();
                assert_eq!(via, format!("g0/c()/{outer}"));
            }
        }
        drop(gfx);
    }

    #[test]
    fn unit_cartesian_naturality_panel() {
        let e = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let y = one_set();
        let maps = crate::glob::maps_between(&x, &y);
        let bad = check_unit_cartesian(&e, &maps).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn distributivity_over_coproducts() {
        // E_2 applied to a coproduct decomposes into summands
        let e = OperadMt::new(SetOperad::terminal(3));
        let x = two_set();
        let y = GlobSetBuilder::new(0).cell0("z").finish().unwrap();
        let parts = [x.clone(), y.clone()];
        let (xy, injs) = crate::glob::coproduct(&parts).unwrap();
        let total = e.apply(&[xy.clone(), x.clone()]).unwrap();
        let mut hit = std::collections::BTreeSet::new();
        for (idx, part) in parts.iter().enumerate() {
            let id_x = GlobMap::identity(&x);
            for c in e.apply(&[part.clone(), x.clone()]).unwrap().cells(0) {
                let img = e.map_cell(&[injs[idx].clone(), id_x.clone()], 0, c).unwrap();
                assert!(total.has_cell(0, &img));
                assert!(hit.insert(img));
            }
        }
        assert_eq!(hit.len(), total.cells(0).len());
    }

    #[test]
    fn dist_law_unit_axioms_on_the_loop() {
        let x = loop_graph();
        let word_bound = 2;
        let size_bound = 3;
        let p = ProductMt::new(1);
        let gm = Gamma::new(&p, word_bound);
        let mx = gm.apply(&x).unwrap();
        // axiom 1: a free cell with one-letter-word labels maps to the
        // one-letter word of the cell
        for d in 0..=1usize {
            for c in freecat::free_cells(&x, d, size_bound).unwrap() {
                let g = c.tree().glob();
                let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
                for dd in 0..=g.trunc() {
                    for id in g.cells(dd) {
                        let img = c.label().apply(dd, id).unwrap();
                        maps[dd].insert(id.clone(), format!("g1/{}", tuple_id(dd, &[img.clone()])));
                    }
                }
                let lifted =
                    FreeCell::new(c.tree().clone(), GlobMap::new(g, mx.clone(), maps).unwrap())
                        .unwrap();
                let out = dist_law_cell(&x, word_bound, size_bound, &lifted).unwrap();
                assert_eq!(out, GradedWord { grade: 1, cells: vec![c] });
            }
        }
        // axiom 2: the unit free cell over a word maps to the word of units
        for d in 0..=1usize {
            for w in mx.cells(d) {
                let u = freecat::unit(&mx, d, w).unwrap();
                let out = dist_law_cell(&x, word_bound, size_bound, &u).unwrap();
                let (n, word) = split_grade(w).unwrap();
                let letters = p.decode(&vec![x.clone(); n], d, word).unwrap();
                let expect: Vec<FreeCell> = letters
                    .iter()
                    .map(|l| freecat::unit(&x, d, l).unwrap())
                    .collect();
                assert_eq!(out, GradedWord { grade: n, cells: expect });
            }
        }
    }

    #[test]
    fn dist_law_bijective_on_point_grades() {
        // at truncation 0 the law is a bijection on every graded piece
        let x = GlobSetBuilder::new(0).cell0("p").finish().unwrap();
        let p = ProductMt::new(0);
        let gm = Gamma::new(&p, 3);
        let mx = gm.apply(&x).unwrap();
        let mut by_grade: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for c in freecat::free_cells(&mx, 0, 3).unwrap() {
            let out = dist_law_cell(&x, 3, 3, &c).unwrap();
            by_grade
                .entry(out.grade)
                .or_default()
                .push(tuple_id(0, &out.cells.iter().map(|f| f.canonical_id()).collect::<Vec<_>>()));
        }
        for (n, imgs) in by_grade {
            let tc = TCross::new(0, 3);
            let target = tc.apply(&vec![x.clone(); n]).unwrap();
            let distinct: std::collections::BTreeSet<_> = imgs.iter().collect();
            assert_eq!(distinct.len(), imgs.len(), "injective at grade {n}");
            assert_eq!(imgs.len(), target.cells(0).len(), "surjective at grade {n}");
        }
    }
}
