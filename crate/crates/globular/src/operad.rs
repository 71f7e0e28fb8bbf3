//! Normalised collections and operads over the free-category monad.
//!
//! A collection assigns to every dimension a set of operations, each with a
//! pasting-tree arity, compatibly with boundaries; dimension 0 carries no
//! operations (normalisation). Applying a collection to a globular set
//! pairs operations with labellings of their arity realizations. An operad
//! additionally carries unit operations and a substitution; the identity
//! operad has all trees as operations and substitutes by tree substitution.
//!
//! The bar construction turns a collection into a multitensor by reading
//! off the cells between the endpoints of a sequence, and is one side of
//! the equivalence with cartesian multitensor maps into the
//! product-of-free-cells multitensor.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::freecat::{self, FreeCell, FreeOverFree};
use crate::glob::{self, CellId, GlobMap, GlobSet};
use crate::multitensor::{self, Multitensor, TCross};
use crate::tree::{self, globe_tree, sigma_map, tau_map, Tree};

/// One operation of a finitely presented collection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpDecl {
    pub id: String,
    pub arity: Tree,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CollectionKind {
    /// Every tree is an operation, identified by its display form; bounded
    /// enumerations use the stored size bound.
    Identity { size_bound: usize },
    /// Finitely presented operations per dimension (index d-1 holds dim d).
    Table(Vec<Vec<OpDecl>>),
}

/// A normalised collection: operation sets graded by dimension 1..=trunc,
/// with tree arities and boundary maps lying over the tree boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collection {
    trunc: usize,
    kind: CollectionKind,
}

impl Collection {
    pub fn from_table(trunc: usize, ops: Vec<Vec<OpDecl>>) -> Result<Self> {
        if ops.len() != trunc {
            return Err(Error::invalid("operation levels must cover dimensions 1..=trunc"));
        }
        let c = Collection { trunc, kind: CollectionKind::Table(ops) };
        c.validate()?;
        Ok(c)
    }

    /// The identity collection: operations at dimension d are the trees of
    /// dimension d (bounded by size for enumeration), with arity themselves.
    pub fn identity(trunc: usize, size_bound: usize) -> Self {
        Collection { trunc, kind: CollectionKind::Identity { size_bound } }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, CollectionKind::Identity { .. })
    }

    fn validate(&self) -> Result<()> {
        let CollectionKind::Table(ops) = &self.kind else {
            return Ok(());
        };
        let mut seen = std::collections::BTreeSet::new();
        for (idx, level) in ops.iter().enumerate() {
            let d = idx + 1;
            for op in level {
                // ids must split safely inside the bracket grammar: balanced
                // brackets and no separators at depth zero
                if multitensor::split_top(&op.id, '¦').map_or(true, |v| v.len() != 1)
                    || multitensor::split_top(&op.id, '§').map_or(true, |v| v.len() != 1)
                {
                    return Err(Error::invalid(format!(
                        "operation id `{}` uses reserved syntax",
                        op.id
                    )));
                }
                if !seen.insert(op.id.clone()) {
                    return Err(Error::invalid(format!("operation id `{}` is not unique", op.id)));
                }
                if op.arity.dim() != d {
                    return Err(Error::invalid(format!("arity of `{}` has the wrong dimension", op.id)));
                }
                match d {
                    1 => {
                        if op.src.is_some() || op.tgt.is_some() {
                            return Err(Error::invalid(format!(
                                "dimension-1 operation `{}` has explicit boundaries",
                                op.id
                            )));
                        }
                    }
                    _ => {
                        let b = op.arity.boundary()?;
                        for side in [&op.src, &op.tgt] {
                            let sid = side.as_ref().ok_or_else(|| {
                                Error::invalid(format!("operation `{}` misses a boundary", op.id))
                            })?;
                            let decl = level_find(&ops[idx - 1], sid).ok_or_else(|| {
                                Error::invalid(format!("boundary `{sid}` of `{}` unknown", op.id))
                            })?;
                            if decl.arity != b {
                                return Err(Error::invalid(format!(
                                    "boundary `{sid}` of `{}` has arity {}, expected {}",
                                    op.id, decl.arity, b
                                )));
                            }
                        }
                    }
                }
            }
        }
        // globularity of the boundary maps
        for idx in 2..ops.len() {
            for op in &ops[idx] {
                let s = level_find(&ops[idx - 1], op.src.as_ref().unwrap()).unwrap();
                let t = level_find(&ops[idx - 1], op.tgt.as_ref().unwrap()).unwrap();
                if s.src != t.src || s.tgt != t.tgt {
                    return Err(Error::invalid(format!("globularity fails at `{}`", op.id)));
                }
            }
        }
        Ok(())
    }

    /// Operations at a dimension, as declarations.
    pub fn ops(&self, dim: usize) -> Result<Vec<OpDecl>> {
        if dim == 0 || dim > self.trunc {
            return Err(Error::invalid(format!("no operations at dimension {dim}")));
        }
        match &self.kind {
            CollectionKind::Identity { size_bound } => Ok(tree::enumerate_trees(dim, *size_bound)
                .into_iter()
                .map(|t| {
                    let b = t.boundary().ok().map(|b| b.to_string());
                    OpDecl { id: t.to_string(), arity: t, src: b.clone(), tgt: b }
                })
                .map(|mut o| {
                    if dim == 1 {
                        o.src = None;
                        o.tgt = None;
                    }
                    o
                })
                .collect()),
            CollectionKind::Table(ops) => Ok(ops[dim - 1].clone()),
        }
    }

    pub fn arity_of(&self, dim: usize, id: &str) -> Result<Tree> {
        match &self.kind {
            CollectionKind::Identity { .. } => multitensor::parse_tree(id, dim),
            CollectionKind::Table(ops) => level_find(&ops[dim - 1], id)
                .map(|o| o.arity.clone())
                .ok_or_else(|| Error::invalid(format!("unknown operation `{id}` at dim {dim}"))),
        }
    }

    /// The boundary operation (source and target agree on arities; for
    /// dimension 1 there is none).
    pub fn src_op(&self, dim: usize, id: &str) -> Result<Option<String>> {
        if dim == 1 {
            return Ok(None);
        }
        match &self.kind {
            CollectionKind::Identity { .. } => {
                Ok(Some(multitensor::parse_tree(id, dim)?.boundary()?.to_string()))
            }
            CollectionKind::Table(ops) => level_find(&ops[dim - 1], id)
                .map(|o| o.src.clone())
                .ok_or_else(|| Error::invalid(format!("unknown operation `{id}` at dim {dim}"))),
        }
    }

    pub fn tgt_op(&self, dim: usize, id: &str) -> Result<Option<String>> {
        if dim == 1 {
            return Ok(None);
        }
        match &self.kind {
            CollectionKind::Identity { .. } => {
                Ok(Some(multitensor::parse_tree(id, dim)?.boundary()?.to_string()))
            }
            CollectionKind::Table(ops) => level_find(&ops[dim - 1], id)
                .map(|o| o.tgt.clone())
                .ok_or_else(|| Error::invalid(format!("unknown operation `{id}` at dim {dim}"))),
        }
    }
}

fn level_find<'a>(level: &'a [OpDecl], id: &str) -> Option<&'a OpDecl> {
    level.iter().find(|o| o.id == id)
}

/// A cell of the collection applied to a globular set: an operation with a
/// labelling of its arity realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpCell {
    pub op: String,
    pub label: GlobMap,
}

impl OpCell {
    pub fn encode(&self) -> CellId {
        let g = self.label.source();
        let dims: Vec<String> = (0..=g.trunc())
            .map(|d| {
                g.cells(d)
                    .iter()
                    .map(|id| self.label.apply(d, id).unwrap().clone())
                    .collect::<Vec<_>>()
                    .join("¦")
            })
            .collect();
        format!("⟦{}¦{}⟧", self.op, dims.join("§"))
    }
}

/// Parse an encoded operation cell into its operation and raw per-cell
/// image strings, without checking the images against a carrier.
pub fn parse_op_parts(
    coll: &Collection,
    dim: usize,
    cell: &str,
) -> Result<(String, BTreeMap<(usize, CellId), String>)> {
    let inner = cell
        .strip_prefix('⟦')
        .and_then(|s| s.strip_suffix('⟧'))
        .ok_or_else(|| Error::invalid(format!("`{cell}` is not an operation cell")))?;
    let blocks = multitensor::split_top(inner, '§')?;
    let mut first = multitensor::split_top(&blocks[0], '¦')?;
    let op = first.remove(0);
    let arity = coll.arity_of(dim, &op)?;
    let g = arity.glob();
    if blocks.len() != g.trunc() + 1 {
        return Err(Error::invalid(format!("`{cell}` has the wrong number of levels")));
    }
    let mut out = BTreeMap::new();
    for d in 0..=g.trunc() {
        let imgs: Vec<String> = if d == 0 {
            first.clone()
        } else if blocks[d].is_empty() {
            Vec::new()
        } else {
            multitensor::split_top(&blocks[d], '¦')?
        };
        if imgs.len() != g.cells(d).len() {
            return Err(Error::invalid(format!("`{cell}` has wrong image count at dim {d}")));
        }
        for (c, img) in g.cells(d).iter().zip(imgs) {
            out.insert((d, c.clone()), img);
        }
    }
    Ok((op, out))
}

/// Parse an encoded operation cell against a collection and carrier.
pub fn decode_op_cell(
    coll: &Collection,
    x: &GlobSet,
    dim: usize,
    cell: &str,
) -> Result<OpCell> {
    let inner = cell
        .strip_prefix('⟦')
        .and_then(|s| s.strip_suffix('⟧'))
        .ok_or_else(|| Error::invalid(format!("`{cell}` is not an operation cell")))?;
    let blocks = multitensor::split_top(inner, '§')?;
    let mut first = multitensor::split_top(&blocks[0], '¦')?;
    let op = first.remove(0);
    let arity = coll.arity_of(dim, &op)?;
    let g = arity.glob();
    if blocks.len() != g.trunc() + 1 {
        return Err(Error::invalid(format!("`{cell}` has the wrong number of levels")));
    }
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    for d in 0..=g.trunc() {
        let imgs: Vec<String> = if d == 0 {
            first.clone()
        } else if blocks[d].is_empty() {
            Vec::new()
        } else {
            multitensor::split_top(&blocks[d], '¦')?
        };
        if imgs.len() != g.cells(d).len() {
            return Err(Error::invalid(format!("`{cell}` has wrong image count at dim {d}")));
        }
        for (c, img) in g.cells(d).iter().zip(imgs) {
            maps[d].insert(c.clone(), img);
        }
    }
    Ok(OpCell { op, label: GlobMap::new(g, x.clone(), maps)? })
}

/// All cells of the collection applied to X at a dimension: operations of
/// that dimension with arity size at most `max_size`, with every labelling.
pub fn apply_cells(
    coll: &Collection,
    x: &GlobSet,
    dim: usize,
    max_size: usize,
) -> Result<Vec<OpCell>> {
    if dim == 0 || dim > coll.trunc() || dim > x.trunc() {
        return Err(Error::DimExceedsTrunc { dim, trunc: coll.trunc().min(x.trunc()) });
    }
    let mut out = Vec::new();
    for op in coll.ops(dim)? {
        if op.arity.size() > max_size {
            continue;
        }
        for label in glob::maps_between(&op.arity.glob(), x) {
            out.push(OpCell { op: op.id.clone(), label });
        }
    }
    Ok(out)
}

/// Source of an applied cell: the boundary operation with the labelling
/// restricted along σ.
pub fn op_cell_src(coll: &Collection, dim: usize, c: &OpCell) -> Result<OpCell> {
    let arity = coll.arity_of(dim, &c.op)?;
    let sop = coll
        .src_op(dim, &c.op)?
        .ok_or_else(|| Error::invalid("dimension-1 cells have 0-cell boundaries"))?;
    Ok(OpCell { op: sop, label: sigma_map(&arity)?.then(&c.label)? })
}

pub fn op_cell_tgt(coll: &Collection, dim: usize, c: &OpCell) -> Result<OpCell> {
    let arity = coll.arity_of(dim, &c.op)?;
    let top = coll
        .tgt_op(dim, &c.op)?
        .ok_or_else(|| Error::invalid("dimension-1 cells have 0-cell boundaries"))?;
    Ok(OpCell { op: top, label: tau_map(&arity)?.then(&c.label)? })
}

/// Split an applied cell of dimension >= 1 into its 0-cell sequence and the
/// cell over the sequence of homs; the operation part is untouched.
pub fn hom_decompose_a(
    coll: &Collection,
    x: &GlobSet,
    dim: usize,
    c: &OpCell,
) -> Result<(Vec<CellId>, OpCell, GlobMap)> {
    let arity = coll.arity_of(dim, &c.op)?;
    let g = arity.glob();
    let m = arity.kids().len();
    let ys: Vec<CellId> = (0..=m)
        .map(|j| Ok(c.label.apply(0, &j.to_string())?.clone()))
        .collect::<Result<_>>()?;
    let (star, bar) = glob::star_pullback(x, &glob::ZeroSeq::new(x, ys.clone())?)?;
    // factor the labelling through the sequence of homs
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    for j in 0..=m {
        maps[0].insert(j.to_string(), j.to_string());
    }
    for d in 1..=g.trunc() {
        for id in g.cells(d) {
            let (seg, _) = glob::split_hom_tag(id)
                .ok_or_else(|| Error::invalid("arity realization cell without a segment"))?;
            let img = c.label.apply(d, id)?;
            maps[d].insert(id.clone(), format!("h{seg}/{img}"));
        }
    }
    let inner = OpCell { op: c.op.clone(), label: GlobMap::new(g, star, maps)? };
    Ok((ys, inner, bar))
}

// ---------------------------------------------------------------------------
// Operads
// ---------------------------------------------------------------------------

/// One stored substitution: an outer operation, an operation assigned to
/// every positive-dimension cell of its arity realization, and the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstEntry {
    pub outer: String,
    pub labelling: BTreeMap<CellId, String>,
    pub result: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum OperadStructure {
    /// Units are globe trees; substitution is tree substitution.
    Identity,
    Table {
        units: BTreeMap<usize, String>,
        subst: Vec<SubstEntry>,
    },
}

/// A collection with unit operations and substitution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operad {
    coll: Collection,
    structure: OperadStructure,
}

impl Operad {
    /// The identity operad, bounded for enumeration.
    pub fn identity(trunc: usize, size_bound: usize) -> Self {
        Operad {
            coll: Collection::identity(trunc, size_bound),
            structure: OperadStructure::Identity,
        }
    }

    pub fn from_table(
        coll: Collection,
        units: BTreeMap<usize, String>,
        subst: Vec<SubstEntry>,
    ) -> Result<Self> {
        let op = Operad { coll, structure: OperadStructure::Table { units, subst } };
        op.validate_shape()?;
        Ok(op)
    }

    pub fn collection(&self) -> &Collection {
        &self.coll
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.structure, OperadStructure::Identity)
    }

    fn validate_shape(&self) -> Result<()> {
        let OperadStructure::Table { units, subst } = &self.structure else {
            return Ok(());
        };
        for d in 1..=self.coll.trunc() {
            let u = units
                .get(&d)
                .ok_or_else(|| Error::invalid(format!("missing unit at dimension {d}")))?;
            if self.coll.arity_of(d, u)? != globe_tree(d) {
                return Err(Error::invalid(format!("unit `{u}` does not have the globe arity")));
            }
        }
        for e in subst {
            // dimension of the outer operation
            let d = (1..=self.coll.trunc())
                .find(|&d| self.coll.arity_of(d, &e.outer).is_ok())
                .ok_or_else(|| Error::invalid(format!("unknown outer operation `{}`", e.outer)))?;
            let arity = self.coll.arity_of(d, &e.outer)?;
            let g = arity.glob();
            for dd in 1..=g.trunc() {
                for c in g.cells(dd) {
                    let o = e.labelling.get(c).ok_or_else(|| {
                        Error::invalid(format!("substitution into `{}` misses cell `{c}`", e.outer))
                    })?;
                    self.coll.arity_of(dd, o)?;
                }
            }
            self.coll.arity_of(d, &e.result)?;
        }
        Ok(())
    }

    pub fn unit_op(&self, dim: usize) -> Result<String> {
        match &self.structure {
            OperadStructure::Identity => Ok(globe_tree(dim).to_string()),
            OperadStructure::Table { units, .. } => units
                .get(&dim)
                .cloned()
                .ok_or_else(|| Error::MissingEntry(format!("unit at dimension {dim}"))),
        }
    }

    /// Substitute operations into an operation. The assignment covers the
    /// positive-dimension cells of the arity realization.
    pub fn substitute(
        &self,
        dim: usize,
        outer: &str,
        asg: &BTreeMap<CellId, String>,
    ) -> Result<String> {
        match &self.structure {
            OperadStructure::Identity => {
                let arity = multitensor::parse_tree(outer, dim)?;
                let g = arity.glob();
                let mut trees = BTreeMap::new();
                for d in 0..=g.trunc() {
                    for c in g.cells(d) {
                        let t = if d == 0 {
                            Tree::leaf()
                        } else {
                            let o = asg.get(c).ok_or_else(|| {
                                Error::incompatible(format!("no operation at cell `{c}`"))
                            })?;
                            multitensor::parse_tree(o, d)?
                        };
                        trees.insert((d, c.clone()), t);
                    }
                }
                Ok(tree::substitute(&arity, &trees)?.to_string())
            }
            OperadStructure::Table { subst, .. } => subst
                .iter()
                .find(|e| e.outer == outer && &e.labelling == asg)
                .map(|e| e.result.clone())
                .ok_or_else(|| {
                    Error::MissingEntry(format!("substitution into `{outer}` at {asg:?}"))
                }),
        }
    }

    pub fn subst_entries(&self) -> Vec<SubstEntry> {
        match &self.structure {
            OperadStructure::Identity => Vec::new(),
            OperadStructure::Table { subst, .. } => subst.clone(),
        }
    }
}

/// Build an operad at truncation 1 from an operad in finite sets: an
/// operation of arity n becomes a dimension-1 operation with the line
/// arity.
pub fn embed_set_operad(so: &multitensor::SetOperad) -> Result<Operad> {
    let mut level = Vec::new();
    for n in so.arities() {
        for o in so.ops(n) {
            level.push(OpDecl {
                id: o.clone(),
                arity: Tree::line(n),
                src: None,
                tgt: None,
            });
        }
    }
    let coll = Collection::from_table(1, vec![level])?;
    let mut subst = Vec::new();
    for ((outer, inners), result) in so.subst_table() {
        let k = so.arity_of(outer)?;
        let mut labelling = BTreeMap::new();
        for (i, o) in inners.iter().enumerate() {
            labelling.insert(format!("h{}/0", i + 1), o.clone());
        }
        debug_assert_eq!(k, inners.len());
        subst.push(SubstEntry { outer: outer.clone(), labelling, result: result.clone() });
    }
    let units = [(1usize, so.unit_op().to_string())].into_iter().collect();
    Operad::from_table(coll, units, subst)
}

/// Exhaustive law check of an operad presentation: unit arities, unit laws,
/// arity compatibility of the substitution against tree substitution,
/// boundary coherence, and associativity on the stored support.
pub fn check_operad(op: &Operad, size_bound: usize) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    let coll = op.collection();
    if let Err(e) = coll.validate() {
        bad.push(format!("collection: {e}"));
    }
    for d in 1..=coll.trunc() {
        match op.unit_op(d) {
            Ok(u) => {
                if coll.arity_of(d, &u)? != globe_tree(d) {
                    bad.push(format!("unit at dimension {d} has a non-globe arity"));
                }
            }
            Err(e) => bad.push(format!("{e}")),
        }
    }
    // inner unit law: substituting units into b returns b
    for d in 1..=coll.trunc() {
        for b in coll.ops(d)? {
            if b.arity.size() > size_bound {
                continue;
            }
            let g = b.arity.glob();
            let mut asg = BTreeMap::new();
            for dd in 1..=g.trunc() {
                for c in g.cells(dd) {
                    asg.insert(c.clone(), op.unit_op(dd)?);
                }
            }
            match op.substitute(d, &b.id, &asg) {
                Ok(r) if r == b.id => {}
                Ok(r) => bad.push(format!("`{}` absorbs units into `{r}`", b.id)),
                Err(Error::MissingEntry(m)) => bad.push(format!("missing: {m}")),
                Err(e) => return Err(e),
            }
        }
    }
    // outer unit law: substituting b and its boundary operations into the
    // unit globe returns b
    for d in 1..=coll.trunc() {
        for b in coll.ops(d)? {
            if b.arity.size() > size_bound {
                continue;
            }
            // boundary chains down to dimension 1
            let mut srcs = vec![b.id.clone()];
            let mut tgts = vec![b.id.clone()];
            for e in (2..=d).rev() {
                let s = coll.src_op(e, srcs.last().unwrap())?.expect("dim >= 2");
                let t = coll.tgt_op(e, tgts.last().unwrap())?.expect("dim >= 2");
                srcs.push(s);
                tgts.push(t);
            }
            srcs.reverse();
            tgts.reverse();
            // the globe realization has σ/τ cells at every dimension below d
            let mut asg = BTreeMap::new();
            for e in 1..d {
                let reps = "h1/".repeat(e);
                asg.insert(format!("{reps}0"), srcs[e - 1].clone());
                asg.insert(format!("{reps}1"), tgts[e - 1].clone());
            }
            asg.insert(format!("{}0", "h1/".repeat(d)), b.id.clone());
            match op.substitute(d, &op.unit_op(d)?, &asg) {
                Ok(r) if r == b.id => {}
                Ok(r) => bad.push(format!("unit globe collapses `{}` into `{r}`", b.id)),
                Err(Error::MissingEntry(m)) => bad.push(format!("missing: {m}")),
                Err(e) => return Err(e),
            }
        }
    }
    // arity compatibility: the result arity is the tree substitution of the
    // assigned arities
    for e in op.subst_entries() {
        let d = (1..=coll.trunc())
            .find(|&d| coll.arity_of(d, &e.outer).is_ok())
            .ok_or_else(|| Error::invalid("unknown outer operation"))?;
        let arity = coll.arity_of(d, &e.outer)?;
        let g = arity.glob();
        let mut trees = BTreeMap::new();
        for dd in 0..=g.trunc() {
            for c in g.cells(dd) {
                let t = if dd == 0 {
                    Tree::leaf()
                } else {
                    coll.arity_of(dd, &e.labelling[c])?
                };
                trees.insert((dd, c.clone()), t);
            }
        }
        let expect = tree::substitute(&arity, &trees)?;
        if coll.arity_of(d, &e.result)? != expect {
            bad.push(format!(
                "substitution into `{}` lands at arity {}, expected {expect}",
                e.outer,
                coll.arity_of(d, &e.result)?
            ));
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------------------
// The bar construction
// ---------------------------------------------------------------------------

/// The multitensor of a collection: `Ā_k(X_1..X_k)` consists of the applied
/// cells over the sequence `(X_1..X_k)` whose endpoints are 0 and k, one
/// dimension down. When the collection is an operad, the unit and
/// substitution transport along the free-category structure.
pub struct Bar<'a> {
    coll: &'a Collection,
    operad: Option<&'a Operad>,
    pub size_bound: usize,
}

impl<'a> Bar<'a> {
    pub fn of_collection(coll: &'a Collection, size_bound: usize) -> Self {
        Bar { coll, operad: None, size_bound }
    }

    pub fn of_operad(op: &'a Operad, size_bound: usize) -> Self {
        Bar { coll: op.collection(), operad: Some(op), size_bound }
    }

    fn seq_of(&self, args: &[GlobSet]) -> Result<GlobSet> {
        glob::seq_at(args, self.coll.trunc())
    }
}

impl Multitensor for Bar<'_> {
    fn trunc(&self) -> usize {
        self.coll.trunc() - 1
    }

    fn apply(&self, args: &[GlobSet]) -> Result<GlobSet> {
        let sq = self.seq_of(args)?;
        let k = args.len();
        let trunc = self.trunc();
        let mut cells = vec![Vec::new(); trunc + 1];
        let mut src = vec![BTreeMap::new(); trunc];
        let mut tgt = vec![BTreeMap::new(); trunc];
        for d in 0..=trunc {
            // the vertex walk of a labelling into a sequence moves forward
            // one step per kid, so only arities with exactly k kids admit
            // cells between the endpoints
            let mut qualifying = Vec::new();
            for op in self.coll.ops(d + 1)? {
                if op.arity.size() > self.size_bound || op.arity.kids().len() != k {
                    continue;
                }
                for label in glob::maps_between(&op.arity.glob(), &sq) {
                    qualifying.push(OpCell { op: op.id.clone(), label });
                }
            }
            for c in qualifying {
                let arity = self.coll.arity_of(d + 1, &c.op)?;
                let s0 = c.label.apply(0, "0")?;
                let t0 = c.label.apply(0, &arity.kids().len().to_string())?;
                if s0 != "0" || t0 != &k.to_string() {
                    continue;
                }
                let id = c.encode();
                if d >= 1 {
                    src[d - 1].insert(id.clone(), op_cell_src(self.coll, d + 1, &c)?.encode());
                    tgt[d - 1].insert(id.clone(), op_cell_tgt(self.coll, d + 1, &c)?.encode());
                }
                cells[d].push(id);
            }
        }
        GlobSet::new_generated(trunc, cells, src, tgt)
    }

    fn map_cell(&self, maps: &[GlobMap], dim: usize, cell: &str) -> Result<CellId> {
        let sources: Vec<GlobSet> = maps.iter().map(|m| m.source().clone()).collect();
        let sq = self.seq_of(&sources)?;
        let c = decode_op_cell(self.coll, &sq, dim + 1, cell)?;
        // relabel along the sequence of maps
        let g = c.label.source().clone();
        let mut table = vec![BTreeMap::new(); g.trunc() + 1];
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                let img = c.label.apply(d, id)?;
                let new = if d == 0 || glob::split_hom_tag(img).is_none() {
                    img.clone()
                } else {
                    let (i, rest) = glob::split_hom_tag(img).unwrap();
                    format!("h{i}/{}", maps[i - 1].apply(d - 1, rest)?)
                };
                table[d].insert(id.clone(), new);
            }
        }
        let targets: Vec<GlobSet> = maps.iter().map(|m| m.target().clone()).collect();
        let tq = self.seq_of(&targets)?;
        Ok(OpCell { op: c.op, label: GlobMap::new(g, tq, table)? }.encode())
    }

    fn map_cell_fn(
        &self,
        _sources: &[GlobSet],
        dim: usize,
        cell: &str,
        f: &dyn Fn(usize, usize, &str) -> Result<CellId>,
    ) -> Result<CellId> {
        let (op, imgs) = parse_op_parts(self.coll, dim + 1, cell)?;
        let arity = self.coll.arity_of(dim + 1, &op)?;
        let g = arity.glob();
        let mut out = BTreeMap::new();
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                let img = &imgs[&(d, id.clone())];
                let new = if d == 0 {
                    img.clone()
                } else {
                    let (i, rest) = glob::split_hom_tag(img)
                        .ok_or_else(|| Error::invalid("label outside a sequence hom"))?;
                    format!("h{i}/{}", f(i - 1, d - 1, rest)?)
                };
                out.insert((d, id.clone()), new);
            }
        }
        let dims: Vec<String> = (0..=g.trunc())
            .map(|d| {
                g.cells(d)
                    .iter()
                    .map(|id| out[&(d, id.clone())].clone())
                    .collect::<Vec<_>>()
                    .join("¦")
            })
            .collect();
        Ok(format!("⟦{op}¦{}⟧", dims.join("§")))
    }

    fn unit(&self, x: &GlobSet, dim: usize, cell: &str) -> Result<CellId> {
        let op = self
            .operad
            .ok_or_else(|| Error::Unsupported("bar of a bare collection has no unit".into()))?;
        let u = op.unit_op(dim + 1)?;
        let sq = self.seq_of(std::slice::from_ref(x))?;
        let g = globe_tree(dim + 1).glob();
        let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
        maps[0].insert("0".to_string(), "0".to_string());
        maps[0].insert("1".to_string(), "1".to_string());
        for j in 0..dim {
            let reps = "h1/".repeat(j + 1);
            maps[j + 1].insert(format!("{reps}0"), format!("h1/{}", x.src_k(dim, cell, j)?));
            maps[j + 1].insert(format!("{reps}1"), format!("h1/{}", x.tgt_k(dim, cell, j)?));
        }
        let reps = "h1/".repeat(dim + 1);
        maps[dim + 1].insert(format!("{reps}0"), format!("h1/{cell}"));
        Ok(OpCell { op: u, label: GlobMap::new(g, sq, maps)? }.encode())
    }

    fn subst(&self, slices: &[Vec<GlobSet>], dim: usize, cell: &str) -> Result<CellId> {
        let op = self
            .operad
            .ok_or_else(|| Error::Unsupported("bar of a bare collection has no substitution".into()))?;
        // parse the outer cell without consulting an inner enumeration; its
        // labels may exceed any fixed bound
        let (outer_op, outer_imgs) = parse_op_parts(self.coll, dim + 1, cell)?;
        let flat: Vec<GlobSet> = slices.iter().flatten().cloned().collect();
        let sq_flat = self.seq_of(&flat)?;
        let offsets: Vec<usize> = slices
            .iter()
            .scan(0usize, |acc, s| {
                let v = *acc;
                *acc += s.len();
                Some(v)
            })
            .collect();
        // rebuild the outer labelling as a two-level labelling over the
        // flat sequence, remembering the operation parts
        let arity = self.coll.arity_of(dim + 1, &outer_op)?;
        let g = arity.glob();
        let mut labels: BTreeMap<(usize, CellId), FreeCell> = BTreeMap::new();
        let mut ops_asg: BTreeMap<CellId, String> = BTreeMap::new();
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                let img = &outer_imgs[&(d, id.clone())];
                if d == 0 {
                    let i: usize = img.parse().map_err(|_| Error::invalid("bad vertex"))?;
                    let pos = if i == 0 { 0 } else { offsets[i - 1] + slices[i - 1].len() };
                    let mut m0 = BTreeMap::new();
                    m0.insert("0".to_string(), pos.to_string());
                    labels.insert(
                        (0, id.clone()),
                        FreeCell::new(
                            Tree::leaf(),
                            GlobMap::new(GlobSet::point(), sq_flat.clone(), vec![m0])?,
                        )?,
                    );
                    continue;
                }
                let (i, rest) = glob::split_hom_tag(img)
                    .ok_or_else(|| Error::invalid("label outside a sequence hom"))?;
                let y = decode_op_cell(self.coll, &self.seq_of(&slices[i - 1])?, d, rest)?;
                ops_asg.insert(id.clone(), y.op.clone());
                // shift the labelling into the flat sequence
                let yar = self.coll.arity_of(d, &y.op)?;
                let yg = yar.glob();
                let mut table = vec![BTreeMap::new(); yg.trunc() + 1];
                for dd in 0..=yg.trunc() {
                    for c in yg.cells(dd) {
                        let v = y.label.apply(dd, c)?;
                        let new = if dd == 0 {
                            let j: usize = v.parse().map_err(|_| Error::invalid("bad vertex"))?;
                            (offsets[i - 1] + j).to_string()
                        } else {
                            let (j, r) = glob::split_hom_tag(v)
                                .ok_or_else(|| Error::invalid("label outside a hom"))?;
                            format!("h{}/{r}", offsets[i - 1] + j)
                        };
                        table[dd].insert(c.clone(), new);
                    }
                }
                labels.insert(
                    (d, id.clone()),
                    FreeCell::new(yar.clone(), GlobMap::new(yg, sq_flat.clone(), table)?)?,
                );
            }
        }
        let two_level = FreeOverFree::new(arity.clone(), sq_flat.clone(), labels)?;
        let m = freecat::mu(&two_level)?;
        let composite_op = op.substitute(dim + 1, &outer_op, &ops_asg)?;
        let result = OpCell { op: composite_op, label: m.cell.label().clone() };
        // the substituted arity must match the multiplied tree
        if self.coll.arity_of(dim + 1, &result.op)? != *m.cell.tree() {
            return Err(Error::incompatible("substitution arity disagrees with the composite"));
        }
        Ok(result.encode())
    }
}

/// The cartesian comparison into the product-of-free-cells multitensor.
pub trait TMultitensor: Multitensor {
    /// The component at a cell: the tuple of free cells underneath it.
    fn eps(&self, args: &[GlobSet], dim: usize, cell: &str) -> Result<Vec<FreeCell>>;
}

impl TMultitensor for TCross {
    fn eps(&self, args: &[GlobSet], dim: usize, cell: &str) -> Result<Vec<FreeCell>> {
        self.decode(args, dim, cell)
    }
}

impl TMultitensor for Bar<'_> {
    fn eps(&self, args: &[GlobSet], dim: usize, cell: &str) -> Result<Vec<FreeCell>> {
        let sq = self.seq_of(args)?;
        let c = decode_op_cell(self.coll, &sq, dim + 1, cell)?;
        let arity = self.coll.arity_of(dim + 1, &c.op)?;
        let t = FreeCell::new(arity, c.label)?;
        let (_, comps) = t.hom_decompose()?;
        // strip the hom tags so each component lives over its argument
        comps
            .into_iter()
            .enumerate()
            .map(|(idx, comp)| {
                let g = comp.tree().glob();
                let maps = (0..=g.trunc())
                    .map(|d| {
                        g.cells(d)
                            .iter()
                            .map(|id| {
                                let img = comp.label().apply(d, id)?;
                                let (_, rest) = glob::split_hom_tag(img)
                                    .ok_or_else(|| Error::invalid("hom cell without a tag"))?;
                                Ok((id.clone(), rest.to_string()))
                            })
                            .collect::<Result<BTreeMap<_, _>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                FreeCell::new(
                    comp.tree().clone(),
                    GlobMap::new(g, args[idx].clone(), maps)?,
                )
            })
            .collect()
    }
}

/// Rebuild a collection from a multitensor with its comparison into the
/// product multitensor: operations at a tree arity are the cells lying over
/// the identity-labelled tuple.
pub fn collection_from_multitensor(
    e: &dyn TMultitensor,
    size_bound: usize,
) -> Result<Collection> {
    let trunc = e.trunc() + 1;
    let pad = e.trunc();
    let mut levels: Vec<Vec<OpDecl>> = Vec::new();
    // fibers over identity tuples, keyed by the tree, per dimension
    let mut fibers: Vec<BTreeMap<Tree, Vec<CellId>>> = Vec::new();
    for d in 1..=trunc {
        let mut level = Vec::new();
        let mut fiber: BTreeMap<Tree, Vec<CellId>> = BTreeMap::new();
        for p in tree::enumerate_trees(d, size_bound) {
            // kid realizations live below the carrier truncation; pad them
            let args: Vec<GlobSet> = p
                .kids()
                .iter()
                .map(|k| k.glob().padded(pad))
                .collect::<Result<_>>()?;
            let obj = e.apply(&args)?;
            let mut ops = Vec::new();
            for c in obj.cells(d - 1) {
                let comps = e.eps(&args, d - 1, c)?;
                let generic = comps
                    .iter()
                    .zip(p.kids())
                    .all(|(fc, kid)| fc.tree() == kid && fc.label().fixes_all_cells());
                if generic {
                    ops.push(c.clone());
                }
            }
            for c in &ops {
                let (src, tgt) = if d == 1 {
                    (None, None)
                } else {
                    let b = p.boundary()?;
                    let sigmas: Vec<GlobMap> = p
                        .kids()
                        .iter()
                        .map(|k| sigma_map(k)?.padded(pad))
                        .collect::<Result<_>>()?;
                    let taus: Vec<GlobMap> = p
                        .kids()
                        .iter()
                        .map(|k| tau_map(k)?.padded(pad))
                        .collect::<Result<_>>()?;
                    let s_val = obj.src(d - 1, c)?.clone();
                    let t_val = obj.tgt(d - 1, c)?.clone();
                    let mut found_s = None;
                    let mut found_t = None;
                    for cand in fibers[d - 2].get(&b).map(Vec::as_slice).unwrap_or(&[]) {
                        if e.map_cell(&sigmas, d - 2, cand)? == s_val
                            && found_s.replace(cand.clone()).is_some()
                        {
                            return Err(Error::incompatible(
                                "comparison is not cartesian: boundary lift not unique",
                            ));
                        }
                        if e.map_cell(&taus, d - 2, cand)? == t_val
                            && found_t.replace(cand.clone()).is_some()
                        {
                            return Err(Error::incompatible(
                                "comparison is not cartesian: boundary lift not unique",
                            ));
                        }
                    }
                    let s = found_s.ok_or_else(|| {
                        Error::incompatible("comparison is not cartesian: boundary has no lift")
                    })?;
                    let t = found_t.ok_or_else(|| {
                        Error::incompatible("comparison is not cartesian: boundary has no lift")
                    })?;
                    (Some(format!("{s}@{b}")), Some(format!("{t}@{b}")))
                };
                level.push(OpDecl { id: format!("{c}@{p}"), arity: p.clone(), src, tgt });
            }
            fiber.insert(p.clone(), ops);
        }
        levels.push(level);
        fibers.push(fiber);
    }
    Collection::from_table(trunc, levels)
}

// ---------------------------------------------------------------------------
// The re-graded view over the composite monad
// ---------------------------------------------------------------------------

/// One operation of the re-graded view: the arity is a finite sequence of
/// trees one dimension down.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MtOp {
    pub id: String,
    pub arity: Vec<Tree>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tgt: Option<String>,
}

/// The view of an operad over the composite of the free-monoid and
/// free-category monads: a dimension-(d+1) operation with arity
/// `(p_1..p_k)` becomes a dimension-d operation with the sequence arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MTOperadView {
    pub trunc: usize,
    pub ops: Vec<Vec<MtOp>>,
    pub units: BTreeMap<usize, String>,
    pub subst: Vec<SubstEntry>,
}

/// Re-grade an operad into its view over the composite monad.
pub fn to_mt_operad(op: &Operad) -> Result<MTOperadView> {
    let coll = op.collection();
    let trunc = coll.trunc() - 1;
    let mut levels = Vec::new();
    for d in 1..=coll.trunc() {
        let level = coll
            .ops(d)?
            .into_iter()
            .map(|o| MtOp {
                id: o.id,
                arity: o.arity.kids().to_vec(),
                src: o.src,
                tgt: o.tgt,
            })
            .collect();
        levels.push(level);
    }
    let units = (1..=coll.trunc())
        .map(|d| Ok((d - 1, op.unit_op(d)?)))
        .collect::<Result<_>>()?;
    Ok(MTOperadView { trunc, ops: levels, units, subst: op.subst_entries() })
}

/// Rebuild the operad from its re-graded view.
pub fn from_mt_operad(view: &MTOperadView) -> Result<Operad> {
    let trunc = view.trunc + 1;
    let mut levels = Vec::new();
    for (idx, level) in view.ops.iter().enumerate() {
        let d = idx + 1;
        let ops = level
            .iter()
            .map(|o| {
                Ok(OpDecl {
                    id: o.id.clone(),
                    arity: Tree::node(d, o.arity.clone())?,
                    src: o.src.clone(),
                    tgt: o.tgt.clone(),
                })
            })
            .collect::<Result<_>>()?;
        levels.push(ops);
    }
    let coll = Collection::from_table(trunc, levels)?;
    let units = view.units.iter().map(|(d, u)| (d + 1, u.clone())).collect();
    Operad::from_table(coll, units, view.subst.clone())
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct OperadJson {
    trunc: usize,
    ops: BTreeMap<String, Vec<OpDecl>>,
    units: BTreeMap<String, String>,
    subst: Vec<SubstEntry>,
}

impl Serialize for Operad {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let OperadStructure::Table { units, subst } = &self.structure else {
            return Err(serde::ser::Error::custom(
                "the identity operad has no finite table form",
            ));
        };
        let CollectionKind::Table(levels) = &self.coll.kind else {
            return Err(serde::ser::Error::custom("identity collections have no table form"));
        };
        let ops = levels
            .iter()
            .enumerate()
            .map(|(i, l)| ((i + 1).to_string(), l.clone()))
            .collect();
        OperadJson {
            trunc: self.coll.trunc,
            ops,
            units: units.iter().map(|(d, u)| (d.to_string(), u.clone())).collect(),
            subst: subst.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operad {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OperadJson::deserialize(d)?;
        let mut levels = vec![Vec::new(); raw.trunc];
        for (k, v) in raw.ops {
            let dd: usize = k.parse().map_err(|_| D::Error::custom("bad dimension key"))?;
            if dd == 0 || dd > raw.trunc {
                return Err(D::Error::custom("operation dimension out of range"));
            }
            levels[dd - 1] = v;
        }
        let coll = Collection::from_table(raw.trunc, levels).map_err(D::Error::custom)?;
        let units = raw
            .units
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|d| (d, v))
                    .map_err(|_| D::Error::custom("bad unit dimension"))
            })
            .collect::<std::result::Result<_, _>>()?;
        Operad::from_table(coll, units, raw.subst).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glob::GlobSetBuilder;

    fn loop_graph() -> GlobSet {
        GlobSetBuilder::new(1).cell0("v").cell(1, "l", "v", "v").finish().unwrap()
    }

    fn path2() -> GlobSet {
        glob::seq(&[GlobSet::point(), GlobSet::point()]).unwrap()
    }

    #[test]
    fn identity_collection_apply_is_free_cells() {
        let coll = Collection::identity(1, 4);
        let x = loop_graph();
        let ours = apply_cells(&coll, &x, 1, 4).unwrap();
        let frees = freecat::free_cells(&x, 1, 4).unwrap();
        assert_eq!(ours.len(), frees.len());
        for (a, b) in ours.iter().zip(&frees) {
            assert_eq!(a.label, *b.label());
            assert_eq!(a.op, b.tree().to_string());
        }
    }

    #[test]
    fn single_binary_operation_on_a_path() {
        let coll = Collection::from_table(
            1,
            vec![vec![OpDecl { id: "m".into(), arity: Tree::line(2), src: None, tgt: None }]],
        )
        .unwrap();
        let x = path2();
        // one cell per length-2 path; the path graph has exactly one
        let cells = apply_cells(&coll, &x, 1, 4).unwrap();
        assert_eq!(cells.len(), 1);
    }

    #[test]
    fn apply_count_matches_map_counting_oracle() {
        let coll = Collection::identity(2, 3);
        let x = GlobSetBuilder::new(2)
            .cell0("a")
            .cell0("b")
            .cell(1, "f", "a", "b")
            .cell(1, "g", "a", "b")
            .cell(2, "m", "f", "g")
            .finish()
            .unwrap();
        for d in 1..=2usize {
            let direct = apply_cells(&coll, &x, d, 3).unwrap().len();
            let oracle: usize = coll
                .ops(d)
                .unwrap()
                .iter()
                .filter(|o| o.arity.size() <= 3)
                .map(|o| glob::maps_between(&o.arity.glob(), &x).len())
                .sum();
            assert_eq!(direct, oracle);
        }
    }

    #[test]
    fn hom_decompose_a_reduces_to_free_decomposition() {
        let coll = Collection::identity(1, 4);
        let x = loop_graph();
        for c in apply_cells(&coll, &x, 1, 4).unwrap() {
            let (ys, inner, bar) = hom_decompose_a(&coll, &x, 1, &c).unwrap();
            // reconstruction along the comparison map
            let back = OpCell { op: inner.op.clone(), label: inner.label.then(&bar).unwrap() };
            assert_eq!(back, c);
            // matches the free decomposition
            let fc = FreeCell::new(coll.arity_of(1, &c.op).unwrap(), c.label.clone()).unwrap();
            let (fys, _) = fc.hom_decompose().unwrap();
            assert_eq!(ys, fys);
        }
    }

    #[test]
    fn sequence_carrier_homs_shift() {
        // on a sequence carrier, cells between a and b match cells of the
        // star pullback between the endpoints
        let coll = Collection::identity(1, 4);
        let x1 = loop_graph();
        let s = glob::seq(&[x1.clone(), x1]).unwrap();
        let all = apply_cells(&coll, &s, 1, 4).unwrap();
        let between = |a: &str, b: &str| {
            all.iter()
                .filter(|c| {
                    let ar = coll.arity_of(1, &c.op).unwrap();
                    c.label.apply(0, "0").unwrap() == a
                        && c.label.apply(0, &ar.kids().len().to_string()).unwrap() == b
                })
                .count()
        };
        // a > b is empty
        assert_eq!(between("2", "0"), 0);
        assert_eq!(between("1", "0"), 0);
        // 0 to 2 matches the star pullback at (0,1,2)
        let zs = glob::ZeroSeq::new(&s, vec!["0".into(), "1".into(), "2".into()]).unwrap();
        let (star, _) = glob::star_pullback(&s, &zs).unwrap();
        let star_cells = apply_cells(&coll, &star, 1, 4)
            .unwrap()
            .into_iter()
            .filter(|c| {
                let ar = coll.arity_of(1, &c.op).unwrap();
                c.label.apply(0, "0").unwrap() == "0"
                    && c.label.apply(0, &ar.kids().len().to_string()).unwrap() == "2"
            })
            .count();
        assert_eq!(between("0", "2"), star_cells);
    }

    #[test]
    fn bar_of_identity_matches_tcross() {
        let coll = Collection::identity(2, 4);
        let bar = Bar::of_collection(&coll, 4);
        let t = TCross::new(1, 3);
        let x = loop_graph();
        let via_bar = bar.apply(&[x.clone(), x.clone()]).unwrap();
        let via_t = t.apply(&[x.clone(), x.clone()]).unwrap();
        // the bar bounds the total arity size, the product bounds each
        // component; compare on the matching slice
        for d in 0..=1usize {
            let pairs = via_t
                .cells(d)
                .iter()
                .filter(|c| {
                    let comps = t.decode(&[x.clone(), x.clone()], d, c).unwrap();
                    comps.iter().map(|f| f.tree().size()).sum::<usize>() + 1 <= 4
                })
                .count();
            assert_eq!(via_bar.cells(d).len(), pairs, "dim {d}");
        }
        // unary bar is the free category on the hom
        let one = bar.apply(&[x.clone()]).unwrap();
        for d in 0..=1usize {
            assert_eq!(one.cells(d).len(), freecat::free_cells(&x, d, 3).unwrap().len());
        }
        // nullary bar: cells over the point between coincident endpoints
        let zero = bar.apply(&[]).unwrap();
        assert!(zero.cells(0).len() >= 1);
    }

    #[test]
    fn bar_passes_multitensor_axioms() {
        let op = Operad::identity(2, 3);
        let bar = Bar::of_operad(&op, 3);
        let x = loop_graph();
        let panel = vec![vec![x.clone()]];
        let double = vec![vec![vec![vec![x.clone()]]]];
        let bad = multitensor::check_multitensor(&bar, &panel, &double).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn identity_operad_checks_out() {
        let op = Operad::identity(2, 4);
        let bad = check_operad(&op, 3).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn embedded_set_operad_checks_out() {
        let so = multitensor::SetOperad::terminal(3);
        let op = embed_set_operad(&so).unwrap();
        let bad = check_operad(&op, 4).unwrap();
        assert!(bad.is_empty(), "{bad:?}");
    }

    #[test]
    fn corrupted_arity_fails_the_check() {
        // binary operation whose stored substitution lands at a wrong arity
        let coll = Collection::from_table(
            1,
            vec![vec![
                OpDecl { id: "u".into(), arity: Tree::line(1), src: None, tgt: None },
                OpDecl { id: "m".into(), arity: Tree::line(2), src: None, tgt: None },
            ]],
        )
        .unwrap();
        let units = [(1usize, "u".to_string())].into_iter().collect();
        let subst = vec![
            SubstEntry {
                outer: "u".into(),
                labelling: [("h1/0".to_string(), "u".to_string())].into_iter().collect(),
                result: "u".into(),
            },
            SubstEntry {
                outer: "u".into(),
                labelling: [("h1/0".to_string(), "m".to_string())].into_iter().collect(),
                result: "u".into(), // wrong: must land at the line-2 arity
            },
            SubstEntry {
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
        let op = Operad::from_table(coll, units, subst).unwrap();
        let bad = check_operad(&op, 4).unwrap();
        assert!(bad.iter().any(|m| m.contains("lands at arity")), "{bad:?}");
    }

    #[test]
    fn mt_view_roundtrip() {
        let so = multitensor::SetOperad::terminal(3);
        let op = embed_set_operad(&so).unwrap();
        let view = to_mt_operad(&op).unwrap();
        // counts preserved per grade
        assert_eq!(view.ops[0].len(), (0..=3).map(|n| so.ops(n).len()).sum::<usize>());
        let back = from_mt_operad(&view).unwrap();
        assert_eq!(back, op);
    }

    #[test]
    fn bar_to_collection_roundtrip_for_tcross() {
        // the collection extracted from the product multitensor is the
        // identity collection
        let t = TCross::new(1, 3);
        let coll = collection_from_multitensor(&t, 3).unwrap();
        let id_coll = Collection::identity(2, 3);
        for d in 1..=2usize {
            let ours = coll.ops(d).unwrap();
            let want = id_coll.ops(d).unwrap();
            assert_eq!(ours.len(), want.len(), "dim {d}");
            for (a, b) in ours.iter().zip(&want) {
                assert_eq!(a.arity, b.arity);
            }
        }
    }

    #[test]
    fn collection_to_bar_to_collection_roundtrip() {
        // a two-operation collection at truncation 1
        let coll = Collection::from_table(
            1,
            vec![vec![
                OpDecl { id: "m".into(), arity: Tree::line(2), src: None, tgt: None },
                OpDecl { id: "e".into(), arity: Tree::line(0), src: None, tgt: None },
            ]],
        )
        .unwrap();
        let bar = Bar::of_collection(&coll, 4);
        let back = collection_from_multitensor(&bar, 4).unwrap();
        // same operation counts per arity
        for d in 1..=1usize {
            let mut ours: BTreeMap<Tree, usize> = BTreeMap::new();
            for o in back.ops(d).unwrap() {
                *ours.entry(o.arity).or_default() += 1;
            }
            let mut want: BTreeMap<Tree, usize> = BTreeMap::new();
            for o in coll.ops(d).unwrap() {
                *want.entry(o.arity).or_default() += 1;
            }
            assert_eq!(ours, want);
        }
    }

    #[test]
    fn mult_to_collection_to_bar_is_identity_on_enumerations() {
        let t = TCross::new(0, 3);
        let coll = collection_from_multitensor(&t, 3).unwrap();
        let bar = Bar::of_collection(&coll, 3);
        let x = GlobSetBuilder::new(0).cell0("x").cell0("y").finish().unwrap();
        for args in [vec![x.clone()], vec![x.clone(), x.clone()]] {
            let via_t = t.apply(&args).unwrap();
            let via_bar = bar.apply(&args).unwrap();
            assert_eq!(via_t.cells(0).len(), via_bar.cells(0).len());
            // the canonical correspondence is a bijection commuting with
            // the comparison components
            let mut images = std::collections::BTreeSet::new();
            for c in via_bar.cells(0) {
                let comps = bar.eps(&args, 0, c).unwrap();
                let ids: Vec<String> = comps.iter().map(FreeCell::canonical_id).collect();
                assert!(images.insert(ids.clone()));
                let direct = t.decode(&args, 0, via_t.cells(0).iter().find(|tc| {
                    t.decode(&args, 0, tc).unwrap().iter().map(FreeCell::canonical_id).collect::<Vec<_>>() == ids
                }).expect("matching product cell")).unwrap();
                assert_eq!(direct.iter().map(FreeCell::canonical_id).collect::<Vec<_>>(), ids);
            }
        }
    }

    #[test]
    fn operad_json_roundtrip() {
        let so = multitensor::SetOperad::terminal(2);
        let op = embed_set_operad(&so).unwrap();
        let s = serde_json::to_string(&op).unwrap();
        let back: Operad = serde_json::from_str(&s).unwrap();
        assert_eq!(op, back);
        assert_eq!(s, serde_json::to_string(&back).unwrap());
    }
}
