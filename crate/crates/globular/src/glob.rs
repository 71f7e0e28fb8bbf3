//! Finite truncated globular sets and their maps.
//!
//! A globular set is a graded family of cells with source and target maps
//! satisfying the globularity equations `ss = st` and `ts = tt`. Everything
//! here is finite and explicitly truncated; constructions that the untruncated
//! theory performs at all dimensions are done up to the truncation level.
//!
//! Generated cells carry path-like identifier tags (`h1/…` for sequence homs,
//! `in0/…` for coproduct summands) so every construction is deterministic and
//! testable by equality.

use std::collections::{BTreeMap, BTreeSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CellId = String;

/// Characters reserved for generated identifiers; user-supplied cell ids may
/// not contain them, which keeps every generated name uniquely readable.
pub const RESERVED_CHARS: &[char] = &['⟨', '⟩', '¦', '⟦', '⟧', '§'];

/// A reference to a cell of some globular set: dimension plus identifier.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellRef {
    pub dim: usize,
    pub id: CellId,
}

impl CellRef {
    pub fn new(dim: usize, id: impl Into<CellId>) -> Self {
        CellRef { dim, id: id.into() }
    }
}

/// A finite globular set truncated at dimension `trunc`.
///
/// Equality disregards the listing order of cells: the order is only the
/// deterministic enumeration order of the construction that produced the
/// value.
#[derive(Debug, Clone)]
pub struct GlobSet {
    trunc: usize,
    /// cells[d] lists the d-cells in canonical (construction) order.
    cells: Vec<Vec<CellId>>,
    /// src[d] maps (d+1)-cells to d-cells.
    src: Vec<BTreeMap<CellId, CellId>>,
    tgt: Vec<BTreeMap<CellId, CellId>>,
}

impl PartialEq for GlobSet {
    fn eq(&self, other: &Self) -> bool {
        self.trunc == other.trunc
            && (0..=self.trunc).all(|d| {
                let a: BTreeSet<&CellId> = self.cells[d].iter().collect();
                let b: BTreeSet<&CellId> = other.cells[d].iter().collect();
                a == b
            })
            && self.src == other.src
            && self.tgt == other.tgt
    }
}

impl Eq for GlobSet {}

impl GlobSet {
    pub fn new(
        trunc: usize,
        cells: Vec<Vec<CellId>>,
        src: Vec<BTreeMap<CellId, CellId>>,
        tgt: Vec<BTreeMap<CellId, CellId>>,
    ) -> Result<Self> {
        if cells.len() != trunc + 1 {
            return Err(Error::invalid(format!(
                "expected {} cell levels, got {}",
                trunc + 1,
                cells.len()
            )));
        }
        if src.len() != trunc || tgt.len() != trunc {
            return Err(Error::invalid("src/tgt levels must equal trunc"));
        }
        let gs = GlobSet { trunc, cells, src, tgt };
        gs.validate()?;
        Ok(gs)
    }

    /// The one-point globular set at truncation 0 (single 0-cell `0`).
    pub fn point() -> Self {
        Self::point_at(0)
    }

    /// One 0-cell named `0`, nothing above, at the given truncation.
    pub fn point_at(trunc: usize) -> Self {
        let mut cells = vec![Vec::new(); trunc + 1];
        cells[0].push("0".to_string());
        GlobSet {
            trunc,
            cells,
            src: vec![BTreeMap::new(); trunc],
            tgt: vec![BTreeMap::new(); trunc],
        }
    }

    /// No cells at all.
    pub fn empty(trunc: usize) -> Self {
        GlobSet {
            trunc,
            cells: vec![Vec::new(); trunc + 1],
            src: vec![BTreeMap::new(); trunc],
            tgt: vec![BTreeMap::new(); trunc],
        }
    }

    pub fn trunc(&self) -> usize {
        self.trunc
    }

    /// Cells at a dimension, empty beyond the truncation.
    pub fn cells(&self, dim: usize) -> &[CellId] {
        if dim <= self.trunc {
            &self.cells[dim]
        } else {
            &[]
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.iter().map(|v| v.len()).sum()
    }

    pub fn all_cells(&self) -> impl Iterator<Item = CellRef> + '_ {
        (0..=self.trunc).flat_map(move |d| {
            self.cells[d].iter().map(move |id| CellRef::new(d, id.clone()))
        })
    }

    pub fn has_cell(&self, dim: usize, id: &str) -> bool {
        dim <= self.trunc && self.cells[dim].iter().any(|c| c == id)
    }

    /// Source of a cell of dimension `dim` (requires `dim >= 1`).
    pub fn src(&self, dim: usize, id: &str) -> Result<&CellId> {
        if dim == 0 || dim > self.trunc {
            return Err(Error::UnknownCell { dim, id: id.to_string() });
        }
        self.src[dim - 1]
            .get(id)
            .ok_or_else(|| Error::UnknownCell { dim, id: id.to_string() })
    }

    pub fn tgt(&self, dim: usize, id: &str) -> Result<&CellId> {
        if dim == 0 || dim > self.trunc {
            return Err(Error::UnknownCell { dim, id: id.to_string() });
        }
        self.tgt[dim - 1]
            .get(id)
            .ok_or_else(|| Error::UnknownCell { dim, id: id.to_string() })
    }

    /// `s_k`: the k-dimensional source of a `dim`-cell, `k <= dim`.
    pub fn src_k(&self, dim: usize, id: &str, k: usize) -> Result<CellId> {
        let mut d = dim;
        let mut cur = id.to_string();
        while d > k {
            cur = self.src(d, &cur)?.clone();
            d -= 1;
        }
        Ok(cur)
    }

    pub fn tgt_k(&self, dim: usize, id: &str, k: usize) -> Result<CellId> {
        let mut d = dim;
        let mut cur = id.to_string();
        while d > k {
            cur = self.tgt(d, &cur)?.clone();
            d -= 1;
        }
        Ok(cur)
    }

    pub fn validate(&self) -> Result<()> {
        // ids unique across all dimensions (needed for the flat JSON form)
        let mut seen: BTreeSet<&CellId> = BTreeSet::new();
        for level in &self.cells {
            for id in level {
                if id.contains(RESERVED_CHARS) {
                    return Err(Error::invalid(format!("cell id `{id}` uses a reserved character")));
                }
                if !seen.insert(id) {
                    return Err(Error::invalid(format!("duplicate cell id `{id}`")));
                }
            }
        }
        // src/tgt total on cells of dim >= 1, landing one dimension down
        for d in 1..=self.trunc {
            for id in &self.cells[d] {
                for (name, map) in [("src", &self.src), ("tgt", &self.tgt)] {
                    let Some(lower) = map[d - 1].get(id) else {
                        return Err(Error::invalid(format!("{name} missing for `{id}` at dim {d}")));
                    };
                    if !self.has_cell(d - 1, lower) {
                        return Err(Error::invalid(format!(
                            "{name} of `{id}` is `{lower}`, not a {}-cell",
                            d - 1
                        )));
                    }
                }
            }
            for map in [&self.src, &self.tgt] {
                for key in map[d - 1].keys() {
                    if !self.has_cell(d, key) {
                        return Err(Error::invalid(format!("stray src/tgt entry for `{key}`")));
                    }
                }
            }
        }
        // globularity: ss = st and ts = tt
        for d in 2..=self.trunc {
            for id in &self.cells[d] {
                let s = self.src(d, id)?;
                let t = self.tgt(d, id)?;
                if self.src(d - 1, s)? != self.src(d - 1, t)? {
                    return Err(Error::invalid(format!("globularity ss=st fails at `{id}`")));
                }
                if self.tgt(d - 1, s)? != self.tgt(d - 1, t)? {
                    return Err(Error::invalid(format!("globularity ts=tt fails at `{id}`")));
                }
            }
        }
        Ok(())
    }

    /// The hom globular set `X(a,b)` at a pair of 0-cells: its k-cells are the
    /// (k+1)-cells x of X with `s_0 x = a` and `t_0 x = b`, with src/tgt
    /// inherited. Truncation drops by one.
    pub fn hom(&self, a: &str, b: &str) -> Result<GlobSet> {
        if self.trunc == 0 {
            return Err(Error::DimExceedsTrunc { dim: 1, trunc: 0 });
        }
        for x in [a, b] {
            if !self.has_cell(0, x) {
                return Err(Error::UnknownCell { dim: 0, id: x.to_string() });
            }
        }
        let t = self.trunc - 1;
        let mut cells = vec![Vec::new(); t + 1];
        let mut src = vec![BTreeMap::new(); t];
        let mut tgt = vec![BTreeMap::new(); t];
        for d in 0..=t {
            for id in &self.cells[d + 1] {
                if self.src_k(d + 1, id, 0)? == a && self.tgt_k(d + 1, id, 0)? == b {
                    cells[d].push(id.clone());
                    if d >= 1 {
                        src[d - 1].insert(id.clone(), self.src(d + 1, id)?.clone());
                        tgt[d - 1].insert(id.clone(), self.tgt(d + 1, id)?.clone());
                    }
                }
            }
        }
        GlobSet::new_generated(t, cells, src, tgt)
    }

    /// True when every hom `X(x_{i-1}, x_i)` along the sequence is non-empty.
    pub fn is_connected(&self, xs: &ZeroSeq) -> Result<bool> {
        xs.check(self)?;
        for w in xs.entries.windows(2) {
            if self.hom(&w[0], &w[1])?.cell_count() == 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// View at a higher truncation, with no cells in the new dimensions.
    pub fn padded(&self, trunc: usize) -> Result<GlobSet> {
        if trunc < self.trunc {
            return Err(Error::TruncMismatch("padding cannot lower the truncation".into()));
        }
        let mut cells = self.cells.clone();
        cells.resize(trunc + 1, Vec::new());
        let mut src = self.src.clone();
        src.resize(trunc, BTreeMap::new());
        let mut tgt = self.tgt.clone();
        tgt.resize(trunc, BTreeMap::new());
        Ok(GlobSet { trunc, cells, src, tgt })
    }

    /// Rename every cell through `f`, keeping the structure. `f` must be
    /// injective on the cells present.
    pub fn renamed(&self, f: impl Fn(usize, &str) -> String) -> Result<GlobSet> {
        let cells = (0..=self.trunc)
            .map(|d| self.cells[d].iter().map(|id| f(d, id)).collect::<Vec<_>>())
            .collect();
        let remap = |d: usize, m: &BTreeMap<CellId, CellId>| {
            m.iter().map(|(k, v)| (f(d + 1, k), f(d, v))).collect::<BTreeMap<_, _>>()
        };
        let src = (0..self.trunc).map(|d| remap(d, &self.src[d])).collect();
        let tgt = (0..self.trunc).map(|d| remap(d, &self.tgt[d])).collect();
        GlobSet::new_generated(self.trunc, cells, src, tgt)
    }
}

/// Incremental builder for hand-written globular sets in tests and examples.
pub struct GlobSetBuilder {
    trunc: usize,
    cells: Vec<Vec<CellId>>,
    src: Vec<BTreeMap<CellId, CellId>>,
    tgt: Vec<BTreeMap<CellId, CellId>>,
}

impl GlobSetBuilder {
    pub fn new(trunc: usize) -> Self {
        GlobSetBuilder {
            trunc,
            cells: vec![Vec::new(); trunc + 1],
            src: vec![BTreeMap::new(); trunc],
            tgt: vec![BTreeMap::new(); trunc],
        }
    }

    pub fn cell0(mut self, id: &str) -> Self {
        self.cells[0].push(id.to_string());
        self
    }

    pub fn cell(mut self, dim: usize, id: &str, src: &str, tgt: &str) -> Self {
        self.cells[dim].push(id.to_string());
        self.src[dim - 1].insert(id.to_string(), src.to_string());
        self.tgt[dim - 1].insert(id.to_string(), tgt.to_string());
        self
    }

    pub fn finish(self) -> Result<GlobSet> {
        GlobSet::new(self.trunc, self.cells, self.src, self.tgt)
    }
}

/// A sequence of 0-cells `x_0 .. x_m` of some globular set, i.e. a map from
/// the vertex set of the path of length m.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ZeroSeq {
    pub entries: Vec<CellId>,
}

impl ZeroSeq {
    pub fn new(carrier: &GlobSet, entries: Vec<CellId>) -> Result<Self> {
        let z = ZeroSeq { entries };
        z.check(carrier)?;
        Ok(z)
    }

    pub fn check(&self, carrier: &GlobSet) -> Result<()> {
        if self.entries.is_empty() {
            return Err(Error::invalid("a 0-sequence has at least one entry"));
        }
        for id in &self.entries {
            if !carrier.has_cell(0, id) {
                return Err(Error::UnknownCell { dim: 0, id: id.clone() });
            }
        }
        Ok(())
    }

    /// m, where the sequence is x_0 .. x_m.
    pub fn len(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A structure-preserving map of globular sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobMap {
    source: GlobSet,
    target: GlobSet,
    /// maps[d] sends source d-cells to target d-cells.
    maps: Vec<BTreeMap<CellId, CellId>>,
}

impl GlobMap {
    pub fn new(source: GlobSet, target: GlobSet, maps: Vec<BTreeMap<CellId, CellId>>) -> Result<Self> {
        let m = GlobMap { source, target, maps };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(x: &GlobSet) -> Self {
        let maps = (0..=x.trunc())
            .map(|d| x.cells(d).iter().map(|id| (id.clone(), id.clone())).collect())
            .collect();
        GlobMap { source: x.clone(), target: x.clone(), maps }
    }

    pub fn source(&self) -> &GlobSet {
        &self.source
    }

    pub fn target(&self) -> &GlobSet {
        &self.target
    }

    pub fn apply(&self, dim: usize, id: &str) -> Result<&CellId> {
        self.maps
            .get(dim)
            .and_then(|m| m.get(id))
            .ok_or_else(|| Error::UnknownCell { dim, id: id.to_string() })
    }

    pub fn validate(&self) -> Result<()> {
        if self.maps.len() != self.source.trunc() + 1 {
            return Err(Error::invalid("map levels must equal source trunc + 1"));
        }
        for d in 0..=self.source.trunc() {
            for id in self.source.cells(d) {
                let img = self
                    .maps[d]
                    .get(id)
                    .ok_or_else(|| Error::invalid(format!("map missing on `{id}` at dim {d}")))?;
                if !self.target.has_cell(d, img) {
                    return Err(Error::invalid(format!("image `{img}` not a {d}-cell of target")));
                }
                if d >= 1 {
                    let s = self.source.src(d, id)?;
                    let t = self.source.tgt(d, id)?;
                    if self.target.src(d, img)? != self.maps[d - 1].get(s).unwrap() {
                        return Err(Error::invalid(format!("map does not commute with src at `{id}`")));
                    }
                    if self.target.tgt(d, img)? != self.maps[d - 1].get(t).unwrap() {
                        return Err(Error::invalid(format!("map does not commute with tgt at `{id}`")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Composition in diagram order: `self` then `g`.
    pub fn then(&self, g: &GlobMap) -> Result<GlobMap> {
        if self.target != g.source {
            return Err(Error::incompatible("composition: codomain/domain mismatch"));
        }
        let maps = (0..=self.source.trunc())
            .map(|d| {
                self.maps[d]
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), g.apply(d, v)?.clone())))
                    .collect::<Result<BTreeMap<_, _>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GlobMap::new(self.source.clone(), g.target.clone(), maps)
    }

    pub fn is_iso(&self) -> bool {
        if self.source.trunc() != self.target.trunc() {
            return false;
        }
        (0..=self.source.trunc()).all(|d| {
            let imgs: BTreeSet<&CellId> = self.maps[d].values().collect();
            imgs.len() == self.source.cells(d).len()
                && self.source.cells(d).len() == self.target.cells(d).len()
        })
    }

    /// Whether this is the identity (source == target, every cell fixed).
    pub fn is_identity(&self) -> bool {
        self.source == self.target
            && self.maps.iter().all(|m| m.iter().all(|(k, v)| k == v))
    }

    /// Whether every cell maps to a cell of the same name (the source may
    /// sit inside a larger target).
    pub fn fixes_all_cells(&self) -> bool {
        self.maps.iter().all(|m| m.iter().all(|(k, v)| k == v))
    }

    /// View the map at a higher truncation by padding both ends.
    pub fn padded(&self, trunc: usize) -> Result<GlobMap> {
        let mut maps = self.maps.clone();
        maps.resize(trunc + 1, BTreeMap::new());
        GlobMap::new(self.source.padded(trunc)?, self.target.padded(trunc)?, maps)
    }
}

fn nat_id(i: usize) -> CellId {
    i.to_string()
}

fn hom_tag(i: usize, id: &str) -> CellId {
    format!("h{i}/{id}")
}

/// Peel one sequence tag `h{i}/rest` off a generated cell id.
pub(crate) fn split_hom_tag(id: &str) -> Option<(usize, &str)> {
    let (head, rest) = id.split_once('/')?;
    let i = head.strip_prefix('h')?.parse().ok()?;
    Some((i, rest))
}

pub(crate) fn seq_at(xs: &[GlobSet], out_trunc: usize) -> Result<GlobSet> {
    for x in xs {
        if x.trunc() + 1 != out_trunc {
            return Err(Error::TruncMismatch(format!(
                "sequence entries must have truncation {}",
                out_trunc - 1
            )));
        }
    }
    let k = xs.len();
    let mut cells = vec![Vec::new(); out_trunc + 1];
    let mut src = vec![BTreeMap::new(); out_trunc];
    let mut tgt = vec![BTreeMap::new(); out_trunc];
    cells[0] = (0..=k).map(nat_id).collect();
    for (idx, x) in xs.iter().enumerate() {
        let i = idx + 1;
        for d in 0..=x.trunc() {
            for id in x.cells(d) {
                let tagged = hom_tag(i, id);
                cells[d + 1].push(tagged.clone());
                if d == 0 {
                    src[0].insert(tagged.clone(), nat_id(i - 1));
                    tgt[0].insert(tagged, nat_id(i));
                } else {
                    src[d].insert(tagged.clone(), hom_tag(i, x.src(d, id)?));
                    tgt[d].insert(tagged, hom_tag(i, x.tgt(d, id)?));
                }
            }
        }
    }
    GlobSet::new_generated(out_trunc, cells, src, tgt)
}

/// The sequence globular set `(X_1, ..., X_k)`: 0-cells `0..k`, with
/// `hom(i-1, i) = X_i` and all other homs empty. All entries must share a
/// truncation N and the result has truncation N+1; the empty sequence gives
/// the one-point globular set at truncation 1.
pub fn seq(xs: &[GlobSet]) -> Result<GlobSet> {
    let out = match xs.first() {
        Some(x) => x.trunc() + 1,
        None => 1,
    };
    seq_at(xs, out)
}

/// `x^*X`: the sequence of homs along a 0-cell sequence, together with the
/// comparison map into X (0-cells go to the sequence entries, hom cells to
/// themselves).
pub fn star_pullback(x: &GlobSet, xs: &ZeroSeq) -> Result<(GlobSet, GlobMap)> {
    xs.check(x)?;
    let m = xs.len();
    let homs = xs
        .entries
        .windows(2)
        .map(|w| x.hom(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let star = if m == 0 {
        GlobSet::point_at(x.trunc())
    } else {
        seq_at(&homs, x.trunc())?
    };
    let mut maps = vec![BTreeMap::new(); x.trunc() + 1];
    for d in 0..=star.trunc() {
        for id in star.cells(d) {
            let img = if d == 0 {
                let i: usize = id.parse().map_err(|_| Error::invalid("bad vertex id"))?;
                xs.entries[i].clone()
            } else {
                let (_, orig) = split_hom_tag(id).ok_or_else(|| Error::invalid("bad hom tag"))?;
                orig.to_string()
            };
            maps[d].insert(id.clone(), img);
        }
    }
    let bar = GlobMap::new(star.clone(), x.clone(), maps)?;
    Ok((star, bar))
}

/// Coproduct with canonical summand tags `in{i}/…` in input order.
pub fn coproduct(xs: &[GlobSet]) -> Result<(GlobSet, Vec<GlobMap>)> {
    let trunc = xs.first().map_or(0, |x| x.trunc());
    for x in xs {
        if x.trunc() != trunc {
            return Err(Error::TruncMismatch("coproduct entries".into()));
        }
    }
    let mut cells = vec![Vec::new(); trunc + 1];
    let mut src = vec![BTreeMap::new(); trunc];
    let mut tgt = vec![BTreeMap::new(); trunc];
    let tag = |i: usize, id: &str| format!("in{i}/{id}");
    for (i, x) in xs.iter().enumerate() {
        for d in 0..=trunc {
            for id in x.cells(d) {
                cells[d].push(tag(i, id));
                if d >= 1 {
                    src[d - 1].insert(tag(i, id), tag(i, x.src(d, id)?));
                    tgt[d - 1].insert(tag(i, id), tag(i, x.tgt(d, id)?));
                }
            }
        }
    }
    let total = GlobSet::new_generated(trunc, cells, src, tgt)?;
    let injections = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let maps = (0..=trunc)
                .map(|d| x.cells(d).iter().map(|id| (id.clone(), tag(i, id))).collect())
                .collect();
            GlobMap::new(x.clone(), total.clone(), maps)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((total, injections))
}

fn pair_id(a: &str, b: &str) -> CellId {
    format!("⟨{a}¦{b}⟩")
}

/// Pullback of a cospan `f : A -> C <- B : g`. Cells are pairs agreeing
/// under f and g, named `⟨a¦b⟩`.
pub fn pullback(f: &GlobMap, g: &GlobMap) -> Result<(GlobSet, GlobMap, GlobMap)> {
    if f.target() != g.target() {
        return Err(Error::incompatible("pullback: codomains differ"));
    }
    if f.source().trunc() != g.source().trunc() {
        return Err(Error::TruncMismatch("pullback legs".into()));
    }
    let trunc = f.source().trunc();
    let mut cells = vec![Vec::new(); trunc + 1];
    let mut src = vec![BTreeMap::new(); trunc];
    let mut tgt = vec![BTreeMap::new(); trunc];
    let mut pa = vec![BTreeMap::new(); trunc + 1];
    let mut pb = vec![BTreeMap::new(); trunc + 1];
    for d in 0..=trunc {
        for a in f.source().cells(d) {
            for b in g.source().cells(d) {
                if f.apply(d, a)? == g.apply(d, b)? {
                    let id = pair_id(a, b);
                    cells[d].push(id.clone());
                    pa[d].insert(id.clone(), a.clone());
                    pb[d].insert(id.clone(), b.clone());
                    if d >= 1 {
                        src[d - 1].insert(
                            id.clone(),
                            pair_id(f.source().src(d, a)?, g.source().src(d, b)?),
                        );
                        tgt[d - 1].insert(
                            id.clone(),
                            pair_id(f.source().tgt(d, a)?, g.source().tgt(d, b)?),
                        );
                    }
                }
            }
        }
    }
    // pair ids use reserved characters, so skip the id validation and build
    // the structure directly after checking globularity via GlobSet::new on a
    // renamed copy would be circular; instead validate the raw structure here.
    let p = GlobSet { trunc, cells, src, tgt };
    p.validate_generated()?;
    let proj_a = GlobMap::new(p.clone(), f.source().clone(), pa)?;
    let proj_b = GlobMap::new(p.clone(), g.source().clone(), pb)?;
    Ok((p, proj_a, proj_b))
}

impl GlobSet {
    /// Validation that skips the reserved-character check, for internally
    /// generated sets whose ids deliberately use the reserved alphabet.
    pub(crate) fn validate_generated(&self) -> Result<()> {
        let mut seen: BTreeSet<&CellId> = BTreeSet::new();
        for level in &self.cells {
            for id in level {
                if !seen.insert(id) {
                    return Err(Error::invalid(format!("duplicate cell id `{id}`")));
                }
            }
        }
        for d in 1..=self.trunc {
            for id in &self.cells[d] {
                let s = self.src[d - 1].get(id).ok_or_else(|| Error::invalid("missing src"))?;
                let t = self.tgt[d - 1].get(id).ok_or_else(|| Error::invalid("missing tgt"))?;
                if !self.has_cell(d - 1, s) || !self.has_cell(d - 1, t) {
                    return Err(Error::invalid("src/tgt out of range"));
                }
                if d >= 2 {
                    if self.src(d - 1, s)? != self.src(d - 1, t)? || self.tgt(d - 1, s)? != self.tgt(d - 1, t)? {
                        return Err(Error::invalid(format!("globularity fails at `{id}`")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Construct without the reserved-character restriction (generated ids).
    pub(crate) fn new_generated(
        trunc: usize,
        cells: Vec<Vec<CellId>>,
        src: Vec<BTreeMap<CellId, CellId>>,
        tgt: Vec<BTreeMap<CellId, CellId>>,
    ) -> Result<Self> {
        let gs = GlobSet { trunc, cells, src, tgt };
        gs.validate_generated()?;
        Ok(gs)
    }
}

/// Raise everything one dimension: one fresh 0-cell, old d-cells become
/// (d+1)-cells with 0-dimensional boundaries at the new point.
pub fn suspend(x: &GlobSet) -> Result<GlobSet> {
    let trunc = x.trunc() + 1;
    let mut cells = vec![Vec::new(); trunc + 1];
    let mut src = vec![BTreeMap::new(); trunc];
    let mut tgt = vec![BTreeMap::new(); trunc];
    cells[0].push("0".to_string());
    let tag = |id: &str| format!("h1/{id}");
    for d in 0..=x.trunc() {
        for id in x.cells(d) {
            cells[d + 1].push(tag(id));
            if d == 0 {
                src[0].insert(tag(id), "0".to_string());
                tgt[0].insert(tag(id), "0".to_string());
            } else {
                src[d].insert(tag(id), tag(x.src(d, id)?));
                tgt[d].insert(tag(id), tag(x.tgt(d, id)?));
            }
        }
    }
    GlobSet::new_generated(trunc, cells, src, tgt)
}

/// Discard 0-cells and shift dimensions down by one.
pub fn desuspend(x: &GlobSet) -> Result<GlobSet> {
    if x.trunc() == 0 {
        return Err(Error::DimExceedsTrunc { dim: 0, trunc: 0 });
    }
    let trunc = x.trunc() - 1;
    let cells = (1..=x.trunc()).map(|d| x.cells(d).to_vec()).collect();
    let src = (2..=x.trunc()).map(|d| {
        x.cells(d)
            .iter()
            .map(|id| Ok((id.clone(), x.src(d, id)?.clone())))
            .collect::<Result<BTreeMap<_, _>>>()
    }).collect::<Result<Vec<_>>>()?;
    let tgt = (2..=x.trunc()).map(|d| {
        x.cells(d)
            .iter()
            .map(|id| Ok((id.clone(), x.tgt(d, id)?.clone())))
            .collect::<Result<BTreeMap<_, _>>>()
    }).collect::<Result<Vec<_>>>()?;
    GlobSet::new_generated(trunc, cells, src, tgt)
}

/// All globular maps from `x` to `y`, in a deterministic order (cells are
/// assigned dimension by dimension, candidates tried in target order).
pub fn maps_between(x: &GlobSet, y: &GlobSet) -> Vec<GlobMap> {
    enumerate_maps(x, y, false)
}

/// All isomorphisms `x -> y`.
pub fn isos_between(x: &GlobSet, y: &GlobSet) -> Vec<GlobMap> {
    if x.trunc() != y.trunc() {
        return Vec::new();
    }
    if (0..=x.trunc()).any(|d| x.cells(d).len() != y.cells(d).len()) {
        return Vec::new();
    }
    enumerate_maps(x, y, true)
}

fn enumerate_maps(x: &GlobSet, y: &GlobSet, bijective: bool) -> Vec<GlobMap> {
    if y.trunc() < x.trunc() {
        // maps must provide images for every source dimension
        if (0..=x.trunc()).any(|d| d > y.trunc() && !x.cells(d).is_empty()) {
            return Vec::new();
        }
    }
    let order: Vec<CellRef> = x.all_cells().collect();
    let mut out = Vec::new();
    let mut assign: BTreeMap<(usize, CellId), CellId> = BTreeMap::new();
    let mut used: Vec<BTreeSet<CellId>> = vec![BTreeSet::new(); x.trunc() + 1];
    fn rec(
        x: &GlobSet,
        y: &GlobSet,
        order: &[CellRef],
        pos: usize,
        assign: &mut BTreeMap<(usize, CellId), CellId>,
        used: &mut Vec<BTreeSet<CellId>>,
        bijective: bool,
        out: &mut Vec<GlobMap>,
    ) {
        if pos == order.len() {
            let maps = (0..=x.trunc())
                .map(|d| {
                    x.cells(d)
                        .iter()
                        .map(|id| (id.clone(), assign[&(d, id.clone())].clone()))
                        .collect()
                })
                .collect();
            // construction guarantees validity
            out.push(GlobMap { source: x.clone(), target: y.clone(), maps });
            return;
        }
        let c = &order[pos];
        let want: Option<(CellId, CellId)> = if c.dim >= 1 {
            let s = x.src(c.dim, &c.id).unwrap();
            let t = x.tgt(c.dim, &c.id).unwrap();
            Some((
                assign[&(c.dim - 1, s.clone())].clone(),
                assign[&(c.dim - 1, t.clone())].clone(),
            ))
        } else {
            None
        };
        for img in y.cells(c.dim) {
            if bijective && used[c.dim].contains(img) {
                continue;
            }
            if let Some((ref ws, ref wt)) = want {
                if y.src(c.dim, img).unwrap() != ws || y.tgt(c.dim, img).unwrap() != wt {
                    continue;
                }
            }
            assign.insert((c.dim, c.id.clone()), img.clone());
            if bijective {
                used[c.dim].insert(img.clone());
            }
            rec(x, y, order, pos + 1, assign, used, bijective, out);
            assign.remove(&(c.dim, c.id.clone()));
            if bijective {
                used[c.dim].remove(img);
            }
        }
    }
    rec(x, y, &order, 0, &mut assign, &mut used, bijective, &mut out);
    out
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GlobSetJson {
    trunc: usize,
    cells: BTreeMap<String, Vec<CellId>>,
    src: BTreeMap<CellId, CellId>,
    tgt: BTreeMap<CellId, CellId>,
}

impl Serialize for GlobSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells = (0..=self.trunc)
            .map(|d| (d.to_string(), self.cells[d].clone()))
            .collect();
        let flat = |levels: &[BTreeMap<CellId, CellId>]| {
            levels
                .iter()
                .flat_map(|m| m.iter().map(|(k, v)| (k.clone(), v.clone())))
                .collect::<BTreeMap<_, _>>()
        };
        GlobSetJson { trunc: self.trunc, cells, src: flat(&self.src), tgt: flat(&self.tgt) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GlobSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GlobSetJson::deserialize(d)?;
        let mut cells = vec![Vec::new(); raw.trunc + 1];
        let mut dim_of: BTreeMap<CellId, usize> = BTreeMap::new();
        for (k, v) in &raw.cells {
            let dim: usize = k.parse().map_err(|_| D::Error::custom("bad dimension key"))?;
            if dim > raw.trunc {
                return Err(D::Error::custom("cell dimension exceeds trunc"));
            }
            for id in v {
                dim_of.insert(id.clone(), dim);
            }
            cells[dim] = v.clone();
        }
        let mut src = vec![BTreeMap::new(); raw.trunc];
        let mut tgt = vec![BTreeMap::new(); raw.trunc];
        for (maps, raws) in [(&mut src, &raw.src), (&mut tgt, &raw.tgt)] {
            for (k, v) in raws {
                let d = *dim_of.get(k).ok_or_else(|| D::Error::custom("src/tgt key unknown"))?;
                if d == 0 {
                    return Err(D::Error::custom("src/tgt on a 0-cell"));
                }
                maps[d - 1].insert(k.clone(), v.clone());
            }
        }
        GlobSet::new_generated(raw.trunc, cells, src, tgt).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct GlobMapJson {
    from: GlobSet,
    to: GlobSet,
    map: BTreeMap<String, BTreeMap<CellId, CellId>>,
}

impl Serialize for GlobMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map = (0..=self.source.trunc())
            .map(|d| (d.to_string(), self.maps[d].clone()))
            .collect();
        GlobMapJson { from: self.source.clone(), to: self.target.clone(), map }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GlobMap {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = GlobMapJson::deserialize(d)?;
        let mut maps = vec![BTreeMap::new(); raw.from.trunc() + 1];
        for (k, v) in raw.map {
            let dim: usize = k.parse().map_err(|_| D::Error::custom("bad dimension key"))?;
            if dim > raw.from.trunc() {
                return Err(D::Error::custom("map dimension exceeds source trunc"));
            }
            maps[dim] = v;
        }
        GlobMap::new(raw.from, raw.to, maps).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn loop_graph() -> GlobSet {
        GlobSetBuilder::new(1)
            .cell0("v")
            .cell(1, "l", "v", "v")
            .finish()
            .unwrap()
    }

    #[test]
    fn hom_of_loop_has_one_cell() {
        let x = loop_graph();
        let h = x.hom("v", "v").unwrap();
        assert_eq!(h.trunc(), 0);
        assert_eq!(h.cells(0), ["l".to_string()]);
    }

    #[test]
    fn hom_with_no_one_cells_is_empty() {
        let x = GlobSetBuilder::new(1).cell0("a").cell0("b").finish().unwrap();
        let h = x.hom("a", "b").unwrap();
        assert_eq!(h.cell_count(), 0);
    }

    #[test]
    fn hom_rejects_unknown_cells() {
        let x = loop_graph();
        assert!(x.hom("v", "w").is_err());
    }

    #[test]
    fn seq_of_points_is_a_path() {
        let p = GlobSet::point();
        let s = seq(&[p.clone(), p]).unwrap();
        assert_eq!(s.trunc(), 1);
        assert_eq!(s.cells(0).len(), 3);
        assert_eq!(s.cells(1).len(), 2);
        assert_eq!(s.src(1, "h1/0").unwrap(), "0");
        assert_eq!(s.tgt(1, "h2/0").unwrap(), "2");
    }

    #[test]
    fn empty_seq_is_a_point() {
        let s = seq(&[]).unwrap();
        assert_eq!(s.cells(0), ["0".to_string()]);
        assert_eq!(s.cell_count(), 1);
    }

    #[test]
    fn seq_of_one_differs_from_argument() {
        // (X) has two 0-cells regardless of X
        let x = loop_graph();
        let s = seq(&[x.clone()]).unwrap();
        assert_eq!(s.cells(0).len(), 2);
        assert_ne!(s.cells(0).len(), x.cells(0).len());
        // and hom(0,1) recovers X up to the tag renaming
        let h = s.hom("0", "1").unwrap();
        assert!(!isos_between(&h, &x).is_empty());
    }

    #[test]
    fn star_pullback_point_case() {
        let x = loop_graph();
        let zs = ZeroSeq::new(&x, vec!["v".to_string()]).unwrap();
        let (star, bar) = star_pullback(&x, &zs).unwrap();
        assert_eq!(star.cells(0).len(), 1);
        assert_eq!(bar.apply(0, "0").unwrap(), "v");
    }

    #[test]
    fn connectivity_on_loop() {
        let x = loop_graph();
        let one = ZeroSeq::new(&x, vec!["v".into()]).unwrap();
        assert!(x.is_connected(&one).unwrap());
        let two = GlobSetBuilder::new(1).cell0("a").cell0("b").finish().unwrap();
        let ab = ZeroSeq::new(&two, vec!["a".into(), "b".into()]).unwrap();
        assert!(!two.is_connected(&ab).unwrap());
    }

    #[test]
    fn coproduct_of_nothing_is_empty() {
        let (c, inj) = coproduct(&[]).unwrap();
        assert_eq!(c.cell_count(), 0);
        assert!(inj.is_empty());
    }

    #[test]
    fn pullback_along_identity_recovers_domain() {
        let x = loop_graph();
        let id = GlobMap::identity(&x);
        let (p, pa, _pb) = pullback(&id, &id).unwrap();
        assert_eq!(p.cell_count(), x.cell_count());
        assert!(pa.is_iso());
    }

    #[test]
    fn pullback_over_point_is_product() {
        let two = GlobSetBuilder::new(0).cell0("a").cell0("b").finish().unwrap();
        let pt = GlobSet::point();
        let to_pt = |x: &GlobSet| {
            let maps = vec![x.cells(0).iter().map(|c| (c.clone(), "0".to_string())).collect()];
            GlobMap::new(x.clone(), pt.clone(), maps).unwrap()
        };
        let (p, _, _) = pullback(&to_pt(&two), &to_pt(&two)).unwrap();
        assert_eq!(p.cell_count(), 4);
    }

    #[test]
    fn suspend_desuspend_roundtrip() {
        let x = loop_graph();
        let s = suspend(&x).unwrap();
        assert_eq!(s.cells(0).len(), 1);
        let back = desuspend(&s).unwrap();
        assert!(!isos_between(&back, &x).is_empty());
    }

    #[test]
    fn desuspend_of_seq_of_one_recovers_argument() {
        let x = loop_graph();
        let s = seq(&[x.clone()]).unwrap();
        let d = desuspend(&s).unwrap();
        assert!(!isos_between(&d, &x).is_empty());
    }

    #[test]
    fn suspend_of_empty_is_point() {
        let s = suspend(&GlobSet::empty(0)).unwrap();
        assert_eq!(s.cell_count(), 1);
    }

    #[test]
    fn globularity_is_enforced() {
        // a 2-cell whose source and target are not parallel
        let bad = GlobSetBuilder::new(2)
            .cell0("a")
            .cell0("b")
            .cell0("c")
            .cell(1, "f", "a", "b")
            .cell(1, "g", "b", "c")
            .cell(2, "m", "f", "g")
            .finish();
        assert!(bad.is_err());
    }

    #[test]
    fn maps_between_respects_structure() {
        let x = loop_graph();
        let path = seq(&[GlobSet::point(), GlobSet::point()]).unwrap();
        // path -> loop: both edges must collapse onto l
        let ms = maps_between(&path, &x);
        assert_eq!(ms.len(), 1);
        // loop -> path: no image for l
        assert!(maps_between(&x, &path).is_empty());
    }

    #[test]
    fn glob_json_roundtrip_is_bit_exact() {
        let x = loop_graph();
        let s1 = serde_json::to_string(&x).unwrap();
        let y: GlobSet = serde_json::from_str(&s1).unwrap();
        let s2 = serde_json::to_string(&y).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(x, y);
    }

    #[test]
    fn coproduct_universal_property_small() {
        let a = GlobSet::point();
        let b = loop_graph();
        // pad the point to trunc 1 to share the truncation
        let a1 = GlobSet::point_at(1);
        let (total, inj) = coproduct(&[a1.clone(), b.clone()]).unwrap();
        // cocone into the loop graph
        let fa = maps_between(&a1, &b).pop().unwrap();
        let fb = GlobMap::identity(&b);
        let mediating: Vec<GlobMap> = maps_between(&total, &b)
            .into_iter()
            .filter(|m| inj[0].then(m).unwrap() == fa && inj[1].then(m).unwrap() == fb)
            .collect();
        assert_eq!(mediating.len(), 1);
        drop(a);
    }

    #[test]
    fn pullback_universal_property_small() {
        let x = loop_graph();
        let id = GlobMap::identity(&x);
        let (p, pa, pb) = pullback(&id, &id).unwrap();
        // cone from the loop graph itself
        let cones: Vec<GlobMap> = maps_between(&x, &p)
            .into_iter()
            .filter(|m| m.then(&pa).unwrap() == id && m.then(&pb).unwrap() == id)
            .collect();
        assert_eq!(cones.len(), 1);
    }
}
