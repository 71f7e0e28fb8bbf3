//! The free strict n-category monad on globular sets.
//!
//! A cell of the free category on X is a pasting tree together with a
//! labelling of its realization in X. The monad unit labels a globe by the
//! boundaries of a single cell; the multiplication flattens a tree whose
//! cells are themselves labelled by free cells, by an inductive
//! factorization that also produces the generic witness of the composite.
//!
//! The free category on X is never materialized in full (it is infinite for
//! cyclic carriers); every operation here is per-cell or a bounded
//! enumeration with the tree size as the bound.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::glob::{CellId, CellRef, GlobMap, GlobSet};
use crate::tree::{globe_tree, sigma_map, tau_map, Tree};

/// A cell of the free category on a globular set: a tree of some dimension
/// together with a labelling of its realization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeCell {
    tree: Tree,
    label: GlobMap,
}

impl FreeCell {
    pub fn new(tree: Tree, label: GlobMap) -> Result<Self> {
        if label.source() != &tree.glob() {
            return Err(Error::incompatible("label domain is not the tree realization"));
        }
        Ok(FreeCell { tree, label })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn label(&self) -> &GlobMap {
        &self.label
    }

    pub fn carrier(&self) -> &GlobSet {
        self.label.target()
    }

    pub fn dim(&self) -> usize {
        self.tree.dim()
    }

    /// The carrier 0-cell named by a dimension-0 free cell.
    pub fn point_value(&self) -> Result<CellId> {
        if self.dim() != 0 {
            return Err(Error::invalid("point_value needs dimension 0"));
        }
        Ok(self.label.apply(0, "0")?.clone())
    }

    /// Source: boundary tree with the labelling restricted along σ.
    pub fn src(&self) -> Result<FreeCell> {
        let s = sigma_map(&self.tree)?;
        FreeCell::new(self.tree.boundary()?, s.then(&self.label)?)
    }

    /// Target: boundary tree with the labelling restricted along τ.
    pub fn tgt(&self) -> Result<FreeCell> {
        let t = tau_map(&self.tree)?;
        FreeCell::new(self.tree.boundary()?, t.then(&self.label)?)
    }

    /// Iterated boundary down to dimension k.
    pub fn src_k(&self, k: usize) -> Result<FreeCell> {
        let mut c = self.clone();
        while c.dim() > k {
            c = c.src()?;
        }
        Ok(c)
    }

    pub fn tgt_k(&self, k: usize) -> Result<FreeCell> {
        let mut c = self.clone();
        while c.dim() > k {
            c = c.tgt()?;
        }
        Ok(c)
    }

    /// Relabel along a carrier map.
    pub fn postcompose(&self, h: &GlobMap) -> Result<FreeCell> {
        FreeCell::new(self.tree.clone(), self.label.then(h)?)
    }

    /// Canonical identifier, injective on cells over a fixed carrier.
    pub fn canonical_id(&self) -> CellId {
        let g = self.tree.glob();
        let dims: Vec<String> = (0..=g.trunc())
            .map(|d| {
                g.cells(d)
                    .iter()
                    .map(|id| self.label.apply(d, id).unwrap().clone())
                    .collect::<Vec<_>>()
                    .join("¦")
            })
            .collect();
        format!("⟦{}¦{}⟧", self.tree, dims.join("§"))
    }

    /// Split a cell of dimension >= 1 into its 0-cell sequence and the free
    /// cells over the homs along it; the inverse of [`hom_reconstruct`].
    pub fn hom_decompose(&self) -> Result<(Vec<CellId>, Vec<FreeCell>)> {
        if self.dim() == 0 {
            return Err(Error::invalid("hom_decompose needs dimension >= 1"));
        }
        let m = self.tree.kids().len();
        let ys: Vec<CellId> = (0..=m)
            .map(|j| Ok(self.label.apply(0, &j.to_string())?.clone()))
            .collect::<Result<_>>()?;
        let x = self.carrier();
        let mut comps = Vec::new();
        for (idx, r) in self.tree.kids().iter().enumerate() {
            let j = idx + 1;
            let hom = x.hom(&ys[j - 1], &ys[j])?;
            let gr = r.glob();
            let maps = (0..=gr.trunc())
                .map(|d| {
                    gr.cells(d)
                        .iter()
                        .map(|c| {
                            Ok((c.clone(), self.label.apply(d + 1, &format!("h{j}/{c}"))?.clone()))
                        })
                        .collect::<Result<BTreeMap<_, _>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            comps.push(FreeCell::new(r.clone(), GlobMap::new(gr, hom, maps)?)?);
        }
        Ok((ys, comps))
    }
}

/// Rebuild a free cell over X of the given dimension from a 0-cell sequence
/// and free cells over the homs along it.
pub fn hom_reconstruct(
    x: &GlobSet,
    ys: &[CellId],
    comps: &[FreeCell],
    dim: usize,
) -> Result<FreeCell> {
    if ys.len() != comps.len() + 1 {
        return Err(Error::incompatible("sequence and component counts disagree"));
    }
    let mut kids = Vec::new();
    for (idx, c) in comps.iter().enumerate() {
        let j = idx + 1;
        if c.dim() + 1 != dim {
            return Err(Error::incompatible("component dimension mismatch"));
        }
        if c.carrier() != &x.hom(&ys[j - 1], &ys[j])? {
            return Err(Error::incompatible("component carrier is not the hom"));
        }
        kids.push(c.tree().clone());
    }
    let tree = Tree::node(dim, kids)?;
    let g = tree.glob();
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    for (j, y) in ys.iter().enumerate() {
        maps[0].insert(j.to_string(), y.clone());
    }
    for (idx, c) in comps.iter().enumerate() {
        let j = idx + 1;
        let gr = c.tree().glob();
        for d in 0..=gr.trunc() {
            for id in gr.cells(d) {
                maps[d + 1].insert(format!("h{j}/{id}"), c.label().apply(d, id)?.clone());
            }
        }
    }
    FreeCell::new(tree, GlobMap::new(g, x.clone(), maps)?)
}

/// Label keys of the globe pattern `prefix + "h1/"*j + {0,1}` by the iterated
/// boundaries of a carrier cell, with local dimension 0 sitting at ambient
/// dimension `base`.
pub(crate) fn globe_pattern_into(
    x: &GlobSet,
    cell_dim: usize,
    id: &str,
    prefix: &str,
    base: usize,
    maps: &mut [BTreeMap<CellId, CellId>],
) -> Result<()> {
    for j in 0..(cell_dim - base) {
        let reps = "h1/".repeat(j);
        maps[base + j].insert(format!("{prefix}{reps}0"), x.src_k(cell_dim, id, base + j)?);
        maps[base + j].insert(format!("{prefix}{reps}1"), x.tgt_k(cell_dim, id, base + j)?);
    }
    let reps = "h1/".repeat(cell_dim - base);
    maps[cell_dim].insert(format!("{prefix}{reps}0"), id.to_string());
    Ok(())
}

/// The monad unit: an n-cell of X becomes the globe tree labelled by the
/// cell and its iterated boundaries.
pub fn unit(x: &GlobSet, dim: usize, id: &str) -> Result<FreeCell> {
    if !x.has_cell(dim, id) {
        return Err(Error::UnknownCell { dim, id: id.to_string() });
    }
    let tree = globe_tree(dim);
    let g = tree.glob();
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    globe_pattern_into(x, dim, id, "", 0, &mut maps)?;
    FreeCell::new(tree, GlobMap::new(g, x.clone(), maps)?)
}

/// All free cells over X of the given dimension with tree size at most
/// `max_size`, in canonical order (tree order, then labelling order).
pub fn free_cells(x: &GlobSet, dim: usize, max_size: usize) -> Result<Vec<FreeCell>> {
    if dim > x.trunc() {
        return Err(Error::DimExceedsTrunc { dim, trunc: x.trunc() });
    }
    let mut out = Vec::new();
    for p in crate::tree::enumerate_trees(dim, max_size) {
        let g = p.glob();
        for m in crate::glob::maps_between(&g, x) {
            out.push(FreeCell { tree: p.clone(), label: m });
        }
    }
    Ok(out)
}

/// A map from a tree realization into the free category on X, stored as an
/// explicit per-cell table so equality and uniqueness searches are decidable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeOverFree {
    tree: Tree,
    carrier: GlobSet,
    labels: BTreeMap<(usize, CellId), FreeCell>,
}

impl FreeOverFree {
    pub fn new(
        tree: Tree,
        carrier: GlobSet,
        labels: BTreeMap<(usize, CellId), FreeCell>,
    ) -> Result<Self> {
        let g = tree.glob();
        if labels.len() != g.cell_count() {
            return Err(Error::incompatible("label table does not match the realization"));
        }
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                let l = labels
                    .get(&(d, id.clone()))
                    .ok_or_else(|| Error::incompatible(format!("no label at `{id}`")))?;
                if l.dim() != d {
                    return Err(Error::incompatible(format!("label at `{id}` has wrong dimension")));
                }
                if l.carrier() != &carrier {
                    return Err(Error::incompatible("label over a different carrier"));
                }
                if d >= 1 {
                    let s = g.src(d, id)?;
                    let t = g.tgt(d, id)?;
                    if labels[&(d - 1, s.clone())] != l.src()? {
                        return Err(Error::incompatible(format!("labels break src at `{id}`")));
                    }
                    if labels[&(d - 1, t.clone())] != l.tgt()? {
                        return Err(Error::incompatible(format!("labels break tgt at `{id}`")));
                    }
                }
            }
        }
        Ok(FreeOverFree { tree, carrier, labels })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn carrier(&self) -> &GlobSet {
        &self.carrier
    }

    pub fn labels(&self) -> &BTreeMap<(usize, CellId), FreeCell> {
        &self.labels
    }

    pub fn label_at(&self, dim: usize, id: &str) -> Result<&FreeCell> {
        self.labels
            .get(&(dim, id.to_string()))
            .ok_or_else(|| Error::UnknownCell { dim, id: id.to_string() })
    }

    /// Relabel every free cell along a carrier map (the functor action).
    pub fn postcompose(&self, h: &GlobMap) -> Result<FreeOverFree> {
        let labels = self
            .labels
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.postcompose(h)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        FreeOverFree::new(self.tree.clone(), h.target().clone(), labels)
    }

    /// Restrict along σ (the source of this value seen as a two-level cell).
    pub fn src(&self) -> Result<FreeOverFree> {
        self.precompose_boundary(true)
    }

    pub fn tgt(&self) -> Result<FreeOverFree> {
        self.precompose_boundary(false)
    }

    fn precompose_boundary(&self, is_sigma: bool) -> Result<FreeOverFree> {
        let m = if is_sigma { sigma_map(&self.tree)? } else { tau_map(&self.tree)? };
        let b = self.tree.boundary()?;
        let gb = b.glob();
        let mut labels = BTreeMap::new();
        for d in 0..=gb.trunc() {
            for id in gb.cells(d) {
                let img = m.apply(d, id)?;
                labels.insert((d, id.clone()), self.labels[&(d, img.clone())].clone());
            }
        }
        FreeOverFree::new(b, self.carrier.clone(), labels)
    }
}

/// The image of a free cell under the unit at the free category itself: the
/// globe tree labelled by the cell and its boundaries.
pub fn unit_over_free(c: &FreeCell) -> Result<FreeOverFree> {
    let n = c.dim();
    let mut labels = BTreeMap::new();
    for k in 0..n {
        let reps = "h1/".repeat(k);
        labels.insert((k, format!("{reps}0")), c.src_k(k)?);
        labels.insert((k, format!("{reps}1")), c.tgt_k(k)?);
    }
    labels.insert((n, format!("{}0", "h1/".repeat(n))), c.clone());
    FreeOverFree::new(globe_tree(n), c.carrier().clone(), labels)
}

/// The image of a free cell under the free functor applied to the unit:
/// every cell of the realization is relabelled by the unit of its label.
pub fn eta_relabel(c: &FreeCell) -> Result<FreeOverFree> {
    let g = c.tree().glob();
    let x = c.carrier();
    let mut labels = BTreeMap::new();
    for d in 0..=g.trunc() {
        for id in g.cells(d) {
            labels.insert((d, id.clone()), unit(x, d, c.label().apply(d, id)?)?);
        }
    }
    FreeOverFree::new(c.tree().clone(), x.clone(), labels)
}

/// The decomposition of a two-level labelling into its hom map components.
pub struct HomComponents {
    /// The 0-cell of X at position 0.
    pub x0: CellId,
    /// Per hom i: the 0-cell sequence `x_{i0} .. x_{im_i}` (with endpoints).
    pub seqs: Vec<Vec<CellId>>,
    /// comps[i][j]: the (i,j) component, a labelling of kid i over the hom
    /// `X(x_{i(j-1)}, x_{ij})`.
    pub comps: Vec<Vec<FreeOverFree>>,
}

/// Split a two-level labelling of a tree of dimension >= 1 into its 0-cells
/// and hom map components.
pub fn hom_components(f: &FreeOverFree) -> Result<HomComponents> {
    let p = f.tree();
    if p.dim() == 0 {
        return Err(Error::invalid("hom components need dimension >= 1"));
    }
    let x = f.carrier();
    let k = p.kids().len();
    let f0: Vec<CellId> = (0..=k)
        .map(|i| f.label_at(0, &i.to_string())?.point_value())
        .collect::<Result<_>>()?;
    let mut seqs = Vec::new();
    let mut comps = Vec::new();
    for (idx, kid) in p.kids().iter().enumerate() {
        let i = idx + 1;
        let gk = kid.glob();
        let mut seq_i: Option<Vec<CellId>> = None;
        let mut per_cell: BTreeMap<(usize, CellId), Vec<FreeCell>> = BTreeMap::new();
        for d in 0..=gk.trunc() {
            for c in gk.cells(d) {
                let lab = f.label_at(d + 1, &format!("h{i}/{c}"))?;
                let (ys, cs) = lab.hom_decompose()?;
                match &seq_i {
                    None => seq_i = Some(ys),
                    Some(prev) if *prev != ys => {
                        return Err(Error::incompatible(
                            "labels along a hom decompose over different 0-cell sequences",
                        ))
                    }
                    _ => {}
                }
                per_cell.insert((d, c.clone()), cs);
            }
        }
        let ys = seq_i.expect("realizations are non-empty");
        if ys[0] != f0[i - 1] || ys[ys.len() - 1] != f0[i] {
            return Err(Error::incompatible("hom decomposition endpoints disagree"));
        }
        let m = ys.len() - 1;
        let mut row = Vec::new();
        for j in 0..m {
            let hom = x.hom(&ys[j], &ys[j + 1])?;
            let labels = per_cell
                .iter()
                .map(|(key, cs)| (key.clone(), cs[j].clone()))
                .collect();
            row.push(FreeOverFree::new(kid.clone(), hom, labels)?);
        }
        seqs.push(ys);
        comps.push(row);
    }
    Ok(HomComponents { x0: f0[0].clone(), seqs, comps })
}

/// The result of the multiplication: the flattened composite cell together
/// with the generic witness through the free category on its realization.
pub struct Mu {
    pub cell: FreeCell,
    pub witness: FreeOverFree,
}

/// The multiplication of the free-category monad, by induction on the tree
/// dimension. The witness g satisfies `f = T(h) ∘ g` where h is the
/// labelling of the result, and is the unique such value whose own
/// multiplication has an identity labelling.
pub fn mu(f: &FreeOverFree) -> Result<Mu> {
    let p = f.tree();
    let x = f.carrier();
    if p.dim() == 0 {
        let inner = f.label_at(0, "0")?.clone();
        let gq = inner.tree().glob();
        let mut labels = BTreeMap::new();
        labels.insert(
            (0, "0".to_string()),
            FreeCell::new(Tree::leaf(), GlobMap::identity(&gq))?,
        );
        let witness = FreeOverFree::new(Tree::leaf(), gq, labels)?;
        return Ok(Mu { cell: inner, witness });
    }
    let hc = hom_components(f)?;
    let n = p.dim();
    // multiply every component
    let mut subs: Vec<Vec<Mu>> = Vec::new();
    for row in &hc.comps {
        subs.push(row.iter().map(mu).collect::<Result<_>>()?);
    }
    // the flattened tree and its 0-cell values
    let mut kids: Vec<Tree> = Vec::new();
    let mut xflat: Vec<CellId> = vec![hc.x0.clone()];
    for (i, row) in subs.iter().enumerate() {
        for (j, m) in row.iter().enumerate() {
            kids.push(m.cell.tree().clone());
            xflat.push(hc.seqs[i][j + 1].clone());
        }
    }
    let q = Tree::node(n, kids)?;
    let gq = q.glob();
    // h : glob(q) -> X
    let mut hmaps = vec![BTreeMap::new(); gq.trunc() + 1];
    for (l, v) in xflat.iter().enumerate() {
        hmaps[0].insert(l.to_string(), v.clone());
    }
    let mut l = 0usize;
    for row in &subs {
        for m in row {
            l += 1;
            let gr = m.cell.tree().glob();
            for d in 0..=gr.trunc() {
                for id in gr.cells(d) {
                    hmaps[d + 1]
                        .insert(format!("h{l}/{id}"), m.cell.label().apply(d, id)?.clone());
                }
            }
        }
    }
    let cell = FreeCell::new(q.clone(), GlobMap::new(gq.clone(), x.clone(), hmaps)?)?;
    // the generic witness g : p -> T(glob q)
    let mut pos = vec![0usize];
    for row in &subs {
        pos.push(pos.last().unwrap() + row.len());
    }
    let mut wlabels: BTreeMap<(usize, CellId), FreeCell> = BTreeMap::new();
    for (i, posi) in pos.iter().enumerate() {
        let mut m0 = BTreeMap::new();
        m0.insert("0".to_string(), posi.to_string());
        let pt = GlobMap::new(GlobSet::point(), gq.clone(), vec![m0])?;
        wlabels.insert((0, i.to_string()), FreeCell::new(Tree::leaf(), pt)?);
    }
    for (idx, kid) in p.kids().iter().enumerate() {
        let i = idx + 1;
        let gk = kid.glob();
        let m_i = subs[idx].len();
        let ys: Vec<CellId> = (pos[idx]..=pos[idx] + m_i).map(|v| v.to_string()).collect();
        for d in 0..=gk.trunc() {
            for c in gk.cells(d) {
                let mut comps_for_cell = Vec::new();
                for (jdx, m) in subs[idx].iter().enumerate() {
                    let lflat = pos[idx] + jdx + 1;
                    let hom = gq.hom(&(lflat - 1).to_string(), &lflat.to_string())?;
                    let w = m.witness.label_at(d, c)?;
                    // relabel the witness component into the hom of glob(q)
                    let gr = w.tree().glob();
                    let maps = (0..=gr.trunc())
                        .map(|e| {
                            gr.cells(e)
                                .iter()
                                .map(|cc| {
                                    Ok((
                                        cc.clone(),
                                        format!("h{lflat}/{}", w.label().apply(e, cc)?),
                                    ))
                                })
                                .collect::<Result<BTreeMap<_, _>>>()
                        })
                        .collect::<Result<Vec<_>>>()?;
                    comps_for_cell
                        .push(FreeCell::new(w.tree().clone(), GlobMap::new(gr, hom, maps)?)?);
                }
                let lifted = hom_reconstruct(&gq, &ys, &comps_for_cell, d + 1)?;
                wlabels.insert((d + 1, format!("h{i}/{c}")), lifted);
            }
        }
    }
    let witness = FreeOverFree::new(p.clone(), gq, wlabels)?;
    Ok(Mu { cell, witness })
}

/// The representable generic factorization of a free cell: the cell splits
/// as its own tree with the identity labelling, followed by the free functor
/// applied to the label.
pub struct GenericFactorization {
    pub tree: Tree,
    /// The generic part: the identity-labelled cell over the realization.
    pub generic: FreeCell,
    /// The free part: the original labelling.
    pub free_part: GlobMap,
}

pub fn generic_factor(c: &FreeCell) -> Result<GenericFactorization> {
    let g = c.tree().glob();
    let generic = FreeCell::new(c.tree().clone(), GlobMap::identity(&g))?;
    // genericity witness: multiplying the unit labelling of the generic part
    // must return it with an identity labelling
    let m = mu(&unit_over_free(&generic)?)?;
    if m.cell.tree() != c.tree() || !m.cell.label().is_identity() {
        return Err(Error::invalid("generic factorization witness failed"));
    }
    Ok(GenericFactorization {
        tree: c.tree().clone(),
        generic,
        free_part: c.label().clone(),
    })
}

/// A bounded enumeration of the free category on X as a globular set, with
/// canonical cell identifiers and a decode table.
pub struct FreeGlob {
    pub set: GlobSet,
    decode: BTreeMap<(usize, CellId), FreeCell>,
}

impl FreeGlob {
    pub fn decode(&self, dim: usize, id: &str) -> Result<&FreeCell> {
        self.decode
            .get(&(dim, id.to_string()))
            .ok_or_else(|| Error::UnknownCell { dim, id: id.to_string() })
    }

    /// Reinterpret a free cell over `self.set` as a two-level labelling over
    /// the base carrier.
    pub fn decode_over(&self, c: &FreeCell) -> Result<FreeOverFree> {
        let base = self
            .decode
            .values()
            .next()
            .map(|fc| fc.carrier().clone())
            .ok_or_else(|| Error::invalid("empty free enumeration"))?;
        let g = c.tree().glob();
        let mut labels = BTreeMap::new();
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                labels.insert((d, id.clone()), self.decode(d, c.label().apply(d, id)?)?.clone());
            }
        }
        FreeOverFree::new(c.tree().clone(), base, labels)
    }
}

/// Materialize the free category on X up to a tree-size bound. The
/// enumeration is closed under boundaries because boundaries never grow
/// trees.
pub fn free_globset(x: &GlobSet, max_size: usize) -> Result<FreeGlob> {
    let trunc = x.trunc();
    let mut cells = vec![Vec::new(); trunc + 1];
    let mut src = vec![BTreeMap::new(); trunc];
    let mut tgt = vec![BTreeMap::new(); trunc];
    let mut decode = BTreeMap::new();
    for d in 0..=trunc {
        for c in free_cells(x, d, max_size)? {
            let id = c.canonical_id();
            cells[d].push(id.clone());
            if d >= 1 {
                src[d - 1].insert(id.clone(), c.src()?.canonical_id());
                tgt[d - 1].insert(id.clone(), c.tgt()?.canonical_id());
            }
            decode.insert((d, id), c);
        }
    }
    let set = GlobSet::new_generated(trunc, cells, src, tgt)?;
    Ok(FreeGlob { set, decode })
}

/// All two-level labellings of a tree over X with label tree sizes at most
/// `max_size`, in a deterministic order.
pub fn enumerate_over_free(x: &GlobSet, p: &Tree, max_size: usize) -> Result<Vec<FreeOverFree>> {
    let g = p.glob();
    let mut by_dim: Vec<Vec<FreeCell>> = Vec::new();
    for d in 0..=g.trunc() {
        by_dim.push(free_cells(x, d, max_size)?);
    }
    // index candidates by their boundary pair
    let mut by_bnd: Vec<BTreeMap<(CellId, CellId), Vec<usize>>> = vec![BTreeMap::new()];
    for d in 1..=g.trunc() {
        let mut idx: BTreeMap<(CellId, CellId), Vec<usize>> = BTreeMap::new();
        for (i, c) in by_dim[d].iter().enumerate() {
            let key = (c.src()?.canonical_id(), c.tgt()?.canonical_id());
            idx.entry(key).or_default().push(i);
        }
        by_bnd.push(idx);
    }
    let order: Vec<CellRef> = g.all_cells().collect();
    let mut out = Vec::new();
    let mut assign: BTreeMap<(usize, CellId), usize> = BTreeMap::new();
    #[allow(clippy::too_many_arguments)]
    fn rec(
        g: &GlobSet,
        x: &GlobSet,
        p: &Tree,
        order: &[CellRef],
        by_dim: &[Vec<FreeCell>],
        by_bnd: &[BTreeMap<(CellId, CellId), Vec<usize>>],
        pos: usize,
        assign: &mut BTreeMap<(usize, CellId), usize>,
        out: &mut Vec<FreeOverFree>,
    ) -> Result<()> {
        if pos == order.len() {
            let labels = assign
                .iter()
                .map(|(k, &i)| (k.clone(), by_dim[k.0][i].clone()))
                .collect();
            out.push(FreeOverFree {
                tree: p.clone(),
                carrier: x.clone(),
                labels,
            });
            return Ok(());
        }
        let c = &order[pos];
        let candidates: Vec<usize> = if c.dim == 0 {
            (0..by_dim[0].len()).collect()
        } else {
            let s = g.src(c.dim, &c.id)?;
            let t = g.tgt(c.dim, &c.id)?;
            let key = (
                by_dim[c.dim - 1][assign[&(c.dim - 1, s.clone())]].canonical_id(),
                by_dim[c.dim - 1][assign[&(c.dim - 1, t.clone())]].canonical_id(),
            );
            by_bnd[c.dim].get(&key).cloned().unwrap_or_default()
        };
        for i in candidates {
            assign.insert((c.dim, c.id.clone()), i);
            rec(g, x, p, order, by_dim, by_bnd, pos + 1, assign, out)?;
            assign.remove(&(c.dim, c.id.clone()));
        }
        Ok(())
    }
    rec(&g, x, p, &order, &by_dim, &by_bnd, 0, &mut assign, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Finite presentations of algebras: composition tables and evaluation.
// ---------------------------------------------------------------------------

/// A finite presentation of a strict n-category: identity maps per
/// dimension and binary compositions over every codimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionTables {
    carrier: GlobSet,
    /// identities[d]: d-cell -> (d+1)-cell, for d < trunc.
    identities: Vec<BTreeMap<CellId, CellId>>,
    /// comps[(d, k)]: composition of d-cells over their k-boundary, in
    /// diagram order (left argument first).
    comps: BTreeMap<(usize, usize), BTreeMap<(CellId, CellId), CellId>>,
}

impl CompositionTables {
    pub fn new(
        carrier: GlobSet,
        identities: Vec<BTreeMap<CellId, CellId>>,
        comps: BTreeMap<(usize, usize), BTreeMap<(CellId, CellId), CellId>>,
    ) -> Result<Self> {
        let t = CompositionTables { carrier, identities, comps };
        t.validate_shape()?;
        Ok(t)
    }

    pub fn carrier(&self) -> &GlobSet {
        &self.carrier
    }

    /// Structural validation: identities and compositions are total on
    /// composable data, land at the right dimensions and have the right
    /// boundaries. Category laws are checked separately.
    pub fn validate_shape(&self) -> Result<()> {
        let n = self.carrier.trunc();
        if self.identities.len() != n {
            return Err(Error::invalid("identities must cover dimensions below trunc"));
        }
        for d in 0..n {
            for id in self.carrier.cells(d) {
                let i = self.identities[d]
                    .get(id)
                    .ok_or_else(|| Error::MissingEntry(format!("identity of `{id}`")))?;
                if !self.carrier.has_cell(d + 1, i) {
                    return Err(Error::invalid("identity lands at the wrong dimension"));
                }
                if self.carrier.src(d + 1, i)? != id || self.carrier.tgt(d + 1, i)? != id {
                    return Err(Error::invalid(format!("identity of `{id}` has wrong boundaries")));
                }
            }
        }
        for d in 1..=n {
            for k in 0..d {
                let table = self.comps.get(&(d, k));
                for a in self.carrier.cells(d) {
                    for b in self.carrier.cells(d) {
                        if self.carrier.tgt_k(d, a, k)? != self.carrier.src_k(d, b, k)? {
                            continue;
                        }
                        let r = table
                            .and_then(|t| t.get(&(a.clone(), b.clone())))
                            .ok_or_else(|| {
                                Error::MissingEntry(format!("composition ({a} over {k} {b})"))
                            })?;
                        if !self.carrier.has_cell(d, r) {
                            return Err(Error::invalid("composition lands at wrong dimension"));
                        }
                        if self.carrier.src_k(d, r, k)? != self.carrier.src_k(d, a, k)?
                            || self.carrier.tgt_k(d, r, k)? != self.carrier.tgt_k(d, b, k)?
                        {
                            return Err(Error::invalid(format!(
                                "composite of `{a}` and `{b}` has wrong k-boundaries"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn identity(&self, dim: usize, id: &str) -> Result<CellId> {
        self.identities
            .get(dim)
            .and_then(|m| m.get(id))
            .cloned()
            .ok_or_else(|| Error::MissingEntry(format!("identity of `{id}` at dim {dim}")))
    }

    pub fn compose(&self, dim: usize, k: usize, a: &str, b: &str) -> Result<CellId> {
        self.comps
            .get(&(dim, k))
            .and_then(|t| t.get(&(a.to_string(), b.to_string())))
            .cloned()
            .ok_or_else(|| Error::MissingEntry(format!("({a} over {k} {b}) at dim {dim}")))
    }

    /// Exhaustive strict-category law check on the finite data: units,
    /// associativity, identity functoriality and interchange.
    pub fn check_laws(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let x = &self.carrier;
        let n = x.trunc();
        let iter_id = |id: &CellId, from: usize, to: usize| -> Result<CellId> {
            let mut cur = id.clone();
            for d in from..to {
                cur = self.identity(d, &cur)?;
            }
            Ok(cur)
        };
        let mut run = |msg: String, chk: &dyn Fn() -> Result<bool>| match chk() {
            Ok(true) => {}
            Ok(false) => bad.push(msg),
            Err(e) => bad.push(format!("{msg}: {e}")),
        };
        for d in 1..=n {
            for k in 0..d {
                for a in x.cells(d) {
                    let a = a.clone();
                    run(format!("right unit of `{a}` over {k}"), &|| {
                        let u = iter_id(&x.tgt_k(d, &a, k)?, k, d)?;
                        Ok(self.compose(d, k, &a, &u)? == a)
                    });
                    run(format!("left unit of `{a}` over {k}"), &|| {
                        let u = iter_id(&x.src_k(d, &a, k)?, k, d)?;
                        Ok(self.compose(d, k, &u, &a)? == a)
                    });
                }
                for a in x.cells(d) {
                    for b in x.cells(d) {
                        if x.tgt_k(d, a, k).unwrap() != x.src_k(d, b, k).unwrap() {
                            continue;
                        }
                        for c in x.cells(d) {
                            if x.tgt_k(d, b, k).unwrap() != x.src_k(d, c, k).unwrap() {
                                continue;
                            }
                            run(format!("associativity ({a},{b},{c}) over {k}"), &|| {
                                let ab = self.compose(d, k, a, b)?;
                                let bc = self.compose(d, k, b, c)?;
                                Ok(self.compose(d, k, &ab, c)? == self.compose(d, k, a, &bc)?)
                            });
                        }
                    }
                }
                if d < n {
                    for a in x.cells(d) {
                        for b in x.cells(d) {
                            if x.tgt_k(d, a, k).unwrap() != x.src_k(d, b, k).unwrap() {
                                continue;
                            }
                            run(format!("id of ({a} over {k} {b})"), &|| {
                                let ab = self.compose(d, k, a, b)?;
                                Ok(self.identity(d, &ab)?
                                    == self.compose(
                                        d + 1,
                                        k,
                                        &self.identity(d, a)?,
                                        &self.identity(d, b)?,
                                    )?)
                            });
                        }
                    }
                }
                for l in (k + 1)..d {
                    for a in x.cells(d) {
                        for b in x.cells(d) {
                            if x.tgt_k(d, a, l).unwrap() != x.src_k(d, b, l).unwrap() {
                                continue;
                            }
                            for c in x.cells(d) {
                                if x.tgt_k(d, a, k).unwrap() != x.src_k(d, c, k).unwrap() {
                                    continue;
                                }
                                for e in x.cells(d) {
                                    if x.tgt_k(d, c, l).unwrap() != x.src_k(d, e, l).unwrap()
                                        || x.tgt_k(d, b, k).unwrap() != x.src_k(d, e, k).unwrap()
                                    {
                                        continue;
                                    }
                                    run(
                                        format!("interchange ({a},{b};{c},{e}) over ({k},{l})"),
                                        &|| {
                                            let lhs = self.compose(
                                                d,
                                                k,
                                                &self.compose(d, l, a, b)?,
                                                &self.compose(d, l, c, e)?,
                                            )?;
                                            let rhs = self.compose(
                                                d,
                                                l,
                                                &self.compose(d, k, a, c)?,
                                                &self.compose(d, k, b, e)?,
                                            )?;
                                            Ok(lhs == rhs)
                                        },
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        bad
    }
}

/// Evaluation of free cells in a finitely presented algebra.
pub trait PastingAlgebra {
    fn carrier(&self) -> &GlobSet;
    fn eval(&self, c: &FreeCell) -> Result<CellRef>;
}

impl PastingAlgebra for CompositionTables {
    fn carrier(&self) -> &GlobSet {
        &self.carrier
    }

    fn eval(&self, c: &FreeCell) -> Result<CellRef> {
        eval_pasting(self, c)
    }
}

/// Evaluate a free cell in composition tables: leaves return their label,
/// sequences evaluate their hom parts one dimension up and compose them
/// left to right over the 0-boundary, with identities inserted for empty
/// trees.
pub fn eval_pasting(t: &CompositionTables, c: &FreeCell) -> Result<CellRef> {
    if c.carrier() != &t.carrier {
        return Err(Error::incompatible("cell is not over the table carrier"));
    }
    let id = eval_rec(t, 0, c.tree(), &|d, id| Ok(c.label().apply(d, id)?.clone()))?;
    Ok(CellRef::new(c.dim(), id))
}

fn eval_rec(
    t: &CompositionTables,
    depth: usize,
    tree: &Tree,
    get: &dyn Fn(usize, &str) -> Result<CellId>,
) -> Result<CellId> {
    let n = tree.dim();
    if n == 0 {
        return get(0, "0");
    }
    if tree.kids().is_empty() {
        let mut cur = get(0, "0")?;
        for d in 0..n {
            cur = t.identity(depth + d, &cur)?;
        }
        return Ok(cur);
    }
    let mut acc: Option<CellId> = None;
    for (idx, kid) in tree.kids().iter().enumerate() {
        let tag = format!("h{}/", idx + 1);
        let v = eval_rec(t, depth + 1, kid, &|d, id| get(d + 1, &format!("{tag}{id}")))?;
        acc = Some(match acc {
            None => v,
            Some(prev) => t.compose(depth + n, depth, &prev, &v)?,
        });
    }
    Ok(acc.expect("non-empty kids"))
}

/// The tree whose realization is the d-globe, one dimension up: evaluating
/// it computes the identity on a d-cell.
pub fn identity_tree(d: usize) -> Tree {
    let mut t = Tree::line(0);
    for e in 2..=d + 1 {
        t = Tree::node(e, vec![t]).expect("dims line up");
    }
    t
}

/// The pasting tree for a binary composite of d-cells over codimension k.
pub fn pair_tree(d: usize, k: usize) -> Tree {
    if k == 0 {
        Tree::node(d, vec![globe_tree(d - 1), globe_tree(d - 1)]).expect("dims line up")
    } else {
        Tree::node(d, vec![pair_tree(d - 1, k - 1)]).expect("dims line up")
    }
}

/// The free cell computing the identity on a carrier cell.
pub fn identity_cell(x: &GlobSet, dim: usize, id: &str) -> Result<FreeCell> {
    let tree = identity_tree(dim);
    let g = tree.glob();
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    globe_pattern_into(x, dim, id, "", 0, &mut maps)?;
    FreeCell::new(tree, GlobMap::new(g, x.clone(), maps)?)
}

/// The free cell computing a binary composite `a ∘_k b` of d-cells.
pub fn pair_cell(x: &GlobSet, d: usize, k: usize, a: &str, b: &str) -> Result<FreeCell> {
    if x.tgt_k(d, a, k)? != x.src_k(d, b, k)? {
        return Err(Error::incompatible(format!("`{a}` and `{b}` not composable over {k}")));
    }
    let tree = pair_tree(d, k);
    let g = tree.glob();
    let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
    fill_pair(x, d, a, b, k, "", 0, &mut maps)?;
    FreeCell::new(tree, GlobMap::new(g, x.clone(), maps)?)
}

fn fill_pair(
    x: &GlobSet,
    d: usize,
    a: &str,
    b: &str,
    kk: usize,
    prefix: &str,
    depth: usize,
    maps: &mut [BTreeMap<CellId, CellId>],
) -> Result<()> {
    if kk == 0 {
        maps[depth].insert(format!("{prefix}0"), x.src_k(d, a, depth)?);
        maps[depth].insert(format!("{prefix}1"), x.tgt_k(d, a, depth)?);
        maps[depth].insert(format!("{prefix}2"), x.tgt_k(d, b, depth)?);
        globe_pattern_into(x, d, a, &format!("{prefix}h1/"), depth + 1, maps)?;
        globe_pattern_into(x, d, b, &format!("{prefix}h2/"), depth + 1, maps)?;
        return Ok(());
    }
    maps[depth].insert(format!("{prefix}0"), x.src_k(d, a, depth)?);
    maps[depth].insert(format!("{prefix}1"), x.tgt_k(d, a, depth)?);
    fill_pair(x, d, a, b, kk - 1, &format!("{prefix}h1/"), depth + 1, maps)
}

/// Extract composition tables from any pasting evaluator by evaluating the
/// identity and binary-composite shapes.
pub fn tables_from_oracle(alg: &dyn PastingAlgebra) -> Result<CompositionTables> {
    let x = alg.carrier().clone();
    let n = x.trunc();
    let mut identities = Vec::new();
    for d in 0..n {
        let mut m = BTreeMap::new();
        for id in x.cells(d) {
            m.insert(id.clone(), alg.eval(&identity_cell(&x, d, id)?)?.id);
        }
        identities.push(m);
    }
    let mut comps = BTreeMap::new();
    for d in 1..=n {
        for k in 0..d {
            let mut table = BTreeMap::new();
            for a in x.cells(d) {
                for b in x.cells(d) {
                    if x.tgt_k(d, a, k)? == x.src_k(d, b, k)? {
                        let r = alg.eval(&pair_cell(&x, d, k, a, b)?)?;
                        table.insert((a.clone(), b.clone()), r.id);
                    }
                }
            }
            comps.insert((d, k), table);
        }
    }
    CompositionTables::new(x, identities, comps)
}

/// Law check for an arbitrary evaluator against the monad structure, on a
/// bounded enumeration: units evaluate to their cell, evaluation commutes
/// with boundaries, and evaluating a multiplied labelling agrees with
/// evaluating the pointwise-evaluated relabelling.
pub fn check_algebra(alg: &dyn PastingAlgebra, max_size: usize) -> Result<Vec<String>> {
    let x = alg.carrier().clone();
    let mut bad = Vec::new();
    for d in 0..=x.trunc() {
        for id in x.cells(d) {
            if alg.eval(&unit(&x, d, id)?)?.id != *id {
                bad.push(format!("unit law fails at `{id}`"));
            }
        }
        for c in free_cells(&x, d, max_size)? {
            let v = alg.eval(&c)?;
            if d >= 1 {
                let sv = alg.eval(&c.src()?)?;
                if x.src(d, &v.id)? != &sv.id {
                    bad.push(format!("src compatibility fails at `{}`", c.canonical_id()));
                }
                let tv = alg.eval(&c.tgt()?)?;
                if x.tgt(d, &v.id)? != &tv.id {
                    bad.push(format!("tgt compatibility fails at `{}`", c.canonical_id()));
                }
            }
        }
    }
    // multiplication compatibility on small two-level labellings
    for d in 0..=x.trunc() {
        for p in crate::tree::enumerate_trees(d, 3) {
            for f in enumerate_over_free(&x, &p, 2)? {
                let composite = mu(&f)?.cell;
                let g = p.glob();
                let mut maps = vec![BTreeMap::new(); g.trunc() + 1];
                for e in 0..=g.trunc() {
                    for id in g.cells(e) {
                        maps[e].insert(id.clone(), alg.eval(f.label_at(e, id)?)?.id);
                    }
                }
                let relabelled = FreeCell::new(p.clone(), GlobMap::new(g, x.clone(), maps)?)?;
                if alg.eval(&composite)? != alg.eval(&relabelled)? {
                    bad.push(format!("mu compatibility fails at tree {p}"));
                }
            }
        }
    }
    Ok(bad)
}

// ---------------------------------------------------------------------------
// JSON forms
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FreeCellJson {
    tree: Tree,
    label: GlobMap,
}

impl Serialize for FreeCell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FreeCellJson { tree: self.tree.clone(), label: self.label.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FreeCell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FreeCellJson::deserialize(d)?;
        FreeCell::new(raw.tree, raw.label).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct LabelEntry {
    dim: usize,
    cell: CellId,
    value: FreeCell,
}

#[derive(Serialize, Deserialize)]
struct FreeOverFreeJson {
    tree: Tree,
    carrier: GlobSet,
    labels: Vec<LabelEntry>,
}

impl Serialize for FreeOverFree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let labels = self
            .labels
            .iter()
            .map(|((dim, cell), value)| LabelEntry {
                dim: *dim,
                cell: cell.clone(),
                value: value.clone(),
            })
            .collect();
        FreeOverFreeJson {
            tree: self.tree.clone(),
            carrier: self.carrier.clone(),
            labels,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FreeOverFree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FreeOverFreeJson::deserialize(d)?;
        let labels = raw
            .labels
            .into_iter()
            .map(|e| ((e.dim, e.cell), e.value))
            .collect();
        FreeOverFree::new(raw.tree, raw.carrier, labels).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CompEntry {
    lhs: CellId,
    rhs: CellId,
    out: CellId,
}

#[derive(Serialize, Deserialize)]
struct TablesJson {
    carrier: GlobSet,
    identities: BTreeMap<String, BTreeMap<CellId, CellId>>,
    comps: BTreeMap<String, Vec<CompEntry>>,
}

impl Serialize for CompositionTables {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let identities = self
            .identities
            .iter()
            .enumerate()
            .map(|(d, m)| (d.to_string(), m.clone()))
            .collect();
        let comps = self
            .comps
            .iter()
            .map(|((d, k), t)| {
                (
                    format!("{d},{k}"),
                    t.iter()
                        .map(|((a, b), c)| CompEntry {
                            lhs: a.clone(),
                            rhs: b.clone(),
                            out: c.clone(),
                        })
                        .collect(),
                )
            })
            .collect();
        TablesJson { carrier: self.carrier.clone(), identities, comps }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CompositionTables {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TablesJson::deserialize(d)?;
        let mut identities = vec![BTreeMap::new(); raw.carrier.trunc()];
        for (k, v) in raw.identities {
            let dd: usize = k.parse().map_err(|_| D::Error::custom("bad identity dimension"))?;
            if dd >= identities.len() {
                return Err(D::Error::custom("identity dimension out of range"));
            }
            identities[dd] = v;
        }
        let mut comps = BTreeMap::new();
        for (k, entries) in raw.comps {
            let (ds, ks) = k.split_once(',').ok_or_else(|| D::Error::custom("bad comp key"))?;
            let dk = (
                ds.parse().map_err(|_| D::Error::custom("bad comp key"))?,
                ks.parse().map_err(|_| D::Error::custom("bad comp key"))?,
            );
            let table = entries.into_iter().map(|e| ((e.lhs, e.rhs), e.out)).collect();
            comps.insert(dk, table);
        }
        CompositionTables::new(raw.carrier, identities, comps).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glob::GlobSetBuilder;

    fn loop_graph() -> GlobSet {
        GlobSetBuilder::new(1).cell0("v").cell(1, "l", "v", "v").finish().unwrap()
    }

    /// 0-cells a, b; 1-cells f, g : a -> b; 2-cell m : f => g.
    fn two_arrow() -> GlobSet {
        GlobSetBuilder::new(2)
            .cell0("a")
            .cell0("b")
            .cell(1, "f", "a", "b")
            .cell(1, "g", "a", "b")
            .cell(2, "m", "f", "g")
            .finish()
            .unwrap()
    }

    fn path_cell(k: usize) -> FreeCell {
        let x = loop_graph();
        let p = Tree::line(k);
        let g = p.glob();
        let mut maps = vec![BTreeMap::new(); 2];
        for i in 0..=k {
            maps[0].insert(i.to_string(), "v".to_string());
        }
        for i in 1..=k {
            maps[1].insert(format!("h{i}/0"), "l".to_string());
        }
        FreeCell::new(p, GlobMap::new(g, x, maps).unwrap()).unwrap()
    }

    #[test]
    fn unit_examples() {
        let x = two_arrow();
        let u = unit(&x, 0, "a").unwrap();
        assert_eq!(u.tree(), &Tree::leaf());
        assert_eq!(u.point_value().unwrap(), "a");
        // naturality with boundaries
        let um = unit(&x, 2, "m").unwrap();
        assert_eq!(um.src().unwrap(), unit(&x, 1, "f").unwrap());
        assert_eq!(um.tgt().unwrap(), unit(&x, 1, "g").unwrap());
    }

    #[test]
    fn unit_is_injective() {
        let x = two_arrow();
        let mut seen = std::collections::BTreeSet::new();
        for d in 0..=2 {
            for id in x.cells(d) {
                assert!(seen.insert(unit(&x, d, id).unwrap().canonical_id()));
            }
        }
    }

    #[test]
    fn free_cells_on_point_count_trees() {
        let p = GlobSet::point_at(2);
        for d in 0..=2usize {
            let cells = free_cells(&p, d, 4).unwrap();
            // only trees whose realization has no positive-dimension cells
            // admit a labelling into the point
            let expected = crate::tree::enumerate_trees(d, 4)
                .into_iter()
                .filter(|t| {
                    let g = t.glob();
                    (1..=g.trunc()).all(|e| g.cells(e).is_empty())
                })
                .count();
            assert_eq!(cells.len(), expected);
        }
    }

    #[test]
    fn free_cells_on_loop_are_paths() {
        let x = loop_graph();
        let cells = free_cells(&x, 1, 4).unwrap();
        assert_eq!(cells.len(), 4);
    }

    #[test]
    fn free_cell_count_matches_unpruned_oracle() {
        // independent labelling enumerator: all dimensionwise functions,
        // filtered by commutation with boundaries afterwards
        let x = two_arrow();
        let oracle = |p: &Tree| -> usize {
            let g = p.glob();
            let mut total = 0usize;
            let choices: Vec<Vec<(usize, CellId, CellId)>> = (0..=g.trunc())
                .flat_map(|d| {
                    let x = &x;
                    g.cells(d).iter().map(move |id| {
                        x.cells(d)
                            .iter()
                            .map(|img| (d, id.clone(), img.clone()))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            let mut stack: Vec<(usize, BTreeMap<(usize, CellId), CellId>)> =
                vec![(0, BTreeMap::new())];
            while let Some((pos, asg)) = stack.pop() {
                if pos == choices.len() {
                    let ok = (1..=g.trunc()).all(|d| {
                        g.cells(d).iter().all(|id| {
                            let img = &asg[&(d, id.clone())];
                            let s = g.src(d, id).unwrap();
                            let t = g.tgt(d, id).unwrap();
                            x.src(d, img).unwrap() == &asg[&(d - 1, s.clone())]
                                && x.tgt(d, img).unwrap() == &asg[&(d - 1, t.clone())]
                        })
                    });
                    if ok {
                        total += 1;
                    }
                    continue;
                }
                for (d, id, img) in &choices[pos] {
                    let mut next = asg.clone();
                    next.insert((*d, id.clone()), img.clone());
                    stack.push((pos + 1, next));
                }
            }
            total
        };
        for p in crate::tree::enumerate_trees(2, 3) {
            let direct = crate::glob::maps_between(&p.glob(), &x).len();
            assert_eq!(direct, oracle(&p), "tree {p}");
        }
        let total: usize = crate::tree::enumerate_trees(2, 3)
            .iter()
            .map(|p| crate::glob::maps_between(&p.glob(), &x).len())
            .sum();
        assert_eq!(free_cells(&x, 2, 3).unwrap().len(), total);
    }

    #[test]
    fn src_of_path_is_start() {
        let c = path_cell(2);
        let s = c.src().unwrap();
        assert_eq!(s.point_value().unwrap(), "v");
    }

    #[test]
    fn mu_concatenates_paths() {
        // tree = line 2 labelled by paths of lengths 2 and 1
        let x = loop_graph();
        let p = Tree::line(2);
        let mut labels = BTreeMap::new();
        for i in 0..=2usize {
            labels.insert((0, i.to_string()), unit(&x, 0, "v").unwrap());
        }
        labels.insert((1, "h1/0".to_string()), path_cell(2));
        labels.insert((1, "h2/0".to_string()), path_cell(1));
        let f = FreeOverFree::new(p, x, labels).unwrap();
        let m = mu(&f).unwrap();
        assert_eq!(m.cell, path_cell(3));
        // witness reproduces the input
        let back = m.witness.postcompose(m.cell.label()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn mu_unit_laws_small() {
        let x = two_arrow();
        for d in 0..=2usize {
            for c in free_cells(&x, d, 3).unwrap() {
                let outer = mu(&unit_over_free(&c).unwrap()).unwrap();
                assert_eq!(outer.cell, c, "outer unit at {}", c.canonical_id());
                let inner = mu(&eta_relabel(&c).unwrap()).unwrap();
                assert_eq!(inner.cell, c, "inner unit at {}", c.canonical_id());
            }
        }
    }

    #[test]
    fn mu_factorization_identity() {
        // f = T(h_f) ∘ g_f on every small two-level labelling
        let x = two_arrow();
        for d in 0..=2usize {
            for p in crate::tree::enumerate_trees(d, 3) {
                for f in enumerate_over_free(&x, &p, 2).unwrap() {
                    let m = mu(&f).unwrap();
                    let back = m.witness.postcompose(m.cell.label()).unwrap();
                    assert_eq!(back, f, "tree {p}");
                    // the witness multiplies to an identity labelling
                    let wm = mu(&m.witness).unwrap();
                    assert_eq!(wm.cell.tree(), m.cell.tree());
                    assert!(wm.cell.label().is_identity());
                }
            }
        }
    }

    #[test]
    fn mu_witness_is_unique() {
        let x = loop_graph();
        let p = Tree::line(2);
        for f in enumerate_over_free(&x, &p, 3).unwrap() {
            let m = mu(&f).unwrap();
            let gq = m.cell.tree().glob();
            let mut count = 0;
            for g in enumerate_over_free(&gq, &p, 4).unwrap() {
                let gm = mu(&g).unwrap();
                if gm.cell.tree() == m.cell.tree()
                    && gm.cell.label().is_identity()
                    && g.postcompose(m.cell.label()).unwrap() == f
                {
                    count += 1;
                    assert_eq!(g, m.witness);
                }
            }
            assert_eq!(count, 1);
        }
    }

    #[test]
    fn mu_boundary_naturality() {
        // restricting along σ/τ before or after multiplying agrees
        let x = two_arrow();
        for p in crate::tree::enumerate_trees(2, 4) {
            for f in enumerate_over_free(&x, &p, 2).unwrap() {
                let m = mu(&f).unwrap();
                let ms = mu(&f.src().unwrap()).unwrap();
                assert_eq!(ms.cell, m.cell.src().unwrap(), "tree {p}");
                let mt = mu(&f.tgt().unwrap()).unwrap();
                assert_eq!(mt.cell, m.cell.tgt().unwrap(), "tree {p}");
            }
        }
    }

    #[test]
    fn mu_carrier_naturality() {
        // for h : X -> Y, multiplying the relabelled value postcomposes h
        let x = loop_graph();
        let y2 = GlobSetBuilder::new(1)
            .cell0("w")
            .cell(1, "m", "w", "w")
            .cell(1, "e", "w", "w")
            .finish()
            .unwrap();
        for h in crate::glob::maps_between(&x, &y2) {
            for p in crate::tree::enumerate_trees(1, 3) {
                for f in enumerate_over_free(&x, &p, 2).unwrap() {
                    let lhs = mu(&f.postcompose(&h).unwrap()).unwrap();
                    let rhs = mu(&f).unwrap();
                    assert_eq!(lhs.cell, rhs.cell.postcompose(&h).unwrap());
                    assert_eq!(lhs.witness, rhs.witness);
                }
            }
        }
    }

    #[test]
    fn mu_associativity_small() {
        let x = loop_graph();
        let fg = free_globset(&x, 3).unwrap();
        for p in crate::tree::enumerate_trees(1, 3) {
            for f2 in enumerate_over_free(&fg.set, &p, 2).unwrap() {
                // route A: multiply inside, then multiply
                let mut labels = BTreeMap::new();
                for (k, v) in f2.labels() {
                    labels.insert(k.clone(), mu(&fg.decode_over(v).unwrap()).unwrap().cell);
                }
                let fa = FreeOverFree::new(p.clone(), x.clone(), labels).unwrap();
                let route_a = mu(&fa).unwrap().cell;
                // route B: multiply outside, decode, multiply
                let outer = mu(&f2).unwrap().cell;
                let route_b = mu(&fg.decode_over(&outer).unwrap()).unwrap().cell;
                assert_eq!(route_a, route_b, "tree {p}");
            }
        }
    }

    #[test]
    fn hom_decompose_pairs_for_sequences() {
        // cells of the free category on (X1, X2) between the endpoints are
        // pairs of free cells
        let x1 = loop_graph();
        let x2 = loop_graph();
        let s = crate::glob::seq(&[x1.clone(), x2.clone()]).unwrap();
        let mut pairs = 0;
        for c in free_cells(&s, 2, 4).unwrap() {
            let (ys, comps) = c.hom_decompose().unwrap();
            if ys.first().map(String::as_str) == Some("0")
                && ys.last().map(String::as_str) == Some("2")
            {
                assert_eq!(comps.len(), 2);
                pairs += 1;
                // reconstruction is exact
                let back = hom_reconstruct(&s, &ys, &comps, c.dim()).unwrap();
                assert_eq!(back, c);
            }
        }
        // pairs of 1-dim free cells over the two homs whose combined tree
        // fits the bound
        let h1 = s.hom("0", "1").unwrap();
        let h2 = s.hom("1", "2").unwrap();
        let mut expected = 0;
        for a in free_cells(&h1, 1, 3).unwrap() {
            for b in free_cells(&h2, 1, 3).unwrap() {
                if a.tree().size() + b.tree().size() + 1 <= 4 {
                    expected += 1;
                }
            }
        }
        assert_eq!(pairs, expected);
    }

    #[test]
    fn hom_cells_walk_forward_only() {
        let x1 = loop_graph();
        let s = crate::glob::seq(&[x1.clone(), x1]).unwrap();
        for c in free_cells(&s, 1, 4).unwrap() {
            let (ys, _) = c.hom_decompose().unwrap();
            let nums: Vec<usize> = ys.iter().map(|y| y.parse().unwrap()).collect();
            assert!(nums.windows(2).all(|w| w[1] == w[0] + 1));
        }
    }

    #[test]
    fn decompose_reconstruct_roundtrip() {
        let x = two_arrow();
        for d in 1..=2usize {
            for c in free_cells(&x, d, 4).unwrap() {
                let (ys, comps) = c.hom_decompose().unwrap();
                let back = hom_reconstruct(&x, &ys, &comps, d).unwrap();
                assert_eq!(back, c);
            }
        }
    }

    #[test]
    fn generic_factorization_examples() {
        let x = loop_graph();
        let c = path_cell(2);
        let f = generic_factor(&c).unwrap();
        assert_eq!(f.tree, *c.tree());
        assert!(f.generic.label().is_identity());
        // recomposing returns the cell
        assert_eq!(f.generic.postcompose(&f.free_part).unwrap(), c);
        // units factor through globes
        let u = unit(&x, 1, "l").unwrap();
        assert_eq!(generic_factor(&u).unwrap().tree, globe_tree(1));
    }

    fn loop_monoid_tables() -> CompositionTables {
        // one object, 1-cells {e, l} with l·l = e (cyclic of order 2)
        let x = GlobSetBuilder::new(1)
            .cell0("v")
            .cell(1, "e", "v", "v")
            .cell(1, "l", "v", "v")
            .finish()
            .unwrap();
        let identities = vec![[("v".to_string(), "e".to_string())].into_iter().collect()];
        let mut table = BTreeMap::new();
        for (a, b, c) in
            [("e", "e", "e"), ("e", "l", "l"), ("l", "e", "l"), ("l", "l", "e")]
        {
            table.insert((a.to_string(), b.to_string()), c.to_string());
        }
        CompositionTables::new(x, identities, [((1, 0), table)].into_iter().collect()).unwrap()
    }

    #[test]
    fn tables_laws_hold_for_the_loop_monoid() {
        assert!(loop_monoid_tables().check_laws().is_empty());
    }

    #[test]
    fn eval_pasting_folds_a_monoid() {
        let t = loop_monoid_tables();
        let x = t.carrier().clone();
        // a path of three l's evaluates to l·l·l = l
        let p = Tree::line(3);
        let g = p.glob();
        let mut maps = vec![BTreeMap::new(); 2];
        for i in 0..=3usize {
            maps[0].insert(i.to_string(), "v".to_string());
        }
        for i in 1..=3usize {
            maps[1].insert(format!("h{i}/0"), "l".to_string());
        }
        let c = FreeCell::new(p, GlobMap::new(g, x.clone(), maps).unwrap()).unwrap();
        assert_eq!(t.eval(&c).unwrap(), CellRef::new(1, "l"));
        // the empty path evaluates to the identity
        let e = FreeCell::new(
            Tree::line(0),
            GlobMap::new(
                Tree::line(0).glob(),
                x.clone(),
                vec![
                    [("0".to_string(), "v".to_string())].into_iter().collect(),
                    BTreeMap::new(),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        assert_eq!(t.eval(&e).unwrap(), CellRef::new(1, "e"));
        // units evaluate to their cell
        assert_eq!(t.eval(&unit(&x, 1, "l").unwrap()).unwrap(), CellRef::new(1, "l"));
    }

    #[test]
    fn algebra_laws_for_the_loop_monoid() {
        let t = loop_monoid_tables();
        assert!(check_algebra(&t, 3).unwrap().is_empty());
    }

    #[test]
    fn tables_from_oracle_roundtrip() {
        let t = loop_monoid_tables();
        let back = tables_from_oracle(&t).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn broken_tables_fail_laws() {
        let x = GlobSetBuilder::new(1)
            .cell0("v")
            .cell(1, "e", "v", "v")
            .cell(1, "l", "v", "v")
            .finish()
            .unwrap();
        let identities = vec![[("v".to_string(), "e".to_string())].into_iter().collect()];
        let mut table = BTreeMap::new();
        for (a, b, c) in
            [("e", "e", "e"), ("e", "l", "l"), ("l", "e", "e"), ("l", "l", "e")]
        {
            table.insert((a.to_string(), b.to_string()), c.to_string());
        }
        let t = CompositionTables::new(x, identities, [((1, 0), table)].into_iter().collect())
            .unwrap();
        assert!(!t.check_laws().is_empty());
    }

    #[test]
    fn freecell_json_roundtrip() {
        let c = path_cell(2);
        let s = serde_json::to_string(&c).unwrap();
        let back: FreeCell = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn tables_json_roundtrip() {
        let t = loop_monoid_tables();
        let s = serde_json::to_string(&t).unwrap();
        let back: CompositionTables = serde_json::from_str(&s).unwrap();
        assert_eq!(t, back);
        assert_eq!(s, serde_json::to_string(&back).unwrap());
    }
}
