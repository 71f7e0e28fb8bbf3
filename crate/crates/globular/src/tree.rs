//! Pasting trees: the arities of free-category cells.
//!
//! A tree of dimension 0 is a leaf; a tree of dimension n+1 is a finite
//! sequence of trees of dimension n. Its globular realization is built with
//! the sequence construction, so the dimension-1 tree `k` realizes to the
//! path with k edges and the globe trees realize to globes.
//!
//! Trees of dimension 1 print as naturals, dimension 2 as bracketed lists
//! (`[2,1]`); higher dimensions nest brackets.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::glob::{self, CellId, GlobMap, GlobSet};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tree {
    dim: usize,
    kids: Vec<Tree>,
}

impl Tree {
    /// The unique tree of dimension 0.
    pub fn leaf() -> Self {
        Tree { dim: 0, kids: Vec::new() }
    }

    pub fn node(dim: usize, kids: Vec<Tree>) -> Result<Self> {
        if dim == 0 {
            if !kids.is_empty() {
                return Err(Error::invalid("a dimension-0 tree has no kids"));
            }
            return Ok(Tree::leaf());
        }
        for k in &kids {
            if k.dim + 1 != dim {
                return Err(Error::invalid(format!(
                    "kid of dimension {} under a dimension-{} tree",
                    k.dim, dim
                )));
            }
        }
        Ok(Tree { dim, kids })
    }

    /// The dimension-1 tree with k leaf kids (the path with k edges).
    pub fn line(k: usize) -> Self {
        Tree { dim: 1, kids: vec![Tree::leaf(); k] }
    }

    /// A dimension-2 tree from the list of its line kids, e.g. `[2,1]`.
    pub fn from_lines(ks: &[usize]) -> Self {
        Tree { dim: 2, kids: ks.iter().map(|&k| Tree::line(k)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kids(&self) -> &[Tree] {
        &self.kids
    }

    /// Node count: 1 plus the sizes of the kids.
    pub fn size(&self) -> usize {
        1 + self.kids.iter().map(Tree::size).sum::<usize>()
    }

    /// `∂`: replace every dimension-1 subtree by a leaf. Defined for
    /// dimension at least 1.
    pub fn boundary(&self) -> Result<Tree> {
        match self.dim {
            0 => Err(Error::invalid("boundary needs dimension >= 1")),
            1 => Ok(Tree::leaf()),
            _ => Ok(Tree {
                dim: self.dim - 1,
                kids: self.kids.iter().map(|k| k.boundary()).collect::<Result<_>>()?,
            }),
        }
    }

    /// Globular realization, truncated at the tree dimension.
    pub fn glob(&self) -> GlobSet {
        if self.dim == 0 {
            return GlobSet::point();
        }
        let parts: Vec<GlobSet> = self.kids.iter().map(Tree::glob).collect();
        glob::seq_at(&parts, self.dim).expect("kid realizations share a truncation")
    }
}

impl Ord for Tree {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.size()
            .cmp(&other.size())
            .then_with(|| self.kids.cmp(&other.kids))
    }
}

impl PartialOrd for Tree {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.dim {
            0 => write!(f, "*"),
            1 => write!(f, "{}", self.kids.len()),
            _ => {
                write!(f, "[")?;
                for (i, k) in self.kids.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// The globe tree: globe(0) is the leaf, globe(n+1) has the single kid
/// globe(n). Its realization is the n-globe.
pub fn globe_tree(n: usize) -> Tree {
    let mut t = Tree::leaf();
    for d in 1..=n {
        t = Tree { dim: d, kids: vec![t] };
    }
    t
}

/// σ : glob(∂p) -> glob(p). Identity on 0-cells; on homs recursively σ; the
/// base case picks the 0-cell `0` of the path.
pub fn sigma_map(p: &Tree) -> Result<GlobMap> {
    boundary_map(p, true)
}

/// τ : glob(∂p) -> glob(p); the base case picks the maximum 0-cell.
pub fn tau_map(p: &Tree) -> Result<GlobMap> {
    boundary_map(p, false)
}

fn boundary_map(p: &Tree, is_sigma: bool) -> Result<GlobMap> {
    if p.dim == 0 {
        return Err(Error::invalid("σ/τ need dimension >= 1"));
    }
    let dom = p.boundary()?.glob();
    let cod = p.glob();
    let mut maps: Vec<BTreeMap<CellId, CellId>> = vec![BTreeMap::new(); dom.trunc() + 1];
    fill_boundary_maps(p, is_sigma, "", &mut maps, 0);
    GlobMap::new(dom, cod, maps)
}

fn fill_boundary_maps(
    p: &Tree,
    is_sigma: bool,
    prefix: &str,
    maps: &mut [BTreeMap<CellId, CellId>],
    depth: usize,
) {
    if p.dim == 1 {
        // glob(∂p) is the point `0`; pick an endpoint of the path
        let img = if is_sigma { 0 } else { p.kids.len() };
        maps[depth].insert(format!("{prefix}0"), format!("{prefix}{img}"));
        return;
    }
    for i in 0..=p.kids.len() {
        maps[depth].insert(format!("{prefix}{i}"), format!("{prefix}{i}"));
    }
    for (idx, kid) in p.kids.iter().enumerate() {
        let tag = format!("{prefix}h{}/", idx + 1);
        fill_boundary_maps(kid, is_sigma, &tag, maps, depth + 1);
    }
}

/// All trees of exactly the given dimension with size at most `max_size`,
/// in canonical order (size first, then lexicographic on kid lists).
pub fn enumerate_trees(dim: usize, max_size: usize) -> Vec<Tree> {
    let mut out = enumerate_unsorted(dim, max_size);
    out.sort();
    out
}

fn enumerate_unsorted(dim: usize, max_size: usize) -> Vec<Tree> {
    if max_size == 0 {
        return Vec::new();
    }
    if dim == 0 {
        return vec![Tree::leaf()];
    }
    let kids_budget = max_size - 1;
    let parts = enumerate_unsorted(dim - 1, kids_budget);
    let mut out = Vec::new();
    let mut stack: Vec<(Vec<Tree>, usize)> = vec![(Vec::new(), 0)];
    while let Some((kids, used)) = stack.pop() {
        out.push(Tree { dim, kids: kids.clone() });
        for p in &parts {
            if used + p.size() <= kids_budget {
                let mut next = kids.clone();
                next.push(p.clone());
                stack.push((next, used + p.size()));
            }
        }
    }
    out
}

/// Substitute trees into a tree: the assignment sends each d-cell of
/// glob(p) to a dimension-d tree, compatibly along the homs, and the result
/// is the flattened composite arity. This is the multiplication of the
/// free-category monad restricted to arities.
pub fn substitute(p: &Tree, asg: &BTreeMap<(usize, CellId), Tree>) -> Result<Tree> {
    if p.dim == 0 {
        let t = asg
            .get(&(0, "0".to_string()))
            .ok_or_else(|| Error::incompatible("no tree assigned to the point"))?;
        if t.dim != 0 {
            return Err(Error::incompatible("0-cell assigned a positive-dimension tree"));
        }
        return Ok(Tree::leaf());
    }
    let mut flat: Vec<Tree> = Vec::new();
    for (idx, kid) in p.kids.iter().enumerate() {
        let tag = format!("h{}/", idx + 1);
        let g = kid.glob();
        // trees assigned to the cells of hom i, keyed by the kid's own cells
        let mut local: BTreeMap<(usize, CellId), Tree> = BTreeMap::new();
        let mut arity: Option<usize> = None;
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                let outer = format!("{tag}{id}");
                let t = asg
                    .get(&(d + 1, outer.clone()))
                    .ok_or_else(|| Error::incompatible(format!("no tree assigned to `{outer}`")))?;
                if t.dim != d + 1 {
                    return Err(Error::incompatible(format!("tree at `{outer}` has wrong dimension")));
                }
                match arity {
                    None => arity = Some(t.kids.len()),
                    Some(m) if m != t.kids.len() => {
                        return Err(Error::incompatible(
                            "assignment is not globular: kid counts disagree along a hom",
                        ))
                    }
                    _ => {}
                }
                local.insert((d, id.clone()), t.clone());
            }
        }
        let m = arity.expect("realizations are non-empty");
        for j in 0..m {
            let sub: BTreeMap<(usize, CellId), Tree> = local
                .iter()
                .map(|((d, id), t)| ((*d, id.clone()), t.kids[j].clone()))
                .collect();
            flat.push(substitute(kid, &sub)?);
        }
    }
    Tree::node(p.dim, flat)
}

/// Report from the exhaustive isomorphism search between two realizations.
#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub left: String,
    pub right: String,
    pub iso_count: usize,
    pub all_identities: bool,
    /// The rigidity prediction: an iso exists only between equal trees and
    /// is then the identity.
    pub tight: bool,
}

/// Enumerate all globular isomorphisms glob(p) ≅ glob(q) and check the
/// prediction that any such iso forces p = q and the identity map.
pub fn rigidity_check(p: &Tree, q: &Tree) -> RigidityReport {
    let isos = glob::isos_between(&p.glob(), &q.glob());
    let all_identities = isos.iter().all(|m| m.is_identity());
    let tight = if isos.is_empty() {
        p != q
    } else {
        p == q && isos.len() == 1 && all_identities
    };
    RigidityReport {
        left: p.to_string(),
        right: q.to_string(),
        iso_count: isos.len(),
        all_identities,
        tight,
    }
}

// ---------------------------------------------------------------------------
// JSON form: {"dim": n, "kids": [...]} with kids absent at dimension 0.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TreeJson {
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kids: Option<Vec<TreeJson>>,
}

fn to_json(t: &Tree) -> TreeJson {
    TreeJson {
        dim: t.dim,
        kids: if t.dim == 0 { None } else { Some(t.kids.iter().map(to_json).collect()) },
    }
}

fn from_json(j: &TreeJson) -> Result<Tree> {
    if j.dim == 0 && j.kids.is_some() {
        return Err(Error::invalid("dimension-0 tree must omit kids"));
    }
    let kids = match &j.kids {
        None => Vec::new(),
        Some(ks) => ks.iter().map(from_json).collect::<Result<_>>()?,
    };
    Tree::node(j.dim, kids)
}

impl Serialize for Tree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_json(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TreeJson::deserialize(d)?;
        from_json(&raw).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn globe_cell_counts() {
        for n in 0..=4 {
            let g = globe_tree(n).glob();
            for k in 0..n {
                assert_eq!(g.cells(k).len(), 2, "globe {n} at dim {k}");
            }
            assert_eq!(g.cells(n).len(), 1);
        }
    }

    #[test]
    fn line_realizes_to_path() {
        let g = Tree::line(3).glob();
        assert_eq!(g.cells(0).len(), 4);
        assert_eq!(g.cells(1).len(), 3);
    }

    #[test]
    fn glob_counts_of_two_one() {
        // independent recursive count oracle for sequence realizations
        fn counts(t: &Tree) -> Vec<usize> {
            if t.dim() == 0 {
                return vec![1];
            }
            let mut out = vec![t.kids().len() + 1];
            for d in 0..t.dim() {
                out.push(t.kids().iter().map(|k| counts(k)[d]).sum());
            }
            out
        }
        let t = Tree::from_lines(&[2, 1]);
        assert_eq!(counts(&t), vec![3, 5, 3]);
        let g = t.glob();
        assert_eq!((g.cells(0).len(), g.cells(1).len(), g.cells(2).len()), (3, 5, 3));
    }

    #[test]
    fn boundary_of_lines_and_globes() {
        for k in 0..5 {
            assert_eq!(Tree::line(k).boundary().unwrap(), Tree::leaf());
        }
        assert_eq!(Tree::from_lines(&[2, 1]).boundary().unwrap(), Tree::line(2));
        for n in 0..4 {
            assert_eq!(globe_tree(n + 1).boundary().unwrap(), globe_tree(n));
        }
        assert!(Tree::leaf().boundary().is_err());
    }

    #[test]
    fn sigma_tau_on_lines() {
        let p = Tree::line(3);
        let s = sigma_map(&p).unwrap();
        let t = tau_map(&p).unwrap();
        assert_eq!(s.apply(0, "0").unwrap(), "0");
        assert_eq!(t.apply(0, "0").unwrap(), "3");
    }

    #[test]
    fn sigma_tau_on_globe_two() {
        let p = globe_tree(2);
        let s = sigma_map(&p).unwrap();
        let t = tau_map(&p).unwrap();
        // the two parallel 1-cells of the 2-globe
        assert_eq!(s.apply(1, "h1/0").unwrap(), "h1/0");
        assert_eq!(t.apply(1, "h1/0").unwrap(), "h1/1");
    }

    #[test]
    fn globular_identities_for_small_trees() {
        // σσ = τσ and ττ = στ for every tree of dim <= 3, size <= 6
        for dim in 2..=3usize {
            for p in enumerate_trees(dim, 6) {
                let bp = p.boundary().unwrap();
                let s1 = sigma_map(&bp).unwrap().then(&sigma_map(&p).unwrap()).unwrap();
                let s2 = sigma_map(&bp).unwrap().then(&tau_map(&p).unwrap()).unwrap();
                let t1 = tau_map(&bp).unwrap().then(&tau_map(&p).unwrap()).unwrap();
                let t2 = tau_map(&bp).unwrap().then(&sigma_map(&p).unwrap()).unwrap();
                assert_eq!(s1, s2, "σσ=τσ at {p}");
                assert_eq!(t1, t2, "ττ=στ at {p}");
            }
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_trees(0, 9).len(), 1);
        let d1 = enumerate_trees(1, 4);
        assert_eq!(d1, vec![Tree::line(0), Tree::line(1), Tree::line(2), Tree::line(3)]);
        // composition-counting oracle: dim-2 trees of size <= s correspond
        // to compositions of m <= s-1 into positive parts
        let oracle = |s: usize| -> usize {
            (0..s).map(|m| if m == 0 { 1 } else { 1 << (m - 1) }).sum()
        };
        for s in 1..=6 {
            assert_eq!(enumerate_trees(2, s).len(), oracle(s), "size {s}");
        }
    }

    #[test]
    fn enumeration_is_closed_under_boundary() {
        for dim in 1..=3usize {
            let all = enumerate_trees(dim, 6);
            let lower = enumerate_trees(dim - 1, 6);
            for p in &all {
                let b = p.boundary().unwrap();
                assert!(lower.contains(&b), "∂{p} missing");
            }
        }
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        for dim in 0..=3usize {
            let all = enumerate_trees(dim, 5);
            let set: std::collections::BTreeSet<_> = all.iter().collect();
            assert_eq!(set.len(), all.len());
        }
    }

    #[test]
    fn rigidity_of_small_trees() {
        let g2 = globe_tree(2);
        let r = rigidity_check(&g2, &g2);
        assert_eq!(r.iso_count, 1);
        assert!(r.all_identities && r.tight);
        let r = rigidity_check(&Tree::line(2), &Tree::line(3));
        assert_eq!(r.iso_count, 0);
        assert!(r.tight);
        let t = Tree::from_lines(&[2, 1]);
        let r = rigidity_check(&t, &t);
        assert_eq!(r.iso_count, 1);
        assert!(r.all_identities);
    }

    #[test]
    fn zero_cell_maps_between_realizations_are_order_preserving() {
        for p in enumerate_trees(2, 4) {
            for q in enumerate_trees(2, 4) {
                for m in glob::maps_between(&p.glob(), &q.glob()) {
                    let imgs: Vec<usize> = (0..=p.kids().len())
                        .map(|i| m.apply(0, &i.to_string()).unwrap().parse().unwrap())
                        .collect();
                    assert!(imgs.windows(2).all(|w| w[0] <= w[1]), "{p} -> {q}");
                }
            }
        }
    }

    #[test]
    fn substitute_concatenates_paths() {
        // p = line 2, assign lines 2 and 3 to its edges: result line 5
        let p = Tree::line(2);
        let mut asg = BTreeMap::new();
        for i in 0..=2usize {
            asg.insert((0, i.to_string()), Tree::leaf());
        }
        asg.insert((1, "h1/0".to_string()), Tree::line(2));
        asg.insert((1, "h2/0".to_string()), Tree::line(3));
        assert_eq!(substitute(&p, &asg).unwrap(), Tree::line(5));
    }

    #[test]
    fn substitute_globes_is_identity() {
        // assigning globes of the right dimension reproduces the tree
        let p = Tree::from_lines(&[2, 1]);
        let g = p.glob();
        let mut asg = BTreeMap::new();
        for d in 0..=g.trunc() {
            for id in g.cells(d) {
                asg.insert((d, id.clone()), globe_tree(d));
            }
        }
        assert_eq!(substitute(&p, &asg).unwrap(), p);
    }

    #[test]
    fn tree_json_roundtrip() {
        for t in [Tree::leaf(), Tree::line(3), Tree::from_lines(&[2, 0, 1]), globe_tree(3)] {
            let s = serde_json::to_string(&t).unwrap();
            let back: Tree = serde_json::from_str(&s).unwrap();
            assert_eq!(t, back);
            assert_eq!(s, serde_json::to_string(&back).unwrap());
        }
        assert_eq!(serde_json::to_string(&Tree::leaf()).unwrap(), r#"{"dim":0}"#);
    }

    #[test]
    fn display_compact_forms() {
        assert_eq!(Tree::line(3).to_string(), "3");
        assert_eq!(Tree::from_lines(&[2, 1]).to_string(), "[2,1]");
        assert_eq!(globe_tree(3).to_string(), "[[1]]");
    }
}
