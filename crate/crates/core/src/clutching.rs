//! Combinatorics of boundary strata: clutching trees with genus labels, dual
//! graphs of stable curves, p-rank labelings and stratum dimensions.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ff::{enumerate_monic, GaloisField};
use crate::hyperelliptic::HyperellipticCurve;
use crate::prank::p_rank;

/// Finite tree with a genus label g_v ≥ 1 on each vertex and
/// deg(v) ≤ 2g_v + 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClutchingTree {
    genera: Vec<u32>,
    edges: Vec<(usize, usize)>,
}

/// Per-vertex p-ranks f_v with 0 ≤ f_v ≤ g_v.
pub type PRankLabeling = Vec<u32>;

impl ClutchingTree {
    pub fn new(genera: Vec<u32>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = genera.len();
        if n == 0 {
            return Err(Error::InvalidInput("a tree needs at least one vertex".into()));
        }
        if let Some(v) = genera.iter().position(|&g| g == 0) {
            return Err(Error::InvalidInput(format!("vertex {v} has genus 0")));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "{} edges on {n} vertices cannot form a tree",
                edges.len()
            )));
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
            }
            if !uf.union(a, b) {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) closes a cycle")));
            }
        }
        let t = ClutchingTree { genera, edges };
        for v in 0..n {
            if t.degree(v) > 2 * t.genera[v] as usize + 2 {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} has degree {} > 2·{} + 2",
                    t.degree(v),
                    t.genera[v]
                )));
            }
        }
        Ok(t)
    }

    pub fn single(g: u32) -> Result<Self> {
        Self::new(vec![g], vec![])
    }

    pub fn path(genera: &[u32]) -> Result<Self> {
        let edges = (1..genera.len()).map(|i| (i - 1, i)).collect();
        Self::new(genera.to_vec(), edges)
    }

    /// Center vertex 0 joined to each leaf.
    pub fn star(center: u32, leaves: &[u32]) -> Result<Self> {
        let mut genera = vec![center];
        genera.extend_from_slice(leaves);
        let edges = (1..genera.len()).map(|i| (0, i)).collect();
        Self::new(genera, edges)
    }

    /// Parses `single:G`, `path:g1,g2,…`, `star:C:l1,l2,…` or
    /// `tree:g1,g2,…;a-b,c-d,…` (0-based vertex ids).
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse tree {text:?}"));
        let nums = |s: &str| -> Result<Vec<u32>> {
            s.split(',')
                .filter(|t| !t.trim().is_empty())
                .map(|t| t.trim().parse::<u32>().map_err(|_| bad()))
                .collect()
        };
        let (kind, rest) = text.split_once(':').ok_or_else(bad)?;
        match kind {
            "single" => Self::single(rest.trim().parse().map_err(|_| bad())?),
            "path" => Self::path(&nums(rest)?),
            "star" => {
                let (c, leaves) = rest.split_once(':').ok_or_else(bad)?;
                Self::star(c.trim().parse().map_err(|_| bad())?, &nums(leaves)?)
            }
            "tree" => {
                let (g, e) = rest.split_once(';').unwrap_or((rest, ""));
                let edges = e
                    .split(',')
                    .filter(|t| !t.trim().is_empty())
                    .map(|t| {
                        let (a, b) = t.split_once('-').ok_or_else(bad)?;
                        Ok((
                            a.trim().parse().map_err(|_| bad())?,
                            b.trim().parse().map_err(|_| bad())?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::new(nums(g)?, edges)
            }
            _ => Err(bad()),
        }
    }

    pub fn genera(&self) -> &[u32] {
        &self.genera
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// g(Λ) = Σ g_v.
    pub fn genus(&self) -> u32 {
        self.genera.iter().sum()
    }

    /// |Λ|.
    pub fn size(&self) -> usize {
        self.genera.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == v || b == v).count()
    }

    fn neighbours(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter_map(move |&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Contracts an edge, merging its endpoints into one vertex whose genus is
    /// the sum. The merged vertex takes the smaller index; other vertices keep
    /// their relative order.
    pub fn coalesce(&self, edge: usize) -> Result<Self> {
        let &(a, b) = self
            .edges
            .get(edge)
            .ok_or_else(|| Error::InvalidInput(format!("edge {edge} not in tree")))?;
        let (keep, gone) = (a.min(b), a.max(b));
        let remap = |v: usize| -> usize {
            let v = if v == gone { keep } else { v };
            if v > gone {
                v - 1
            } else {
                v
            }
        };
        let mut genera = self.genera.clone();
        genera[keep] += genera[gone];
        genera.remove(gone);
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != edge)
            .map(|(_, &(x, y))| (remap(x), remap(y)))
            .collect();
        let t = Self::new(genera, edges)?;
        assert!(t.genus() == self.genus() && t.size() + 1 == self.size());
        Ok(t)
    }

    /// Canonical string of the labelled tree up to isomorphism, via rooted
    /// encodings at the centroid(s).
    pub fn canonical_form(&self) -> String {
        let n = self.size();
        let adj: Vec<Vec<usize>> = (0..n).map(|v| self.neighbours(v).collect()).collect();
        // subtree sizes from an arbitrary root to locate centroids
        let mut order = vec![0];
        let mut parent = vec![usize::MAX; n];
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            for &w in &adj[v] {
                if w != parent[v] {
                    parent[w] = v;
                    order.push(w);
                }
            }
            i += 1;
        }
        let mut sub = vec![1usize; n];
        for &v in order.iter().rev() {
            if parent[v] != usize::MAX {
                sub[parent[v]] += sub[v];
            }
        }
        let heaviest = |v: usize| -> usize {
            let up = n - sub[v];
            adj[v]
                .iter()
                .filter(|&&w| w != parent[v])
                .map(|&w| sub[w])
                .max()
                .unwrap_or(0)
                .max(up)
        };
        let best = (0..n).map(heaviest).min().unwrap();
        (0..n)
            .filter(|&v| heaviest(v) == best)
            .map(|root| self.encode(&adj, root, usize::MAX))
            .min()
            .unwrap()
    }

    fn encode(&self, adj: &[Vec<usize>], v: usize, from: usize) -> String {
        let mut kids: Vec<String> = adj[v]
            .iter()
            .filter(|&&w| w != from)
            .map(|&w| self.encode(adj, w, v))
            .collect();
        kids.sort();
        format!("({}{})", self.genera[v], kids.concat())
    }

    pub fn is_isomorphic(&self, other: &ClutchingTree) -> bool {
        self.size() == other.size()
            && self.genus() == other.genus()
            && self.canonical_form() == other.canonical_form()
    }

    /// True iff `other` is obtained from `self` by a (possibly empty)
    /// sequence of edge coalescings.
    pub fn refines(&self, other: &ClutchingTree) -> bool {
        if self.genus() != other.genus() || self.size() < other.size() {
            return false;
        }
        let target = other.canonical_form();
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([self.clone()]);
        seen.insert(self.canonical_form());
        while let Some(t) = queue.pop_front() {
            let form = t.canonical_form();
            if form == target {
                return true;
            }
            if t.size() <= other.size() {
                continue;
            }
            for e in 0..t.edges.len() {
                let next = t.coalesce(e).expect("coalescing a valid tree stays valid");
                if seen.insert(next.canonical_form()) {
                    queue.push_back(next);
                }
            }
        }
        false
    }

    /// All labelings with Σ f_v = f, in decreasing lexicographic order.
    pub fn labelings(&self, f: u32) -> Result<Vec<PRankLabeling>> {
        self.check_f(f)?;
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.size());
        self.label_rec(0, f, &mut cur, &mut out);
        Ok(out)
    }

    fn label_rec(&self, v: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<PRankLabeling>) {
        if v == self.size() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest: u32 = self.genera[v + 1..].iter().sum();
        let hi = self.genera[v].min(left);
        let lo = left.saturating_sub(rest);
        for fv in (lo..=hi).rev() {
            cur.push(fv);
            self.label_rec(v + 1, left - fv, cur, out);
            cur.pop();
        }
    }

    fn check_f(&self, f: u32) -> Result<()> {
        if f > self.genus() {
            return Err(Error::InvalidInput(format!(
                "p-rank {f} exceeds the tree genus {}",
                self.genus()
            )));
        }
        Ok(())
    }

    /// g(Λ) + f − |Λ|.
    pub fn stratum_dim(&self, f: u32) -> Result<i64> {
        self.check_f(f)?;
        Ok(self.genus() as i64 + f as i64 - self.size() as i64)
    }

    pub fn validate_labeling(&self, labeling: &[u32]) -> Result<()> {
        if labeling.len() != self.size() {
            return Err(Error::InvalidInput("labeling length differs from tree size".into()));
        }
        if let Some(v) = (0..self.size()).find(|&v| labeling[v] > self.genera[v]) {
            return Err(Error::InvalidInput(format!(
                "f_{v} = {} exceeds g_{v} = {}",
                labeling[v], self.genera[v]
            )));
        }
        Ok(())
    }

    /// p-rank of a compact-type curve: Σ f_v.
    pub fn prank_compact(&self, labeling: &[u32]) -> Result<u32> {
        self.validate_labeling(labeling)?;
        Ok(labeling.iter().sum())
    }

    pub fn to_record(&self, labeling: Option<&[u32]>) -> TreeRecord {
        TreeRecord {
            vertices: (0..self.size())
                .map(|v| VertexRecord {
                    id: v,
                    g: self.genera[v],
                    f: labeling.map(|l| l[v]),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_record(r: &TreeRecord) -> Result<(Self, Option<PRankLabeling>)> {
        let mut verts = r.vertices.clone();
        verts.sort_by_key(|v| v.id);
        if verts.iter().enumerate().any(|(i, v)| v.id != i) {
            return Err(Error::InvalidInput("vertex ids must be 0..n".into()));
        }
        let t = Self::new(
            verts.iter().map(|v| v.g).collect(),
            r.edges.iter().map(|e| (e[0], e[1])).collect(),
        )?;
        let labeling = if verts.iter().all(|v| v.f.is_some()) {
            let l: Vec<u32> = verts.iter().map(|v| v.f.unwrap()).collect();
            t.validate_labeling(&l)?;
            Some(l)
        } else {
            None
        };
        Ok((t, labeling))
    }
}

impl fmt::Display for ClutchingTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.genera.iter().map(u32::to_string).collect();
        let e: Vec<String> = self.edges.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        write!(f, "tree:{};{}", g.join(","), e.join(","))
    }
}

/// Serialized tree: `{vertices: [{id, g, f?}], edges: [[id, id]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub id: usize,
    pub g: u32,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f: Option<u32>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    /// False if already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// Dual graph of a stable curve: one vertex per component labelled by its
/// genus and p-rank, one edge per node. Loops and multi-edges are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGraph {
    vertices: Vec<(u32, u32)>,
    edges: Vec<(usize, usize)>,
}

impl DualGraph {
    pub fn new(vertices: Vec<(u32, u32)>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = vertices.len();
        if n == 0 {
            return Err(Error::InvalidInput("a dual graph needs a vertex".into()));
        }
        if let Some(v) = vertices.iter().position(|&(g, f)| f > g) {
            return Err(Error::InvalidInput(format!("vertex {v} has f_v > g_v")));
        }
        let mut uf = UnionFind::new(n);
        for &(a, b) in &edges {
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!("edge ({a}, {b}) out of range")));
            }
            uf.union(a, b);
        }
        let root = uf.find(0);
        if (1..n).any(|v| uf.find(v) != root) {
            return Err(Error::InvalidInput("dual graph is disconnected".into()));
        }
        Ok(DualGraph { vertices, edges })
    }

    pub fn vertices(&self) -> &[(u32, u32)] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// b_1 = #edges − #vertices + 1.
    pub fn betti(&self) -> u32 {
        (self.edges.len() + 1 - self.vertices.len()) as u32
    }

    /// Arithmetic genus Σ g_v + b_1.
    pub fn genus(&self) -> u32 {
        self.vertices.iter().map(|v| v.0).sum::<u32>() + self.betti()
    }

    /// Σ f_v + b_1: abelian part plus toric rank.
    pub fn prank_stable(&self) -> u32 {
        self.vertices.iter().map(|v| v.1).sum::<u32>() + self.betti()
    }

    /// Edge indices of a spanning tree (breadth-first from vertex 0).
    pub fn spanning_tree(&self) -> Vec<usize> {
        let mut uf = UnionFind::new(self.vertices.len());
        self.edges
            .iter()
            .enumerate()
            .filter(|&(_, &(a, b))| uf.union(a, b))
            .map(|(i, _)| i)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivisorKind {
    /// Two components meeting in one node.
    Delta,
    /// One component with a self-node (index 0) or two components meeting
    /// in two nodes.
    Xi,
}

/// p-rank-f stratum of a boundary divisor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryStratum {
    pub f: u32,
    pub dim: u32,
    /// Admissible component p-ranks, one entry per component.
    pub splittings: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryDivisor {
    pub kind: DivisorKind,
    pub index: u32,
    pub genus: u32,
    pub component_genera: Vec<u32>,
    pub strata: Vec<BoundaryStratum>,
}

impl BoundaryDivisor {
    pub fn name(&self) -> String {
        match self.kind {
            DivisorKind::Delta => format!("Delta_{}", self.index),
            DivisorKind::Xi => format!("Xi_{}", self.index),
        }
    }

    /// Dual graph of the generic point with the given component p-ranks.
    pub fn dual_graph(&self, splitting: &[u32]) -> Result<DualGraph> {
        let verts: Vec<(u32, u32)> = self
            .component_genera
            .iter()
            .copied()
            .zip(splitting.iter().copied())
            .collect();
        if verts.len() != self.component_genera.len() || splitting.len() != verts.len() {
            return Err(Error::InvalidInput("splitting length mismatch".into()));
        }
        let edges = match (self.kind, verts.len()) {
            (DivisorKind::Delta, _) => vec![(0, 1)],
            (DivisorKind::Xi, 1) => vec![(0, 0)],
            (DivisorKind::Xi, _) => vec![(0, 1), (0, 1)],
        };
        DualGraph::new(verts, edges)
    }
}

fn pairs(g1: u32, g2: u32, total: u32) -> Vec<Vec<u32>> {
    (0..=g1)
        .filter(|&f1| f1 <= total && total - f1 <= g2)
        .map(|f1| vec![f1, total - f1])
        .collect()
}

/// Canonical boundary divisors Δ_i (1 ≤ i ≤ ⌊g/2⌋) and Ξ_i
/// (0 ≤ i ≤ ⌊(g−1)/2⌋) with their p-rank strata, each of dimension g − 2 + f.
pub fn boundary_catalog(g: u32) -> Result<Vec<BoundaryDivisor>> {
    if g < 2 {
        return Err(Error::InvalidInput(format!("boundary catalog needs g ≥ 2, got {g}")));
    }
    let mut out = Vec::new();
    for i in 1..=g / 2 {
        let strata = (0..=g)
            .map(|f| BoundaryStratum {
                f,
                dim: g - 2 + f,
                splittings: pairs(i, g - i, f),
            })
            .collect();
        out.push(BoundaryDivisor {
            kind: DivisorKind::Delta,
            index: i,
            genus: g,
            component_genera: vec![i, g - i],
            strata,
        });
    }
    for i in 0..=(g - 1) / 2 {
        let (genera, strata) = if i == 0 {
            let strata = (1..=g)
                .map(|f| BoundaryStratum {
                    f,
                    dim: g - 2 + f,
                    splittings: vec![vec![f - 1]],
                })
                .collect();
            (vec![g - 1], strata)
        } else {
            let strata = (1..=g)
                .map(|f| BoundaryStratum {
                    f,
                    dim: g - 2 + f,
                    splittings: pairs(i, g - 1 - i, f - 1),
                })
                .collect();
            (vec![i, g - 1 - i], strata)
        };
        out.push(BoundaryDivisor {
            kind: DivisorKind::Xi,
            index: i,
            genus: g,
            component_genera: genera,
            strata,
        });
    }
    Ok(out)
}

/// A chain of elliptic curves with prescribed p-rank arithmetic.
#[derive(Clone, Debug)]
pub struct DegenerationWitness {
    pub tree: ClutchingTree,
    pub labeling: PRankLabeling,
    pub curves: Vec<HyperellipticCurve>,
}

impl DegenerationWitness {
    pub fn p_rank(&self) -> u32 {
        self.tree.prank_compact(&self.labeling).unwrap()
    }
}

/// Path of g elliptic vertices, the first labeling in ℱ(Λ, f), and for
/// each vertex the first genus-1 curve over `field` (census order) whose
/// p-rank matches its label.
pub fn degeneration_witness(g: u32, f: u32, field: &GaloisField) -> Result<DegenerationWitness> {
    if g < 2 {
        return Err(Error::InvalidInput("degeneration witness needs g ≥ 2".into()));
    }
    let tree = ClutchingTree::path(&vec![1; g as usize])?;
    let labeling = tree
        .labelings(f)?
        .into_iter()
        .next()
        .expect("0 ≤ f ≤ g always admits a labeling");
    let needed: BTreeSet<u32> = labeling.iter().copied().collect();
    let mut found: [Option<HyperellipticCurve>; 2] = [None, None];
    for poly in enumerate_monic(field, 3, true) {
        let c = HyperellipticCurve::new(poly)?;
        let r = p_rank(&c);
        if found[r].is_none() {
            found[r] = Some(c);
        }
        if needed.iter().all(|&l| found[l as usize].is_some()) {
            break;
        }
    }
    let mut curves = Vec::with_capacity(labeling.len());
    for &l in &labeling {
        let c = found[l as usize].clone().ok_or_else(|| {
            Error::SearchExhausted(format!(
                "no elliptic curve of p-rank {l} over {field:?}"
            ))
        })?;
        curves.push(c);
    }
    Ok(DegenerationWitness { tree, labeling, curves })
}
