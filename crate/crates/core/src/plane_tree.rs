//! Plane rooted trees stored in depth-first (preorder) order.
//!
//! Vertex `i` is the `i`-th vertex visited by a leftmost-child-first
//! depth-first search, so `a ≺_DF b` is simply `a < b` and the root is 0.

use num_bigint::BigUint;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::degrees::ChildSequence;
use crate::error::{Error, Result};

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "TreeRecord", try_from = "TreeRecord")]
pub struct PlaneTree {
    parent: Vec<u32>,
    child_start: Vec<u32>,
    child_list: Vec<u32>,
    height: Vec<u32>,
    subtree_end: Vec<u32>,
}

impl PlaneTree {
    /// Decodes a tree from its children counts listed in depth-first order.
    pub fn from_preorder_counts(counts: &[u32]) -> Result<Self> {
        let m = counts.len();
        if m == 0 {
            return Err(Error::NotTenable("empty tree".into()));
        }
        let mut parent = vec![NO_PARENT; m];
        let mut stack: Vec<(u32, u32)> = Vec::new();
        for (i, &c) in counts.iter().enumerate() {
            if i > 0 {
                let top = stack
                    .last_mut()
                    .ok_or_else(|| Error::NotTenable(format!("walk exits at step {i} of {m}")))?;
                parent[i] = top.0;
                top.1 -= 1;
                if top.1 == 0 {
                    stack.pop();
                }
            }
            if c > 0 {
                stack.push((i as u32, c));
            }
        }
        if !stack.is_empty() {
            return Err(Error::NotTenable("walk does not return to −1".into()));
        }

        let mut child_start = Vec::with_capacity(m + 1);
        let mut acc = 0u32;
        child_start.push(0);
        for &c in counts {
            acc += c;
            child_start.push(acc);
        }
        let mut fill: Vec<u32> = child_start[..m].to_vec();
        let mut child_list = vec![0u32; acc as usize];
        let mut height = vec![0u32; m];
        for i in 1..m {
            let p = parent[i] as usize;
            child_list[fill[p] as usize] = i as u32;
            fill[p] += 1;
            height[i] = height[p] + 1;
        }
        let mut size = vec![1u32; m];
        for i in (1..m).rev() {
            size[parent[i] as usize] += size[i];
        }
        let subtree_end = (0..m).map(|i| i as u32 + size[i]).collect();
        Ok(PlaneTree {
            parent,
            child_start,
            child_list,
            height,
            subtree_end,
        })
    }

    /// The single-vertex tree.
    pub fn singleton() -> Self {
        Self::from_preorder_counts(&[0]).expect("singleton is tenable")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NO_PARENT => None,
            p => Some(p as usize),
        }
    }

    pub fn grandparent(&self, v: usize) -> Option<usize> {
        self.parent(v).and_then(|p| self.parent(p))
    }

    pub fn children(&self, v: usize) -> &[u32] {
        &self.child_list[self.child_start[v] as usize..self.child_start[v + 1] as usize]
    }

    pub fn child_count(&self, v: usize) -> usize {
        (self.child_start[v + 1] - self.child_start[v]) as usize
    }

    pub fn height(&self, v: usize) -> usize {
        self.height[v] as usize
    }

    pub fn heights(&self) -> &[u32] {
        &self.height
    }

    pub fn max_height(&self) -> usize {
        self.height.iter().copied().max().unwrap_or(0) as usize
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.child_count(v) == 0
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&v| self.is_leaf(v))
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    /// First vertex after the subtree of `v` in depth-first order.
    pub fn subtree_end(&self, v: usize) -> usize {
        self.subtree_end[v] as usize
    }

    /// `a ∈ [ρ, b]`, i.e. `a` is `b` or one of its ancestors.
    pub fn is_ancestor_or_self(&self, a: usize, b: usize) -> bool {
        a <= b && b < self.subtree_end[a] as usize
    }

    /// Vertices of `[ρ, v]` from the root down.
    pub fn path_from_root(&self, v: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.height(v) + 1);
        let mut cur = Some(v);
        while let Some(x) = cur {
            path.push(x);
            cur = self.parent(x);
        }
        path.reverse();
        path
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.height[a] > self.height[b] {
            a = self.parent[a] as usize;
        }
        while self.height[b] > self.height[a] {
            b = self.parent[b] as usize;
        }
        while a != b {
            a = self.parent[a] as usize;
            b = self.parent[b] as usize;
        }
        a
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let c = self.lca(a, b);
        self.height(a) + self.height(b) - 2 * self.height(c)
    }

    /// Children counts in depth-first order.
    pub fn preorder_counts(&self) -> Vec<u32> {
        (0..self.len())
            .map(|v| self.child_count(v) as u32)
            .collect()
    }

    pub fn child_sequence(&self) -> ChildSequence {
        ChildSequence::new(self.preorder_counts())
    }

    pub fn ecd(&self) -> Vec<u64> {
        self.child_sequence().ecd()
    }

    /// Łukasiewicz walk `S(j) = Σ_{i≤j} (c_i − 1)`, `j = 1..=m`.
    pub fn lukasiewicz(&self) -> Vec<i64> {
        prefix_walk(self.preorder_counts().iter().copied())
    }

    /// Subtree induced by a root-closed vertex set (every listed vertex's
    /// parent is listed too). Returns the tree and the map from new to old
    /// vertex ids.
    pub fn induced(&self, vertices: &[usize]) -> Result<(PlaneTree, Vec<usize>)> {
        let mut keep = vec![false; self.len()];
        for &v in vertices {
            keep[v] = true;
        }
        if !keep[0] {
            return Err(Error::Precondition(
                "induced subtree must contain the root".into(),
            ));
        }
        let old: Vec<usize> = (0..self.len()).filter(|&v| keep[v]).collect();
        for &v in &old {
            if let Some(p) = self.parent(v) {
                if !keep[p] {
                    return Err(Error::Precondition(format!(
                        "vertex {v} kept without its parent {p}"
                    )));
                }
            }
        }
        let counts: Vec<u32> = old
            .iter()
            .map(|&v| {
                self.children(v)
                    .iter()
                    .filter(|&&c| keep[c as usize])
                    .count() as u32
            })
            .collect();
        Ok((PlaneTree::from_preorder_counts(&counts)?, old))
    }
}

fn prefix_walk(counts: impl Iterator<Item = u32>) -> Vec<i64> {
    counts
        .scan(0i64, |s, c| {
            *s += c as i64 - 1;
            Some(*s)
        })
        .collect()
}

/// A Łukasiewicz walk of a permuted children sequence and its rotation at
/// the first minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LukasiewiczWalk {
    /// `S(j)` for `j = 1..=m`.
    pub steps: Vec<i64>,
    /// 1-based location `i0` of the first minimum of `S`.
    pub rotation: usize,
    /// Rotated walk `S^exc(j)`, `j = 1..=m`.
    pub excursion: Vec<i64>,
}

impl LukasiewiczWalk {
    pub fn new(counts: &[u32]) -> Self {
        let steps = prefix_walk(counts.iter().copied());
        let rotation = first_min_location(&steps);
        let rotated = rotate(counts, rotation);
        let excursion = prefix_walk(rotated.into_iter());
        LukasiewiczWalk {
            steps,
            rotation,
            excursion,
        }
    }
}

/// 1-based index of the first minimum of `walk`.
pub fn first_min_location(walk: &[i64]) -> usize {
    let mut best = 0;
    for (j, &s) in walk.iter().enumerate() {
        if s < walk[best] {
            best = j;
        }
    }
    best + 1
}

/// `(x_{i0+1}, …, x_m, x_1, …, x_{i0})`.
fn rotate<T: Copy>(xs: &[T], i0: usize) -> Vec<T> {
    xs[i0..].iter().chain(xs[..i0].iter()).copied().collect()
}

/// Samples a uniform labeled tree with the given children sequence.
///
/// Returns the tree and `origin`, where `origin[v]` is the index into
/// `children.counts()` of the entry that became vertex `v`.
pub fn sample_labeled_tree<R: Rng + ?Sized>(
    children: &ChildSequence,
    rng: &mut R,
) -> Result<(PlaneTree, Vec<usize>)> {
    children.require_tree_tenable()?;
    let counts = children.counts();
    let mut perm: Vec<usize> = (0..counts.len()).collect();
    perm.shuffle(rng);
    let permuted: Vec<u32> = perm.iter().map(|&i| counts[i]).collect();
    let walk = prefix_walk(permuted.iter().copied());
    let i0 = first_min_location(&walk);
    let origin = rotate(&perm, i0);
    let rotated: Vec<u32> = origin.iter().map(|&i| counts[i]).collect();
    Ok((PlaneTree::from_preorder_counts(&rotated)?, origin))
}

/// Samples a uniform plane tree with the given ECD.
pub fn sample_tree<R: Rng + ?Sized>(children: &ChildSequence, rng: &mut R) -> Result<PlaneTree> {
    Ok(sample_labeled_tree(children, rng)?.0)
}

pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// `z (m − 1)! / ∏ s_i!` plane forests with ranked roots, `z = k(s)`.
pub fn count_trees(children: &ChildSequence) -> Result<BigUint> {
    if !children.is_forest_tenable() || children.is_empty() {
        return Err(Error::NotTenable(format!(
            "k(s) = {} for m = {}",
            children.forest_roots(),
            children.len()
        )));
    }
    let m = children.len() as u64;
    let z = children.forest_roots() as u64;
    let denom = children
        .ecd()
        .iter()
        .fold(BigUint::one(), |acc, &s| acc * factorial(s));
    Ok(factorial(m - 1) * z / denom)
}

/// Every plane tree with the given ECD, in lexicographic order of their
/// preorder children counts. Fails when the count exceeds `budget`.
pub fn enumerate_trees(children: &ChildSequence, budget: u64) -> Result<Vec<PlaneTree>> {
    let total = count_trees(children)?;
    if !children.is_tree_tenable() {
        return Err(Error::NotTenable("enumeration needs a tree ECD".into()));
    }
    if total > BigUint::from(budget) {
        return Err(Error::BudgetExceeded(format!(
            "{total} trees exceed the budget of {budget}"
        )));
    }
    let mut remaining = children.ecd();
    let m = children.len();
    let mut prefix = Vec::with_capacity(m);
    let mut out = Vec::new();
    fn rec(
        remaining: &mut [u64],
        prefix: &mut Vec<u32>,
        walk: i64,
        m: usize,
        out: &mut Vec<PlaneTree>,
    ) {
        if prefix.len() == m {
            out.push(PlaneTree::from_preorder_counts(prefix).expect("valid walk"));
            return;
        }
        for c in 0..remaining.len() {
            if remaining[c] == 0 {
                continue;
            }
            let next = walk + c as i64 - 1;
            // the walk may only hit −1 on the last step
            if next < 0 && prefix.len() + 1 < m {
                continue;
            }
            remaining[c] -= 1;
            prefix.push(c as u32);
            rec(remaining, prefix, next, m, out);
            prefix.pop();
            remaining[c] += 1;
        }
    }
    rec(&mut remaining, &mut prefix, 0, m, &mut out);
    Ok(out)
}

/// Ancestral neighbourhoods of a vertex `u`. All lists are sorted in
/// depth-first order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AncestralSets {
    /// `{v : parent(v) ∈ [ρ,u), u ≺ v}` (right of the path).
    pub b1_minus: Vec<usize>,
    /// `{v : parent(v) ∈ [ρ,u), v ≺ u}` (left of the path).
    pub b1_plus: Vec<usize>,
    pub b1: Vec<usize>,
    /// `{v : grandparent(v) ∈ [ρ,u)}`.
    pub b2: Vec<usize>,
    /// Vertex set of `Anc^(1)(t,u)`: `[ρ,u] ∪ B1`.
    pub anc1: Vec<usize>,
    /// Vertex set of `Anc^(2)(t,u)`: `[ρ,u] ∪ B1 ∪ B2`.
    pub anc2: Vec<usize>,
}

pub fn ancestral_sets(t: &PlaneTree, u: usize) -> AncestralSets {
    let path = t.path_from_root(u);
    let strict = &path[..path.len() - 1];
    let mut b1: Vec<usize> = strict
        .iter()
        .flat_map(|&w| t.children(w).iter().map(|&c| c as usize))
        .collect();
    b1.sort_unstable();
    let mut b2: Vec<usize> = b1
        .iter()
        .flat_map(|&w| t.children(w).iter().map(|&c| c as usize))
        .collect();
    b2.sort_unstable();
    let b1_minus = b1.iter().copied().filter(|&v| v > u).collect();
    let b1_plus = b1.iter().copied().filter(|&v| v < u).collect();
    let mut anc1: Vec<usize> = path.iter().chain(b1.iter()).copied().collect();
    anc1.sort_unstable();
    anc1.dedup();
    let mut anc2: Vec<usize> = anc1.iter().chain(b2.iter()).copied().collect();
    anc2.sort_unstable();
    anc2.dedup();
    AncestralSets {
        b1_minus,
        b1_plus,
        b1,
        b2,
        anc1,
        anc2,
    }
}

/// Tree spanned by the root and `J` marked leaves, with edge lengths, leaf
/// weights and a probability measure on each root-to-leaf path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedTree {
    /// Parent of each node; node 0 is the root `0+`.
    pub parent: Vec<Option<usize>>,
    /// Length of the edge to the parent (0 for the root).
    pub edge_length: Vec<f64>,
    /// Distance from the root.
    pub depth: Vec<f64>,
    /// Node holding leaf `i+` (0-based `i`).
    pub leaf_nodes: Vec<usize>,
    pub leaf_weights: Vec<f64>,
    /// Atoms `(distance from root, mass)` of the measure on `[0+, i+]`.
    pub path_measures: Vec<Vec<(f64, f64)>>,
    /// Original tree vertex of each node.
    pub original: Vec<usize>,
}

impl ReducedTree {
    pub fn leaf_count(&self) -> usize {
        self.leaf_nodes.len()
    }

    pub fn leaf_depth(&self, i: usize) -> f64 {
        self.depth[self.leaf_nodes[i]]
    }

    fn ancestors(&self, mut node: usize) -> Vec<usize> {
        let mut out = vec![node];
        while let Some(p) = self.parent[node] {
            out.push(p);
            node = p;
        }
        out
    }

    /// Depth of the branch point of the paths to leaves `i` and `j`.
    pub fn branch_depth(&self, i: usize, j: usize) -> f64 {
        let a = self.ancestors(self.leaf_nodes[i]);
        let b = self.ancestors(self.leaf_nodes[j]);
        let common = a.iter().find(|x| b.contains(x)).copied().unwrap_or(0);
        self.depth[common]
    }

    /// Distance between the point at distance `s` on `[0+, i+]` and the
    /// point at distance `r` on `[0+, j+]`.
    pub fn path_point_distance(&self, i: usize, s: f64, j: usize, r: f64) -> f64 {
        let c = if i == j {
            self.leaf_depth(i)
        } else {
            self.branch_depth(i, j)
        };
        s + r - 2.0 * s.min(r).min(c)
    }

    /// Multiplies edge lengths and path positions by `alpha`.
    pub fn scale(&self, alpha: f64) -> ReducedTree {
        let mut out = self.clone();
        out.edge_length.iter_mut().for_each(|x| *x *= alpha);
        out.depth.iter_mut().for_each(|x| *x *= alpha);
        for m in &mut out.path_measures {
            m.iter_mut().for_each(|(pos, _)| *pos *= alpha);
        }
        out
    }

    /// Number of nodes with at least one child: used to compare shapes.
    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }
}

/// The spanned subtree or the boundary element `∂` when the marks do not
/// form `J` distinct leaves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReducedSubtree {
    Tree(ReducedTree),
    Boundary,
}

impl ReducedSubtree {
    pub fn tree(&self) -> Option<&ReducedTree> {
        match self {
            ReducedSubtree::Tree(t) => Some(t),
            ReducedSubtree::Boundary => None,
        }
    }

    pub fn is_boundary(&self) -> bool {
        matches!(self, ReducedSubtree::Boundary)
    }
}

/// Builds the subtree spanned by the root, the `k` marks `leaves_u` and the
/// `ℓ` marks `vertices_v`.
///
/// `f_values[i]` becomes the leaf weight `f_values[i] / √m` of `leaves_u[i]`;
/// `path_measures[i]` gives the mass at each depth `0..height(u_i)` of
/// `[ρ, u_i]`. The marks in `vertices_v` get weight 0 and a point mass at
/// the root.
pub fn reduced_subtree(
    t: &PlaneTree,
    leaves_u: &[usize],
    vertices_v: &[usize],
    f_values: &[f64],
    path_measures: &[Vec<f64>],
) -> Result<ReducedSubtree> {
    if f_values.len() != leaves_u.len() || path_measures.len() != leaves_u.len() {
        return Err(Error::Precondition(
            "one f value and one path measure per u-mark".into(),
        ));
    }
    let marks: Vec<usize> = leaves_u.iter().chain(vertices_v).copied().collect();
    if let Some(&bad) = marks.iter().find(|&&x| x >= t.len()) {
        return Err(Error::Precondition(format!("vertex {bad} not in tree")));
    }
    for (i, &a) in marks.iter().enumerate() {
        if a == t.root() {
            return Ok(ReducedSubtree::Boundary);
        }
        for (j, &b) in marks.iter().enumerate() {
            if i != j && t.is_ancestor_or_self(a, b) {
                return Ok(ReducedSubtree::Boundary);
            }
        }
    }
    let mut nodes: Vec<usize> = vec![t.root()];
    nodes.extend(&marks);
    for (i, &a) in marks.iter().enumerate() {
        for &b in &marks[i + 1..] {
            nodes.push(t.lca(a, b));
        }
    }
    nodes.sort_unstable();
    nodes.dedup();

    // nearest listed strict ancestor, found with a stack over DF order
    let mut parent = vec![None; nodes.len()];
    let mut stack: Vec<usize> = Vec::new();
    for (idx, &v) in nodes.iter().enumerate() {
        while let Some(&top) = stack.last() {
            if t.is_ancestor_or_self(nodes[top], v) {
                break;
            }
            stack.pop();
        }
        parent[idx] = stack.last().copied();
        stack.push(idx);
    }
    let depth: Vec<f64> = nodes.iter().map(|&v| t.height(v) as f64).collect();
    let edge_length = (0..nodes.len())
        .map(|i| parent[i].map_or(0.0, |p| depth[i] - depth[p]))
        .collect();
    let leaf_nodes: Vec<usize> = marks
        .iter()
        .map(|x| nodes.binary_search(x).expect("mark is a node"))
        .collect();
    let sqrt_m = (t.len() as f64).sqrt();
    let mut leaf_weights: Vec<f64> = f_values.iter().map(|f| f / sqrt_m).collect();
    leaf_weights.extend(std::iter::repeat_n(0.0, vertices_v.len()));
    let mut measures: Vec<Vec<(f64, f64)>> = path_measures
        .iter()
        .map(|masses| {
            masses
                .iter()
                .enumerate()
                .filter(|(_, &w)| w > 0.0)
                .map(|(h, &w)| (h as f64, w))
                .collect()
        })
        .collect();
    measures.extend(std::iter::repeat_n(vec![(0.0, 1.0)], vertices_v.len()));
    Ok(ReducedSubtree::Tree(ReducedTree {
        parent,
        edge_length,
        depth,
        leaf_nodes,
        leaf_weights,
        path_measures: measures,
        original: nodes,
    }))
}

/// Leaf and vertex coupled through one uniform variable `x ∈ [0,1)`.
///
/// The vertex is the one at depth-first position `⌊m x⌋`; the leaf is
/// `G^{-1}(x)` for the right-continuous inverse of the cumulative
/// leaf-counting measure in depth-first order, i.e. leaf number
/// `⌊s0 x⌋ + 1`.
pub fn coupled_leaf_vertex(t: &PlaneTree, x: f64) -> (usize, usize) {
    let m = t.len();
    let vertex = ((m as f64 * x) as usize).min(m - 1);
    let s0 = t.leaf_count();
    let rank = ((s0 as f64 * x) as usize).min(s0 - 1);
    let leaf = t.leaves().nth(rank).expect("rank below leaf count");
    (leaf, vertex)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationSummary {
    pub reps: usize,
    pub sigma: f64,
    /// `(level, quantile)` pairs.
    pub quantiles: Vec<(f64, f64)>,
    pub max: f64,
}

/// Quantiles of `max_j |Σ_{i≤j} p_{π(i)} − j/m| / σ(p)` over uniform
/// permutations `π`.
pub fn permutation_concentration_stat<R: Rng + ?Sized>(
    p: &[f64],
    rng: &mut R,
    reps: usize,
) -> Result<ConcentrationSummary> {
    let total: f64 = p.iter().sum();
    if p.is_empty() || (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(total));
    }
    let m = p.len() as f64;
    let sigma = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut work = p.to_vec();
    let mut stats = Vec::with_capacity(reps);
    for _ in 0..reps {
        work.shuffle(rng);
        let mut acc = 0.0;
        let mut worst = 0.0f64;
        for (j, &x) in work.iter().enumerate() {
            acc += x;
            worst = worst.max((acc - (j + 1) as f64 / m).abs());
        }
        stats.push(worst / sigma);
    }
    stats.sort_by(f64::total_cmp);
    let levels = [0.5, 0.9, 0.99];
    let quantiles = levels
        .iter()
        .map(|&q| (q, crate::stats::quantile_sorted(&stats, q)))
        .collect();
    Ok(ConcentrationSummary {
        reps,
        sigma,
        quantiles,
        max: stats.last().copied().unwrap_or(0.0),
    })
}

/// JSON form `{ecd, parent_array, dfs_order}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRecord {
    pub ecd: Vec<u64>,
    pub parent_array: Vec<Option<usize>>,
    pub dfs_order: Vec<usize>,
}

impl From<PlaneTree> for TreeRecord {
    fn from(t: PlaneTree) -> Self {
        TreeRecord {
            ecd: t.ecd(),
            parent_array: (0..t.len()).map(|v| t.parent(v)).collect(),
            dfs_order: (0..t.len()).collect(),
        }
    }
}

impl TryFrom<TreeRecord> for PlaneTree {
    type Error = Error;

    fn try_from(rec: TreeRecord) -> Result<Self> {
        let m = rec.parent_array.len();
        if rec.dfs_order.len() != m {
            return Err(Error::Parse(
                "dfs_order and parent_array lengths differ".into(),
            ));
        }
        let mut position = vec![usize::MAX; m];
        for (pos, &v) in rec.dfs_order.iter().enumerate() {
            if v >= m || position[v] != usize::MAX {
                return Err(Error::Parse(format!(
                    "dfs_order is not a permutation at {v}"
                )));
            }
            position[v] = pos;
        }
        let mut counts = vec![0u32; m];
        for (v, p) in rec.parent_array.iter().enumerate() {
            match p {
                Some(p) if *p < m => {
                    if position[*p] >= position[v] {
                        return Err(Error::Parse(format!("parent {p} of {v} comes later")));
                    }
                    counts[position[*p]] += 1;
                }
                Some(p) => return Err(Error::Parse(format!("parent {p} out of range"))),
                None if position[v] != 0 => {
                    return Err(Error::Parse("root must come first in dfs_order".into()))
                }
                None => {}
            }
        }
        let tree = PlaneTree::from_preorder_counts(&counts)?;
        for (v, p) in rec.parent_array.iter().enumerate() {
            if tree.parent(position[v]) != p.map(|p| position[p]) {
                return Err(Error::Parse("dfs_order is not a depth-first order".into()));
            }
        }
        if tree.ecd() != rec.ecd {
            return Err(Error::Parse("ecd does not match the tree".into()));
        }
        Ok(tree)
    }
}
