//! Admissible leaf pairs, the tilted tree measure and the surgery maps.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

use crate::degrees::ChildSequence;
use crate::error::{Error, Result};
use crate::graphs::MultiGraph;
use crate::mmspace::FiniteMMSpace;
use crate::plane_tree::{sample_tree, PlaneTree};

/// Ordered leaf pair `(u, v)`.
pub type LeafPair = (usize, usize);

/// Counts behind `f_t(u) = |A(t,u)|`, built in one pass over the tree.
///
/// With `L(b)` the number of leaf children of `b` and `R(w)` the sum of
/// `L` over the siblings to the right of `w`, the pairs with first entry
/// `u` are exactly the leaf children of the right siblings of the vertices
/// in `(ρ, parent(u)]`, so `f_t(u) = Σ_{w ∈ (ρ, parent(u)]} R(w)`.
#[derive(Debug, Clone)]
pub struct AdmissibleIndex {
    leaf_children: Vec<u64>,
    right_weight: Vec<u64>,
    path_weight: Vec<u64>,
    leaves: Vec<usize>,
    leaf_cumulative: Vec<u64>,
    total: u64,
}

impl AdmissibleIndex {
    pub fn new(t: &PlaneTree) -> Self {
        let m = t.len();
        let leaf_children: Vec<u64> = (0..m)
            .map(|v| {
                t.children(v)
                    .iter()
                    .filter(|&&c| t.is_leaf(c as usize))
                    .count() as u64
            })
            .collect();
        let mut right_weight = vec![0u64; m];
        for p in 0..m {
            let mut acc = 0;
            for &c in t.children(p).iter().rev() {
                right_weight[c as usize] = acc;
                acc += leaf_children[c as usize];
            }
        }
        let mut path_weight = vec![0u64; m];
        for v in 1..m {
            let p = t.parent(v).expect("non-root");
            path_weight[v] = path_weight[p] + right_weight[v];
        }
        let leaves: Vec<usize> = t.leaves().collect();
        let mut leaf_cumulative = Vec::with_capacity(leaves.len());
        let mut total = 0u64;
        for &u in &leaves {
            total += t.parent(u).map_or(0, |p| path_weight[p]);
            leaf_cumulative.push(total);
        }
        AdmissibleIndex {
            leaf_children,
            right_weight,
            path_weight,
            leaves,
            leaf_cumulative,
            total,
        }
    }

    /// `|A(t)|`.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `f_t(u)`; zero for non-leaves.
    pub fn f(&self, t: &PlaneTree, u: usize) -> u64 {
        if !t.is_leaf(u) {
            return 0;
        }
        t.parent(u).map_or(0, |p| self.path_weight[p])
    }

    /// `(leaf, f_t(leaf))` in depth-first order.
    pub fn f_values(&self, t: &PlaneTree) -> Vec<(usize, u64)> {
        self.leaves.iter().map(|&u| (u, self.f(t, u))).collect()
    }

    /// Uniform element of `A(t)`, or `None` when it is empty.
    pub fn sample_pair<R: Rng + ?Sized>(&self, t: &PlaneTree, rng: &mut R) -> Option<LeafPair> {
        if self.total == 0 {
            return None;
        }
        let x = rng.gen_range(0..self.total);
        let idx = self.leaf_cumulative.partition_point(|&c| c <= x);
        let u = self.leaves[idx];
        let mut y = rng.gen_range(0..self.f(t, u));
        let mut w = t.parent(u).expect("u has a parent when f > 0");
        loop {
            if y < self.right_weight[w] {
                let p = t.parent(w).expect("w is below the root");
                let siblings = t.children(p);
                let pos = siblings
                    .iter()
                    .position(|&c| c as usize == w)
                    .expect("child");
                for &b in &siblings[pos + 1..] {
                    let b = b as usize;
                    if y < self.leaf_children[b] {
                        let v = t
                            .children(b)
                            .iter()
                            .map(|&c| c as usize)
                            .filter(|&c| t.is_leaf(c))
                            .nth(y as usize)
                            .expect("y below leaf count");
                        return Some((u, v));
                    }
                    y -= self.leaf_children[b];
                }
                unreachable!("right weight is the sum over right siblings");
            }
            y -= self.right_weight[w];
            w = t.parent(w).expect("f(u) is the sum along the path");
        }
    }

    /// Law of the depth of `grandparent(v)` for `v` uniform in `A(t,u)`,
    /// indexed by depth `0..=height(u)`.
    pub fn line_measure(&self, t: &PlaneTree, u: usize) -> Vec<f64> {
        let mut out = vec![0.0; t.height(u) + 1];
        let f = self.f(t, u);
        if f == 0 {
            return out;
        }
        let mut w = t.parent(u);
        while let Some(x) = w {
            if x == t.root() {
                break;
            }
            out[t.height(x) - 1] += self.right_weight[x] as f64 / f as f64;
            w = t.parent(x);
        }
        out
    }
}

/// `A(t)` listed in the order `≪` (by `parent(u)`, then `parent(v)`, ties
/// by `u`, then `v`), together with `f_t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissiblePairs {
    pub pairs: Vec<LeafPair>,
    pub f: Vec<(usize, u64)>,
}

impl AdmissiblePairs {
    pub fn total(&self) -> u64 {
        self.pairs.len() as u64
    }
}

fn sort_by_order(t: &PlaneTree, pairs: &mut [LeafPair]) {
    pairs.sort_by_key(|&(u, v)| (t.parent(u), t.parent(v), u, v));
}

/// Every admissible pair, by walking each leaf's root path.
pub fn admissible_pairs(t: &PlaneTree) -> AdmissiblePairs {
    let idx = AdmissibleIndex::new(t);
    let mut pairs = Vec::with_capacity(idx.total() as usize);
    for &u in &idx.leaves {
        let mut w = t.parent(u);
        while let Some(x) = w {
            let Some(p) = t.parent(x) else { break };
            let siblings = t.children(p);
            let pos = siblings
                .iter()
                .position(|&c| c as usize == x)
                .expect("child");
            for &b in &siblings[pos + 1..] {
                for &v in t.children(b as usize) {
                    if t.is_leaf(v as usize) {
                        pairs.push((u, v as usize));
                    }
                }
            }
            w = Some(p);
        }
    }
    sort_by_order(t, &mut pairs);
    AdmissiblePairs {
        pairs,
        f: idx.f_values(t),
    }
}

/// Direct check of the definition for one ordered pair.
pub fn is_admissible(t: &PlaneTree, u: usize, v: usize) -> bool {
    if u >= t.len() || v >= t.len() || !t.is_leaf(u) || !t.is_leaf(v) || u == v {
        return false;
    }
    let (Some(pu), Some(pv), Some(gv)) = (t.parent(u), t.parent(v), t.grandparent(v)) else {
        return false;
    };
    gv != pu && t.is_ancestor_or_self(gv, pu) && pu < pv
}

/// Quadratic reference implementation of [`admissible_pairs`].
pub fn admissible_pairs_naive(t: &PlaneTree) -> AdmissiblePairs {
    let leaves: Vec<usize> = t.leaves().collect();
    let mut pairs = Vec::new();
    let mut f = Vec::with_capacity(leaves.len());
    for &u in &leaves {
        let before = pairs.len();
        for &v in &leaves {
            if is_admissible(t, u, v) {
                pairs.push((u, v));
            }
        }
        f.push((u, (pairs.len() - before) as u64));
    }
    sort_by_order(t, &mut pairs);
    AdmissiblePairs { pairs, f }
}

/// Which `k`-sets of admissible pairs count as surgery sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSetRule {
    /// The `2k` leaves are distinct.
    DistinctLeaves,
    /// Distinct leaves and distinct `(parent(u), parent(v))`, so that the
    /// surgery adds `k` distinct new edges and the result stays simple.
    SimpleSurgery,
}

/// Whether a tuple of admissible pairs is a valid surgery site.
pub fn is_valid_pair_set(t: &PlaneTree, pairs: &[LeafPair], rule: PairSetRule) -> bool {
    let mut leaves: Vec<usize> = pairs.iter().flat_map(|&(u, v)| [u, v]).collect();
    leaves.sort_unstable();
    if leaves.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    if !pairs.iter().all(|&(u, v)| is_admissible(t, u, v)) {
        return false;
    }
    if rule == PairSetRule::SimpleSurgery {
        let mut ends: Vec<(Option<usize>, Option<usize>)> = pairs
            .iter()
            .map(|&(u, v)| (t.parent(u), t.parent(v)))
            .collect();
        ends.sort_unstable();
        if ends.windows(2).any(|w| w[0] == w[1]) {
            return false;
        }
    }
    true
}

/// `|A_k(t)|` under `rule`, by backtracking over `k`-subsets of `A(t)`.
pub fn count_pair_sets(t: &PlaneTree, pairs: &[LeafPair], k: usize, rule: PairSetRule) -> u128 {
    fn rec(
        t: &PlaneTree,
        pairs: &[LeafPair],
        start: usize,
        k: usize,
        rule: PairSetRule,
        used_leaves: &mut Vec<usize>,
        used_ends: &mut Vec<(usize, usize)>,
    ) -> u128 {
        if k == 0 {
            return 1;
        }
        let mut total = 0;
        for i in start..pairs.len() {
            let (u, v) = pairs[i];
            if used_leaves.contains(&u) || used_leaves.contains(&v) {
                continue;
            }
            let ends = (t.parent(u).unwrap_or(0), t.parent(v).unwrap_or(0));
            if rule == PairSetRule::SimpleSurgery && used_ends.contains(&ends) {
                continue;
            }
            used_leaves.extend([u, v]);
            used_ends.push(ends);
            total += rec(t, pairs, i + 1, k - 1, rule, used_leaves, used_ends);
            used_leaves.truncate(used_leaves.len() - 2);
            used_ends.pop();
        }
        total
    }
    rec(t, pairs, 0, k, rule, &mut Vec::new(), &mut Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TiltMethod {
    /// Exact: rejection from uniform trees and uniform tuples of pairs.
    Rejection,
    /// Approximate: a self-normalized pool of trees weighted by `|A(t)|^k`.
    Pool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AcceptanceStats {
    pub attempts: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub effective_sample_size: Option<f64>,
    pub approximate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltOptions {
    pub method: TiltMethod,
    pub max_attempts: u64,
    pub pool_size: usize,
}

impl Default for TiltOptions {
    fn default() -> Self {
        TiltOptions {
            method: TiltMethod::Rejection,
            max_attempts: 100_000_000,
            pool_size: 10_000,
        }
    }
}

/// A plane tree with `k` surgery sites, pairs sorted by `≪`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedTreePair {
    pub tree: PlaneTree,
    pub pairs: Vec<LeafPair>,
    pub method: TiltMethod,
    pub acceptance_stats: AcceptanceStats,
}

fn stats(attempts: u64, ess: Option<f64>, approximate: bool) -> AcceptanceStats {
    AcceptanceStats {
        attempts,
        accepted: 1,
        acceptance_rate: 1.0 / attempts.max(1) as f64,
        effective_sample_size: ess,
        approximate,
    }
}

/// Samples `(t, x)` uniformly from trees with ECD `s` carrying a valid set
/// `x` of `k` admissible pairs (rule [`PairSetRule::SimpleSurgery`]).
///
/// Rejection mode accepts a uniform tree with probability
/// `(|A(t)| / (s0 (s0 − 1)))^k`, then a uniform `k`-tuple from `A(t)^k`
/// when it is a valid set; each unordered set is hit by `k!` tuples, so the
/// output is exactly uniform.
pub fn sample_tilted<R: Rng + ?Sized>(
    children: &ChildSequence,
    k: usize,
    options: TiltOptions,
    rng: &mut R,
) -> Result<TiltedTreePair> {
    children.require_tree_tenable()?;
    let s0 = children.leaves();
    if s0 < 2 * k {
        return Err(Error::Precondition(format!(
            "{k} pairs need {} distinct leaves but s0 = {s0}",
            2 * k
        )));
    }
    if k == 0 {
        let tree = sample_tree(children, rng)?;
        return Ok(TiltedTreePair {
            tree,
            pairs: vec![],
            method: options.method,
            acceptance_stats: stats(1, None, false),
        });
    }
    match options.method {
        TiltMethod::Rejection => sample_tilted_rejection(children, k, options, rng),
        TiltMethod::Pool => sample_tilted_pool(children, k, options, rng),
    }
}

fn draw_tuple<R: Rng + ?Sized>(
    t: &PlaneTree,
    idx: &AdmissibleIndex,
    k: usize,
    rng: &mut R,
) -> Option<Vec<LeafPair>> {
    let mut pairs: Vec<LeafPair> = (0..k)
        .map(|_| idx.sample_pair(t, rng))
        .collect::<Option<_>>()?;
    if !is_valid_pair_set(t, &pairs, PairSetRule::SimpleSurgery) {
        return None;
    }
    sort_by_order(t, &mut pairs);
    Some(pairs)
}

fn sample_tilted_rejection<R: Rng + ?Sized>(
    children: &ChildSequence,
    k: usize,
    options: TiltOptions,
    rng: &mut R,
) -> Result<TiltedTreePair> {
    let s0 = children.leaves() as f64;
    let bound = s0 * (s0 - 1.0);
    for attempt in 1..=options.max_attempts {
        let t = sample_tree(children, rng)?;
        let idx = AdmissibleIndex::new(&t);
        if idx.total() == 0 {
            continue;
        }
        let accept = (idx.total() as f64 / bound).powi(k as i32);
        if rng.gen::<f64>() >= accept {
            continue;
        }
        if let Some(pairs) = draw_tuple(&t, &idx, k, rng) {
            return Ok(TiltedTreePair {
                tree: t,
                pairs,
                method: TiltMethod::Rejection,
                acceptance_stats: stats(attempt, None, false),
            });
        }
    }
    Err(Error::AttemptsExhausted(options.max_attempts))
}

fn sample_tilted_pool<R: Rng + ?Sized>(
    children: &ChildSequence,
    k: usize,
    options: TiltOptions,
    rng: &mut R,
) -> Result<TiltedTreePair> {
    let mut pool = Vec::with_capacity(options.pool_size);
    let mut weights = Vec::with_capacity(options.pool_size);
    for _ in 0..options.pool_size.max(1) {
        let t = sample_tree(children, rng)?;
        let idx = AdmissibleIndex::new(&t);
        weights.push((idx.total() as f64).powi(k as i32));
        pool.push((t, idx));
    }
    let sum: f64 = weights.iter().sum();
    if sum == 0.0 {
        return Err(Error::Precondition(
            "no pooled tree has an admissible pair".into(),
        ));
    }
    let ess = sum * sum / weights.iter().map(|w| w * w).sum::<f64>();
    let dist = rand::distributions::WeightedIndex::new(&weights)
        .map_err(|e| Error::Precondition(e.to_string()))?;
    for attempt in 1..=options.max_attempts {
        let (t, idx) = &pool[rng.sample(&dist)];
        if let Some(pairs) = draw_tuple(t, idx, k, rng) {
            return Ok(TiltedTreePair {
                tree: t.clone(),
                pairs,
                method: TiltMethod::Pool,
                acceptance_stats: stats(attempt, Some(ess), true),
            });
        }
    }
    Err(Error::AttemptsExhausted(options.max_attempts))
}

/// Graph produced by [`identify_i`]: `kept[i]` is the tree vertex that
/// became graph vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurgeryGraph {
    pub graph: MultiGraph,
    pub kept: Vec<usize>,
}

/// Adds an edge `parent(u_j) – parent(v_j)` for each pair and deletes the
/// leaves `u_j, v_j`.
pub fn identify_i(t: &PlaneTree, pairs: &[LeafPair]) -> Result<SurgeryGraph> {
    if !is_valid_pair_set(t, pairs, PairSetRule::DistinctLeaves) {
        return Err(Error::Precondition(
            "pairs are not a valid surgery site".into(),
        ));
    }
    let mut deleted = vec![false; t.len()];
    for &(u, v) in pairs {
        deleted[u] = true;
        deleted[v] = true;
    }
    let kept: Vec<usize> = (0..t.len()).filter(|&v| !deleted[v]).collect();
    let mut new_id = vec![u32::MAX; t.len()];
    for (i, &v) in kept.iter().enumerate() {
        new_id[v] = i as u32;
    }
    let mut edges: Vec<(u32, u32)> = kept
        .iter()
        .filter_map(|&v| t.parent(v).map(|p| (new_id[p], new_id[v])))
        .collect();
    for &(u, v) in pairs {
        let (pu, pv) = (t.parent(u).expect("leaf"), t.parent(v).expect("leaf"));
        edges.push((new_id[pu], new_id[pv]));
    }
    let graph = MultiGraph::new(kept.len(), edges)?;
    if !graph.is_simple() {
        return Err(Error::NonSimpleSurgery(format!(
            "pairs {pairs:?} create a loop or multiple edge"
        )));
    }
    Ok(SurgeryGraph { graph, kept })
}

/// Tree metric with `u_j` identified with `grandparent(v_j)` and the
/// push-forward of the uniform measure. `class[v]` gives the point of the
/// quotient holding tree vertex `v`.
pub fn identify_q(t: &PlaneTree, pairs: &[LeafPair]) -> Result<(FiniteMMSpace, Vec<usize>)> {
    let m = t.len();
    let mut glue = Vec::with_capacity(pairs.len());
    for &(u, v) in pairs {
        if !is_admissible(t, u, v) {
            return Err(Error::Precondition(format!("({u},{v}) is not admissible")));
        }
        glue.push((u, t.grandparent(v).expect("admissible")));
    }
    let tree_dist: Vec<Vec<f64>> = (0..m).map(|a| tree_distances(t, a)).collect();
    let keys: Vec<usize> = glue.iter().flat_map(|&(a, b)| [a, b]).collect();
    let kn = keys.len();
    let mut dk = vec![vec![0.0; kn]; kn];
    for i in 0..kn {
        for j in 0..kn {
            dk[i][j] = tree_dist[keys[i]][keys[j]];
        }
    }
    for j in 0..glue.len() {
        dk[2 * j][2 * j + 1] = 0.0;
        dk[2 * j + 1][2 * j] = 0.0;
    }
    floyd_warshall(&mut dk);

    let mut class = vec![usize::MAX; m];
    let mut reps = Vec::new();
    for v in 0..m {
        if class[v] != usize::MAX {
            continue;
        }
        let id = reps.len();
        reps.push(v);
        for w in v..m {
            if class[w] == usize::MAX && quotient(&tree_dist, &keys, &dk, v, w) == 0.0 {
                class[w] = id;
            }
        }
    }
    let n = reps.len();
    let mut mass = vec![0.0; n];
    for v in 0..m {
        mass[class[v]] += 1.0 / m as f64;
    }
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = quotient(&tree_dist, &keys, &dk, reps[i], reps[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    Ok((FiniteMMSpace::new(n, dist, mass)?, class))
}

fn quotient(tree_dist: &[Vec<f64>], keys: &[usize], dk: &[Vec<f64>], x: usize, y: usize) -> f64 {
    let mut best = tree_dist[x][y];
    for (i, &a) in keys.iter().enumerate() {
        for (j, &b) in keys.iter().enumerate() {
            best = best.min(tree_dist[x][a] + dk[i][j] + tree_dist[b][y]);
        }
    }
    best
}

pub(crate) fn floyd_warshall(d: &mut [Vec<f64>]) {
    let n = d.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
}

fn tree_distances(t: &PlaneTree, src: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; t.len()];
    dist[src] = 0.0;
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let nbrs = t.children(x).iter().map(|&c| c as usize).chain(t.parent(x));
        for y in nbrs {
            if dist[y].is_infinite() {
                dist[y] = dist[x] + 1.0;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Result of the depth-first exploration of a rooted graph: a plane tree,
/// the graph vertex behind each tree vertex (`None` for the leaves created
/// at surplus edges) and the pairs of created leaves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthFirstEncoding {
    pub tree: PlaneTree,
    pub vertex: Vec<Option<usize>>,
    pub pairs: Vec<LeafPair>,
}

/// Explores a connected simple graph from `root`, shuffling each vertex's
/// children uniformly. Every edge closing a cycle from the vertex being
/// explored to an already discovered vertex `y` is removed and replaced by a
/// leaf under each endpoint; such edges are handled in the depth-first order
/// of `y`.
pub fn depth_first_encoding<R: Rng + ?Sized>(
    g: &MultiGraph,
    root: usize,
    rng: &mut R,
) -> Result<DepthFirstEncoding> {
    let n = g.n();
    if root >= n {
        return Err(Error::Precondition(format!("root {root} not in graph")));
    }
    let adj = g.adjacency();
    // node-level plane tree under construction
    let mut node_parent: Vec<Option<usize>> = vec![None];
    let mut node_children: Vec<Vec<usize>> = vec![vec![]];
    let mut node_vertex: Vec<Option<usize>> = vec![Some(root)];
    let mut pending: Vec<Vec<usize>> = vec![vec![]];
    let mut vertex_node = vec![usize::MAX; n];
    vertex_node[root] = 0;
    let mut removed: std::collections::HashSet<(usize, usize)> = Default::default();
    let mut pairs = Vec::new();

    let key = |node: usize, parent: &[Option<usize>], children: &[Vec<usize>]| -> Vec<usize> {
        let mut path = Vec::new();
        let mut cur = node;
        while let Some(p) = parent[cur] {
            path.push(children[p].iter().position(|&c| c == cur).expect("child"));
            cur = p;
        }
        path.reverse();
        path
    };

    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        let Some(gx) = node_vertex[x] else { continue };
        let parent_vertex = node_parent[x].and_then(|p| node_vertex[p]);
        let mut fresh = Vec::new();
        let mut surplus = Vec::new();
        for &y in &adj[gx] {
            let y = y as usize;
            if Some(y) == parent_vertex || removed.contains(&(gx.min(y), gx.max(y))) {
                continue;
            }
            if vertex_node[y] == usize::MAX {
                fresh.push(y);
            } else {
                surplus.push(y);
            }
        }
        let mut keyed: Vec<(Vec<usize>, usize)> = surplus
            .into_iter()
            .map(|y| (key(vertex_node[y], &node_parent, &node_children), y))
            .collect();
        keyed.sort();
        let mut kids: Vec<usize> = std::mem::take(&mut pending[x]);
        for (_, y) in keyed {
            removed.insert((gx.min(y), gx.max(y)));
            let a = node_parent.len();
            let b = a + 1;
            for (node, owner) in [(a, x), (b, vertex_node[y])] {
                node_parent.push(Some(owner));
                node_children.push(vec![]);
                node_vertex.push(None);
                pending.push(vec![]);
                let _ = node;
            }
            kids.push(a);
            pending[vertex_node[y]].push(b);
            pairs.push((a, b));
        }
        for y in fresh {
            let id = node_parent.len();
            node_parent.push(Some(x));
            node_children.push(vec![]);
            node_vertex.push(Some(y));
            pending.push(vec![]);
            vertex_node[y] = id;
            kids.push(id);
        }
        kids.shuffle(rng);
        node_children[x] = kids.clone();
        for &c in kids.iter().rev() {
            stack.push(c);
        }
    }
    if vertex_node.contains(&usize::MAX) {
        return Err(Error::Precondition("graph is not connected".into()));
    }

    // relabel nodes in depth-first order
    let mut order = Vec::with_capacity(node_parent.len());
    let mut stack = vec![0usize];
    while let Some(x) = stack.pop() {
        order.push(x);
        for &c in node_children[x].iter().rev() {
            stack.push(c);
        }
    }
    let mut position = vec![0usize; order.len()];
    for (i, &x) in order.iter().enumerate() {
        position[x] = i;
    }
    let counts: Vec<u32> = order
        .iter()
        .map(|&x| node_children[x].len() as u32)
        .collect();
    let tree = PlaneTree::from_preorder_counts(&counts)?;
    let vertex = order.iter().map(|&x| node_vertex[x]).collect();
    let pairs = pairs
        .into_iter()
        .map(|(a, b)| (position[a], position[b]))
        .collect();
    Ok(DepthFirstEncoding {
        tree,
        vertex,
        pairs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plane_tree::enumerate_trees;
    use crate::rng::rng_from_seed;

    fn ecd(s: &[u64]) -> ChildSequence {
        ChildSequence::from_ecd(s)
    }

    #[test]
    fn cherry_has_no_pairs() {
        let t = PlaneTree::from_preorder_counts(&[2, 0, 0]).unwrap();
        assert!(admissible_pairs(&t).pairs.is_empty());
        assert_eq!(AdmissibleIndex::new(&t).total(), 0);
    }

    #[test]
    fn worked_ecd_has_two_pairs_in_total() {
        let trees = enumerate_trees(&ecd(&[2, 3, 1]), 100).unwrap();
        let total: u64 = trees.iter().map(|t| admissible_pairs(t).total()).sum();
        assert_eq!(total, 2);
        let carriers: Vec<_> = trees
            .iter()
            .filter(|t| admissible_pairs(t).total() == 1)
            .map(|t| t.preorder_counts())
            .collect();
        // (2,1) branches at the root, and (1,1) below one unary vertex
        assert!(carriers.contains(&vec![2, 1, 1, 0, 1, 0]));
        assert!(carriers.contains(&vec![1, 2, 1, 0, 1, 0]));
    }

    #[test]
    fn leaf_weight_on_worked_example() {
        let t = PlaneTree::from_preorder_counts(&[2, 1, 1, 0, 1, 0]).unwrap();
        let a = admissible_pairs(&t);
        assert_eq!(a.pairs, vec![(3, 5)]);
        let (u, _) = a.pairs[0];
        let idx = AdmissibleIndex::new(&t);
        assert_eq!(idx.f(&t, u), 1);
        let rt = crate::plane_tree::reduced_subtree(
            &t,
            &[u],
            &[],
            &[idx.f(&t, u) as f64],
            &[idx.line_measure(&t, u)],
        )
        .unwrap();
        let w = rt.tree().unwrap().leaf_weights[0];
        assert!((w - 1.0 / 6f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn surgery_on_unary_shape() {
        // ρ → a → (b → x, c → y): the pair joins b and c
        let t = PlaneTree::from_preorder_counts(&[1, 2, 1, 0, 1, 0]).unwrap();
        let a = admissible_pairs(&t);
        assert_eq!(a.pairs, vec![(3, 5)]);
        let g = identify_i(&t, &a.pairs).unwrap();
        assert_eq!(g.kept, vec![0, 1, 2, 4]);
        let mut edges = g.graph.normalized_edges();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (1, 2), (1, 3), (2, 3)]);
    }

    #[test]
    fn identify_i_rejects_parallel_sites() {
        // ρ → (a → (x1, x2), b → (y1, y2))
        let t = PlaneTree::from_preorder_counts(&[2, 2, 0, 0, 2, 0, 0]).unwrap();
        let a = admissible_pairs(&t);
        assert_eq!(a.total(), 4);
        let pairs = [(2, 5), (3, 6)];
        assert!(pairs.iter().all(|p| a.pairs.contains(p)));
        assert!(is_valid_pair_set(&t, &pairs, PairSetRule::DistinctLeaves));
        assert!(!is_valid_pair_set(&t, &pairs, PairSetRule::SimpleSurgery));
        assert!(matches!(
            identify_i(&t, &pairs),
            Err(Error::NonSimpleSurgery(_))
        ));
        let k0 = identify_i(&t, &[]).unwrap();
        assert_eq!(k0.graph.edges().len(), t.len() - 1);
    }

    #[test]
    fn quotient_distances_drop() {
        let t = PlaneTree::from_preorder_counts(&[1, 2, 1, 0, 1, 0]).unwrap();
        let (q, class) = identify_q(&t, &[(3, 5)]).unwrap();
        assert_eq!(q.len(), 5);
        // u = 3 sits at depth 3 and is glued to grandparent(5) = 1 at depth 1
        assert_eq!(q.dist(class[3], class[0]), 1.0);
        assert_eq!(class[3], class[1]);
        assert!((q.mass()[class[1]] - 2.0 / 6.0).abs() < 1e-12);
        let (q0, _) = identify_q(&t, &[]).unwrap();
        assert_eq!(q0.dist(3, 5), 4.0);
    }

    #[test]
    fn tilted_sampler_errors() {
        let mut rng = rng_from_seed(2);
        assert!(sample_tilted(&ecd(&[2, 3, 1]), 2, TiltOptions::default(), &mut rng).is_err());
        let r = sample_tilted(&ecd(&[2, 3, 1]), 0, TiltOptions::default(), &mut rng).unwrap();
        assert!(r.pairs.is_empty());
        let opts = TiltOptions {
            max_attempts: 50,
            ..Default::default()
        };
        assert!(matches!(
            sample_tilted(&ecd(&[2, 0, 1]), 1, opts, &mut rng),
            Err(Error::AttemptsExhausted(50))
        ));
    }

    #[test]
    fn tilted_sampler_hits_both_sites() {
        let mut rng = rng_from_seed(9);
        let mut seen = std::collections::HashMap::new();
        for _ in 0..400 {
            let r = sample_tilted(&ecd(&[2, 3, 1]), 1, TiltOptions::default(), &mut rng).unwrap();
            assert!(is_valid_pair_set(
                &r.tree,
                &r.pairs,
                PairSetRule::SimpleSurgery
            ));
            *seen.entry(r.tree.preorder_counts()).or_insert(0u32) += 1;
        }
        assert_eq!(seen.len(), 2);
        assert!(seen.values().all(|&c| c > 150));
        let pooled = sample_tilted(
            &ecd(&[2, 3, 1]),
            1,
            TiltOptions {
                method: TiltMethod::Pool,
                pool_size: 200,
                ..Default::default()
            },
            &mut rng,
        )
        .unwrap();
        assert!(pooled.acceptance_stats.approximate);
    }

    #[test]
    fn line_measure_is_a_probability() {
        let mut rng = rng_from_seed(4);
        let t = sample_tree(&ecd(&[17, 20, 10, 3]), &mut rng).unwrap();
        let idx = AdmissibleIndex::new(&t);
        for (u, f) in idx.f_values(&t) {
            let m: f64 = idx.line_measure(&t, u).iter().sum();
            if f > 0 {
                assert!((m - 1.0).abs() < 1e-12);
            } else {
                assert_eq!(m, 0.0);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn fast_pairs_match_definition(seed in 0u64..3000, ones in 0u64..8, twos in 0u64..6, threes in 0u64..4) {
            let cs = ChildSequence::from_ecd(&[1 + twos + 2 * threes, ones, twos, threes]);
            let mut rng = rng_from_seed(seed);
            let t = sample_tree(&cs, &mut rng).unwrap();
            let fast = admissible_pairs(&t);
            let slow = admissible_pairs_naive(&t);
            proptest::prop_assert_eq!(&fast, &slow);
            let idx = AdmissibleIndex::new(&t);
            proptest::prop_assert_eq!(idx.total(), fast.total());
            // containment bound |A(t)| ≤ Σ_u |B2(t,u)|
            let b2: usize = t.leaves().map(|u| crate::plane_tree::ancestral_sets(&t, u).b2.len()).sum();
            proptest::prop_assert!(fast.total() as usize <= b2);
            if let Some(p) = idx.sample_pair(&t, &mut rng) {
                proptest::prop_assert!(fast.pairs.contains(&p));
            }
            for k in 1..=2usize {
                let literal = count_pair_sets(&t, &fast.pairs, k, PairSetRule::DistinctLeaves);
                let simple = count_pair_sets(&t, &fast.pairs, k, PairSetRule::SimpleSurgery);
                let fact = if k == 2 { 2 } else { 1 };
                proptest::prop_assert!(literal * fact <= (fast.total() as u128).pow(k as u32));
                proptest::prop_assert!(simple <= literal);
            }
        }

        #[test]
        fn surgery_round_trips_through_exploration(seed in 0u64..2000, k in 1usize..3) {
            let cs = ChildSequence::from_ecd(&[7, 3, 2, 2]);
            let mut rng = rng_from_seed(seed);
            let r = sample_tilted(&cs, k, TiltOptions::default(), &mut rng).unwrap();
            let sg = identify_i(&r.tree, &r.pairs).unwrap();
            proptest::prop_assert!(sg.graph.is_connected());
            let enc = depth_first_encoding(&sg.graph, 0, &mut rng).unwrap();
            proptest::prop_assert_eq!(enc.tree.ecd(), cs.ecd());
            proptest::prop_assert_eq!(enc.pairs.len(), k);
            proptest::prop_assert!(is_valid_pair_set(&enc.tree, &enc.pairs, PairSetRule::SimpleSurgery));
            let mut sorted = enc.pairs.clone();
            sort_by_order(&enc.tree, &mut sorted);
            proptest::prop_assert_eq!(&sorted, &enc.pairs);
            // surgery on the re-encoding gives back the same graph
            let back = identify_i(&enc.tree, &enc.pairs).unwrap();
            let relabel: Vec<usize> = back.kept.iter().map(|&v| enc.vertex[v].unwrap()).collect();
            let mut a: Vec<(usize, usize)> = back.graph.normalized_edges().into_iter()
                .map(|(x, y)| { let (x, y) = (relabel[x], relabel[y]); (x.min(y), x.max(y)) }).collect();
            let mut b = sg.graph.normalized_edges();
            a.sort();
            b.sort();
            proptest::prop_assert_eq!(a, b);
        }
    }
}
