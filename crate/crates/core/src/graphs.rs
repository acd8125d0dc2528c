//! Multigraphs, the configuration model, simple and connected samplers, and
//! component censuses.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::ops::Index;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::degrees::{ecd_from_degrees, DegreeSequence};
use crate::error::{Error, Result};
use crate::plane_tree::factorial;
use crate::surgery::{identify_i, sample_tilted, TiltOptions};

/// Undirected multigraph on vertices `0..n`; loops are `(v, v)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

/// Compressed adjacency lists. A loop at `v` appears twice in `v`'s list.
#[derive(Debug, Clone)]
pub struct Adjacency {
    start: Vec<usize>,
    neighbors: Vec<u32>,
}

impl Index<usize> for Adjacency {
    type Output = [u32];

    fn index(&self, v: usize) -> &[u32] {
        &self.neighbors[self.start[v]..self.start[v + 1]]
    }
}

impl Adjacency {
    pub fn degree(&self, v: usize) -> usize {
        self.start[v + 1] - self.start[v]
    }
}

impl MultiGraph {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        if let Some(&(a, b)) = edges
            .iter()
            .find(|&&(a, b)| a as usize >= n || b as usize >= n)
        {
            return Err(Error::Precondition(format!(
                "edge ({a},{b}) out of range for {n} vertices"
            )));
        }
        Ok(MultiGraph { n, edges })
    }

    pub fn empty(n: usize) -> Self {
        MultiGraph { n, edges: vec![] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Edges as `(min, max)` pairs.
    pub fn normalized_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| (a.min(b) as usize, a.max(b) as usize))
            .collect()
    }

    /// Sorted normalized edge list; equal for equal multigraphs.
    pub fn canonical(&self) -> Vec<(usize, usize)> {
        let mut e = self.normalized_edges();
        e.sort_unstable();
        e
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut d = vec![0u32; self.n];
        for &(a, b) in &self.edges {
            d[a as usize] += 1;
            d[b as usize] += 1;
        }
        d
    }

    pub fn adjacency(&self) -> Adjacency {
        let deg = self.degrees();
        let mut start = Vec::with_capacity(self.n + 1);
        start.push(0);
        for &x in &deg {
            start.push(start.last().unwrap() + x as usize);
        }
        let mut fill = start[..self.n].to_vec();
        let mut neighbors = vec![0u32; start[self.n]];
        for &(a, b) in &self.edges {
            neighbors[fill[a as usize]] = b;
            fill[a as usize] += 1;
            neighbors[fill[b as usize]] = a;
            fill[b as usize] += 1;
        }
        Adjacency { start, neighbors }
    }

    pub fn is_simple(&self) -> bool {
        let e = self.canonical();
        e.iter().all(|&(a, b)| a != b) && e.windows(2).all(|w| w[0] != w[1])
    }

    /// Component id of every vertex, ids in order of smallest vertex.
    pub fn component_labels(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = next;
            queue.push_back(s);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if comp[y as usize] == usize::MAX {
                        comp[y as usize] = next;
                        queue.push_back(y as usize);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_labels().iter().all(|&c| c == 0)
    }

    /// Hop distances from `src`; `u32::MAX` when unreachable.
    pub fn bfs(&self, adj: &Adjacency, src: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(x) = queue.pop_front() {
            for &y in &adj[x] {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dist[x] + 1;
                    queue.push_back(y as usize);
                }
            }
        }
        dist
    }

    /// `u,v` lines with 1-based labels and a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v\n");
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{},{}", a + 1, b + 1);
        }
        out
    }

    /// `{n, edges}` with 1-based labels.
    pub fn to_json_value(&self) -> serde_json::Value {
        let edges: Vec<[u32; 2]> = self.edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect();
        serde_json::json!({ "n": self.n, "edges": edges })
    }
}

/// Configuration model: a uniform perfect matching of the half-edges.
pub fn sample_cm<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R) -> Result<MultiGraph> {
    let sum = d.sum();
    if sum % 2 == 1 {
        return Err(Error::OddDegreeSum(sum));
    }
    let mut half: Vec<u32> = Vec::with_capacity(sum as usize);
    for (v, &x) in d.as_slice().iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32, x as usize));
    }
    half.shuffle(rng);
    let edges = half.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    MultiGraph::new(d.len(), edges)
}

fn double_factorial_odd(l: u64) -> BigUint {
    // (l − 1)!! for even l
    let mut acc = BigUint::one();
    let mut i = 1u64;
    while i < l {
        acc *= i;
        i += 2;
    }
    acc
}

/// Exact probability that the configuration model produces `g`:
/// `∏ d_i! / ((ℓ − 1)!! ∏ 2^{x_ii} ∏_{i≤j} x_ij!)`.
pub fn cm_pmf(g: &MultiGraph) -> BigRational {
    let deg = g.degrees();
    let l: u64 = deg.iter().map(|&x| x as u64).sum();
    let mut mult: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    for e in g.normalized_edges() {
        *mult.entry(e).or_insert(0) += 1;
    }
    let num = deg
        .iter()
        .fold(BigUint::one(), |a, &x| a * factorial(x as u64));
    let mut den = double_factorial_odd(l);
    for (&(a, b), &x) in &mult {
        den *= factorial(x);
        if a == b {
            den *= BigUint::from(2u32).pow(x as u32);
        }
    }
    BigRational::new(num.into(), den.into())
}

/// Every perfect matching of the half-edges, as a multigraph (with
/// repetitions). Fails past `budget` matchings.
pub fn enumerate_pairings(d: &DegreeSequence, budget: u64) -> Result<Vec<MultiGraph>> {
    let sum = d.sum();
    if sum % 2 == 1 {
        return Err(Error::OddDegreeSum(sum));
    }
    let count = double_factorial_odd(sum);
    if count > BigUint::from(budget) {
        return Err(Error::BudgetExceeded(format!("{count} pairings")));
    }
    let mut half: Vec<u32> = Vec::new();
    for (v, &x) in d.as_slice().iter().enumerate() {
        half.extend(std::iter::repeat_n(v as u32, x as usize));
    }
    fn rec(rest: &mut Vec<u32>, cur: &mut Vec<(u32, u32)>, n: usize, out: &mut Vec<MultiGraph>) {
        if rest.is_empty() {
            out.push(MultiGraph::new(n, cur.clone()).expect("labels in range"));
            return;
        }
        let a = rest.remove(0);
        for i in 0..rest.len() {
            let b = rest.remove(i);
            cur.push((a, b));
            rec(rest, cur, n, out);
            cur.pop();
            rest.insert(i, b);
        }
        rest.insert(0, a);
    }
    let mut out = Vec::new();
    rec(&mut half, &mut Vec::new(), d.len(), &mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimpleSample {
    pub graph: MultiGraph,
    pub attempts: u64,
    pub acceptance_rate: f64,
}

/// Uniform simple graph with degrees `d`, by rejecting non-simple
/// configuration-model draws.
pub fn sample_simple<R: Rng + ?Sized>(
    d: &DegreeSequence,
    rng: &mut R,
    max_attempts: u64,
) -> Result<SimpleSample> {
    for attempt in 1..=max_attempts {
        let g = sample_cm(d, rng)?;
        if g.is_simple() {
            return Ok(SimpleSample {
                graph: g,
                attempts: attempt,
                acceptance_rate: 1.0 / attempt as f64,
            });
        }
    }
    Err(Error::AttemptsExhausted(max_attempts))
}

/// Uniform simple connected graph with degrees `d` and `k` surplus edges,
/// built from a tilted plane tree. Vertex `i` carries label `i + 1` of `d`.
pub fn sample_connected<R: Rng + ?Sized>(
    d: &DegreeSequence,
    k: usize,
    rng: &mut R,
) -> Result<MultiGraph> {
    sample_connected_with(d, k, TiltOptions::default(), rng)
}

pub fn sample_connected_with<R: Rng + ?Sized>(
    d: &DegreeSequence,
    k: usize,
    options: TiltOptions,
    rng: &mut R,
) -> Result<MultiGraph> {
    let enc = ecd_from_degrees(d, k)?;
    let counts = enc.children.counts().to_vec();
    let m_tilde = enc.graph_vertices();
    let tilted = sample_tilted(&enc.children, k, options, rng)?;
    let t = &tilted.tree;

    let mut in_pair = vec![false; t.len()];
    for &(u, v) in &tilted.pairs {
        in_pair[u] = true;
        in_pair[v] = true;
    }
    // positions 2..=m̃ grouped by children count, shuffled within groups
    let mut by_count: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (j, &c) in counts[..m_tilde - 1].iter().enumerate() {
        by_count.entry(c).or_default().push(j + 1);
    }
    for labels in by_count.values_mut() {
        labels.shuffle(rng);
    }
    let mut position = vec![usize::MAX; t.len()];
    for v in 0..t.len() {
        if in_pair[v] {
            continue;
        }
        let c = t.child_count(v) as u32;
        position[v] = by_count
            .get_mut(&c)
            .and_then(|l| l.pop())
            .ok_or_else(|| Error::Precondition("tree does not match the degrees".into()))?;
    }
    let sg = identify_i(t, &tilted.pairs)?;
    let vertex_of = |tree_vertex: usize| (enc.order[position[tree_vertex]] - 1) as u32;
    let mut edges: Vec<(u32, u32)> = sg
        .graph
        .edges()
        .iter()
        .map(|&(a, b)| {
            (
                vertex_of(sg.kept[a as usize]),
                vertex_of(sg.kept[b as usize]),
            )
        })
        .collect();
    edges.push(((enc.order[0] - 1) as u32, vertex_of(t.root())));
    MultiGraph::new(m_tilde, edges)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Component {
    /// Vertices in increasing order.
    pub vertices: Vec<usize>,
    pub size: usize,
    pub edges: usize,
    pub surplus: i64,
    pub sum_deg: u64,
    pub sum_deg_sq: u64,
    /// `degree_pmf[i]` = fraction of the component's vertices of degree `i`.
    pub degree_pmf: Vec<f64>,
}

/// Components sorted by decreasing size, ties by smallest vertex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentCensus {
    pub components: Vec<Component>,
}

impl ComponentCensus {
    pub fn largest_size(&self) -> usize {
        self.components.first().map_or(0, |c| c.size)
    }

    pub fn size(&self, i: usize) -> usize {
        self.components.get(i).map_or(0, |c| c.size)
    }

    /// Rows `{size, surplus, sum_deg_sq, degree_pmf}`.
    pub fn summary_json(&self, limit: usize) -> serde_json::Value {
        serde_json::Value::Array(
            self.components
                .iter()
                .take(limit)
                .map(|c| {
                    serde_json::json!({
                        "size": c.size,
                        "surplus": c.surplus,
                        "sum_deg_sq": c.sum_deg_sq,
                        "degree_pmf": c.degree_pmf,
                    })
                })
                .collect(),
        )
    }
}

pub fn component_census(g: &MultiGraph) -> ComponentCensus {
    let labels = g.component_labels();
    let count = labels.iter().copied().max().map_or(0, |x| x + 1);
    let deg = g.degrees();
    let mut comps: Vec<Component> = (0..count)
        .map(|_| Component {
            vertices: vec![],
            size: 0,
            edges: 0,
            surplus: 0,
            sum_deg: 0,
            sum_deg_sq: 0,
            degree_pmf: vec![],
        })
        .collect();
    for (v, &c) in labels.iter().enumerate() {
        let comp = &mut comps[c];
        comp.vertices.push(v);
        comp.size += 1;
        let x = deg[v] as u64;
        comp.sum_deg += x;
        comp.sum_deg_sq += x * x;
        if comp.degree_pmf.len() <= x as usize {
            comp.degree_pmf.resize(x as usize + 1, 0.0);
        }
        comp.degree_pmf[x as usize] += 1.0;
    }
    for &(a, _) in g.edges() {
        comps[labels[a as usize]].edges += 1;
    }
    for c in &mut comps {
        c.surplus = c.edges as i64 - (c.size as i64 - 1);
        let s = c.size as f64;
        c.degree_pmf.iter_mut().for_each(|p| *p /= s);
    }
    // labels are assigned in order of smallest vertex, so a stable sort
    // keeps that tie-break
    comps.sort_by_key(|c| std::cmp::Reverse(c.size));
    ComponentCensus { components: comps }
}
