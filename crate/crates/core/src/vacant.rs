//! Random walk vacant sets on (multi)graphs and the critical window for
//! random regular graphs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::degrees::DegreeSequence;
use crate::error::{Error, Result};
use crate::graphs::{component_census, sample_cm, sample_simple, ComponentCensus, MultiGraph};

/// Walk of `⌊n u⌋` steps; `visited[start]` is set at time 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WalkTrace {
    pub steps: u64,
    pub start: usize,
    pub visited: Vec<bool>,
}

impl WalkTrace {
    pub fn vacant_count(&self) -> usize {
        self.visited.iter().filter(|&&v| !v).count()
    }
}

/// Simple random walk for `⌊n·u⌋` steps from a uniform vertex. Each step
/// follows a uniform incident half-edge, so a loop is taken with weight 2
/// and keeps the walk in place. A vertex of degree 0 holds the walk.
pub fn random_walk_vacant<R: Rng + ?Sized>(
    g: &MultiGraph,
    u: f64,
    rng: &mut R,
) -> Result<WalkTrace> {
    let n = g.n();
    if n == 0 {
        return Err(Error::Precondition("empty graph".into()));
    }
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::Precondition(format!("u = {u} must be ≥ 0")));
    }
    let steps = (n as f64 * u).floor() as u64;
    let adj = g.adjacency();
    let start = rng.gen_range(0..n);
    let mut visited = vec![false; n];
    visited[start] = true;
    let mut x = start;
    for _ in 0..steps {
        let nb = &adj[x];
        if nb.is_empty() {
            break;
        }
        x = nb[rng.gen_range(0..nb.len())] as usize;
        visited[x] = true;
    }
    Ok(WalkTrace {
        steps,
        start,
        visited,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VacantGraph {
    /// All `n` vertices; only edges with both ends vacant.
    pub graph: MultiGraph,
    /// `D^u`: vacant degrees, 0 for visited vertices.
    pub degrees: DegreeSequence,
}

pub fn vacant_graph(g: &MultiGraph, trace: &WalkTrace) -> Result<VacantGraph> {
    if trace.visited.len() != g.n() {
        return Err(Error::Precondition(
            "trace was not produced on this graph".into(),
        ));
    }
    let edges: Vec<(u32, u32)> = g
        .edges()
        .iter()
        .copied()
        .filter(|&(a, b)| !trace.visited[a as usize] && !trace.visited[b as usize])
        .collect();
    let graph = MultiGraph::new(g.n(), edges)?;
    let degrees = DegreeSequence::new(graph.degrees())?;
    Ok(VacantGraph { graph, degrees })
}

/// Critical constants for the vacant set of random `r`-regular graphs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacantCritical {
    pub r: u32,
    pub a0: f64,
    pub u_star: f64,
    pub lambda_vac: f64,
    pub p_vac: f64,
    /// pmf of `D_vac` on `0..=r`.
    pub d_vac: Vec<f64>,
}

impl VacantCritical {
    /// `u_n = u★ − a0 n^{-1/3}`.
    pub fn u_n(&self, n: usize) -> f64 {
        self.u_star - self.a0 / (n as f64).cbrt()
    }

    /// `(E D, E D², E D³)` of `D_vac`.
    pub fn moments(&self) -> (f64, f64, f64) {
        let m = |p: i32| {
            self.d_vac
                .iter()
                .enumerate()
                .map(|(i, &q)| (i as f64).powi(p) * q)
                .sum::<f64>()
        };
        (m(1), m(2), m(3))
    }
}

fn binomial_pmf(r: u32, q: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(r as usize + 1);
    let mut c = 1.0f64;
    for i in 0..=r {
        out.push(c * q.powi(i as i32) * (1.0 - q).powi((r - i) as i32));
        c = c * (r - i) as f64 / (i + 1) as f64;
    }
    out
}

pub fn vacant_critical(r: u32, a0: f64) -> Result<VacantCritical> {
    if r < 3 {
        return Err(Error::Precondition(format!("r = {r} < 3")));
    }
    let rf = r as f64;
    let l = (rf - 1.0).ln();
    let u_star = rf * (rf - 1.0) * l / ((rf - 2.0) * (rf - 2.0));
    let p_vac = (-rf * l / (rf - 2.0)).exp();
    let mut d_vac: Vec<f64> = binomial_pmf(r, 1.0 / (rf - 1.0))
        .into_iter()
        .map(|x| p_vac * x)
        .collect();
    d_vac[0] += 1.0 - p_vac;
    Ok(VacantCritical {
        r,
        a0,
        u_star,
        lambda_vac: a0 * (rf - 2.0) * (rf - 2.0) / (rf * (rf - 1.0)),
        p_vac,
        d_vac,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseModel {
    /// Configuration model multigraph.
    Cm,
    /// Uniform simple graph (rejection from the configuration model).
    Simple,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealedSample {
    pub u: f64,
    pub steps: u64,
    pub base_attempts: u64,
    pub census: ComponentCensus,
    /// Empirical pmf of `D^u` on `0..=r`.
    pub pmf: Vec<f64>,
}

impl AnnealedSample {
    /// `n^{1/3} Σ i(i−2) s_i / Σ i s_i`.
    pub fn lambda_estimate(&self, n: usize) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for (i, &p) in self.pmf.iter().enumerate() {
            let i = i as f64;
            num += i * (i - 2.0) * p;
            den += i * p;
        }
        if den == 0.0 {
            return f64::NAN;
        }
        (n as f64).cbrt() * num / den
    }
}

/// Fresh base graph, then a walk to `⌊n u⌋` on it.
pub fn annealed_pipeline<R: Rng + ?Sized>(
    r: u32,
    u: f64,
    n: usize,
    model: BaseModel,
    rng: &mut R,
) -> Result<AnnealedSample> {
    if (n as u64 * r as u64) % 2 == 1 {
        return Err(Error::OddDegreeSum(n as u64 * r as u64));
    }
    let d = DegreeSequence::regular(n, r)?;
    let (g, base_attempts) = match model {
        BaseModel::Cm => (sample_cm(&d, rng)?, 1),
        BaseModel::Simple => {
            let s = sample_simple(&d, rng, 100_000)?;
            (s.graph, s.attempts)
        }
    };
    let trace = random_walk_vacant(&g, u, rng)?;
    let vg = vacant_graph(&g, &trace)?;
    let mut pmf = vec![0.0; r as usize + 1];
    for &x in vg.degrees.as_slice() {
        pmf[x as usize] += 1.0;
    }
    pmf.iter_mut().for_each(|p| *p /= n as f64);
    Ok(AnnealedSample {
        u,
        steps: trace.steps,
        base_attempts,
        census: component_census(&vg.graph),
        pmf,
    })
}

/// Total variation distance between two pmfs on `0..`.
pub fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    let len = a.len().max(b.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..len).map(|i| (at(a, i) - at(b, i)).abs()).sum::<f64>()
}
