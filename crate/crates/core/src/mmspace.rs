//! Finite metric measure spaces, correspondences, Gromov-weak polynomials
//! and exact Gromov-Hausdorff distance for tiny spaces.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::MultiGraph;
use crate::plane_tree::ReducedSubtree;
use crate::stats::{ks_two_sample, mean_se, KsResult};
use crate::surgery::floyd_warshall;

const MASS_TOLERANCE: f64 = 1e-9;

/// Finite metric space with a probability measure; `dist` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMMSpace {
    n: usize,
    dist: Vec<f64>,
    mass: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    root: Option<usize>,
}

impl FiniteMMSpace {
    /// Checks shape, symmetry, zero diagonal and total mass.
    pub fn new(n: usize, dist: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        if dist.len() != n * n || mass.len() != n || n == 0 {
            return Err(Error::Precondition(format!(
                "need an {n}×{n} matrix and {n} masses"
            )));
        }
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::Precondition(format!("d({i},{i}) ≠ 0")));
            }
            for j in 0..n {
                let d = dist[i * n + j];
                if !(d >= 0.0) || (d - dist[j * n + i]).abs() > 1e-12 {
                    return Err(Error::Precondition(format!("d({i},{j}) is not symmetric")));
                }
            }
        }
        if mass.iter().any(|&m| m < 0.0) {
            return Err(Error::Precondition("negative mass".into()));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::NotNormalized(total));
        }
        Ok(FiniteMMSpace {
            n,
            dist,
            mass,
            root: None,
        })
    }

    pub fn with_root(mut self, root: usize) -> Self {
        self.root = Some(root);
        self
    }

    /// Uniform measure on `n` points with distances from `d(i, j)`.
    pub fn from_fn(n: usize, d: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = d(i, j);
                }
            }
        }
        Self::new(n, dist, vec![1.0 / n as f64; n])
    }

    /// Graph distance and the uniform measure on the vertices of a
    /// connected graph.
    pub fn from_graph(g: &MultiGraph) -> Result<Self> {
        if !g.is_connected() {
            return Err(Error::Precondition("graph is not connected".into()));
        }
        let adj = g.adjacency();
        let n = g.n();
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(g.bfs(&adj, s).into_iter().map(|x| x as f64));
        }
        Self::new(n, dist, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn root(&self) -> Option<usize> {
        self.root
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) {
            return Err(Error::Precondition(format!(
                "scale {alpha} must be positive"
            )));
        }
        let mut out = self.clone();
        out.dist.iter_mut().for_each(|d| *d *= alpha);
        Ok(out)
    }

    /// Largest violation of the triangle inequality (0 for a metric).
    pub fn triangle_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                for k in 0..self.n {
                    worst = worst.max(self.dist(i, j) - self.dist(i, k) - self.dist(k, j));
                }
            }
        }
        worst
    }

    /// Pairwise distances of `l` i.i.d. points drawn from the measure,
    /// upper triangle in row order.
    pub fn sample_distances<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Vec<f64> {
        let w = WeightedIndex::new(&self.mass).expect("valid probability vector");
        let pts: Vec<usize> = (0..l).map(|_| w.sample(rng)).collect();
        upper_triangle(l, |i, j| self.dist(pts[i], pts[j]))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = self.dist.chunks(self.n).map(|r| r.to_vec()).collect();
        serde_json::json!({ "dist": rows, "mass": self.mass })
    }
}

pub(crate) fn upper_triangle(l: usize, d: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l * l.saturating_sub(1) / 2);
    for i in 0..l {
        for j in (i + 1)..l {
            out.push(d(i, j));
        }
    }
    out
}

/// A relation between the points of two spaces covering both sides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Correspondence {
    pub pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn new(pairs: Vec<(usize, usize)>, left: usize, right: usize) -> Result<Self> {
        let mut l = vec![false; left];
        let mut r = vec![false; right];
        for &(a, b) in &pairs {
            if a >= left || b >= right {
                return Err(Error::InvalidCorrespondence(format!(
                    "({a},{b}) out of range"
                )));
            }
            l[a] = true;
            r[b] = true;
        }
        if l.iter().chain(&r).any(|&x| !x) {
            return Err(Error::InvalidCorrespondence(
                "does not cover both sides".into(),
            ));
        }
        Ok(Correspondence { pairs })
    }

    pub fn full(left: usize, right: usize) -> Self {
        Correspondence {
            pairs: (0..left)
                .flat_map(|a| (0..right).map(move |b| (a, b)))
                .collect(),
        }
    }
}

/// `sup |d_X(x, x') − d_Y(y, y')|` over pairs in the relation.
pub fn distortion(c: &Correspondence, x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<f64> {
    let c = Correspondence::new(c.pairs.clone(), x.len(), y.len())?;
    let mut worst = 0.0f64;
    for &(a, b) in &c.pairs {
        for &(a2, b2) in &c.pairs {
            worst = worst.max((x.dist(a, a2) - y.dist(b, b2)).abs());
        }
    }
    Ok(worst)
}

/// Exact Gromov-Hausdorff distance: half the least distortion over all
/// correspondences. Needs `|X|·|Y| ≤ 16`.
pub fn gh_exact(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<f64> {
    let (nx, ny) = (x.len(), y.len());
    let cells = nx * ny;
    if cells > 16 {
        return Err(Error::BudgetExceeded(format!("{nx}×{ny} exceeds 16 cells")));
    }
    let all: Vec<(usize, usize)> = (0..nx).flat_map(|a| (0..ny).map(move |b| (a, b))).collect();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << cells) {
        let mut left = 0u32;
        let mut right = 0u32;
        for (bit, &(a, b)) in all.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                left |= 1 << a;
                right |= 1 << b;
            }
        }
        if left.count_ones() as usize != nx || right.count_ones() as usize != ny {
            continue;
        }
        let mut worst = 0.0f64;
        for (i, &(a, b)) in all.iter().enumerate() {
            if mask >> i & 1 == 0 {
                continue;
            }
            for (j, &(a2, b2)) in all.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    worst = worst.max((x.dist(a, a2) - y.dist(b, b2)).abs());
                }
            }
            if worst >= best {
                break;
            }
        }
        best = best.min(worst);
    }
    Ok(best / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub standard_error: f64,
    pub exact: bool,
}

/// `Φ(X) = ∫ φ(D(x_1..x_l)) μ^{⊗l}`, where `φ` receives the `l × l`
/// distance matrix (row-major). Exact when `|X|^l ≤ exact_limit`, else a
/// Monte Carlo mean over `mc_samples` tuples.
pub fn polynomial<R: Rng + ?Sized>(
    x: &FiniteMMSpace,
    phi: &dyn Fn(&[f64]) -> f64,
    l: usize,
    exact_limit: usize,
    mc_samples: usize,
    rng: &mut R,
) -> Estimate {
    let n = x.len();
    let mut matrix = vec![0.0; l * l];
    let fill = |pts: &[usize], matrix: &mut [f64]| {
        for i in 0..l {
            for j in 0..l {
                matrix[i * l + j] = x.dist(pts[i], pts[j]);
            }
        }
    };
    let total = (n as f64).powi(l as i32);
    if total <= exact_limit as f64 {
        let mut pts = vec![0usize; l];
        let mut acc = 0.0;
        loop {
            let w: f64 = pts.iter().map(|&p| x.mass[p]).product();
            if w > 0.0 {
                fill(&pts, &mut matrix);
                acc += w * phi(&matrix);
            }
            let mut i = 0;
            while i < l {
                pts[i] += 1;
                if pts[i] < n {
                    break;
                }
                pts[i] = 0;
                i += 1;
            }
            if i == l {
                break;
            }
        }
        return Estimate {
            value: acc,
            standard_error: 0.0,
            exact: true,
        };
    }
    let w = WeightedIndex::new(&x.mass).expect("valid probability vector");
    let values: Vec<f64> = (0..mc_samples)
        .map(|_| {
            let pts: Vec<usize> = (0..l).map(|_| w.sample(rng)).collect();
            fill(&pts, &mut matrix);
            phi(&matrix)
        })
        .collect();
    let (value, standard_error) = mean_se(&values);
    Estimate {
        value,
        standard_error,
        exact: false,
    }
}

/// Expectation of `φ` on the distances between the last `ℓ` leaves of a
/// reduced tree after gluing each of the first `k` leaves to a point drawn
/// from its root path measure. `φ` gets the `ℓ × ℓ` matrix; `∂` gives 0.
pub fn g_phi_k<R: Rng + ?Sized>(
    rt: &ReducedSubtree,
    k: usize,
    phi: &dyn Fn(&[f64]) -> f64,
    mc_samples: usize,
    rng: &mut R,
) -> Result<f64> {
    let Some(t) = rt.tree() else { return Ok(0.0) };
    let j = t.leaf_count();
    if k > j {
        return Err(Error::Precondition(format!("k = {k} exceeds {j} leaves")));
    }
    let l = j - k;
    let samplers: Vec<(Vec<f64>, WeightedIndex<f64>)> = t.path_measures[..k]
        .iter()
        .map(|atoms| {
            let pos = atoms.iter().map(|a| a.0).collect();
            let w = WeightedIndex::new(atoms.iter().map(|a| a.1))
                .map_err(|e| Error::Precondition(e.to_string()))?;
            Ok((pos, w))
        })
        .collect::<Result<_>>()?;
    let runs = if k == 0 { 1 } else { mc_samples.max(1) };
    let mut acc = 0.0;
    // points: (leaf index, distance from root)
    let mut pts: Vec<(usize, f64)> = Vec::with_capacity(l + 2 * k);
    let mut matrix = vec![0.0; l * l];
    for _ in 0..runs {
        pts.clear();
        pts.extend((k..j).map(|i| (i, t.leaf_depth(i))));
        for (i, (pos, w)) in samplers.iter().enumerate() {
            pts.push((i, t.leaf_depth(i)));
            pts.push((i, pos[w.sample(rng)]));
        }
        let np = pts.len();
        let mut d = vec![vec![0.0; np]; np];
        for a in 0..np {
            for b in 0..np {
                d[a][b] = t.path_point_distance(pts[a].0, pts[a].1, pts[b].0, pts[b].1);
            }
        }
        for i in 0..k {
            let (a, b) = (l + 2 * i, l + 2 * i + 1);
            d[a][b] = 0.0;
            d[b][a] = 0.0;
        }
        floyd_warshall(&mut d);
        for a in 0..l {
            for b in 0..l {
                matrix[a * l + b] = d[a][b];
            }
        }
        acc += phi(&matrix);
    }
    Ok(acc / runs as f64)
}

/// Entrywise comparison of sorted distance vectors from two samplers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceLawComparison {
    pub l: usize,
    pub reps: usize,
    /// KS result per entry of the sorted upper triangle.
    pub entries: Vec<(f64, f64)>,
    pub min_p_value: f64,
    pub max_statistic: f64,
}

impl DistanceLawComparison {
    pub fn passes(&self, threshold: f64) -> bool {
        self.min_p_value > threshold
    }
}

/// Sorts each replica's `l(l−1)/2` distances and runs a KS test per
/// sorted position between the two samples.
pub fn compare_distance_laws(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<DistanceLawComparison> {
    let width = a.first().map_or(0, |r| r.len());
    if width == 0 || a.iter().chain(b).any(|r| r.len() != width) {
        return Err(Error::Precondition(
            "distance vectors must share one length".into(),
        ));
    }
    let l = ((1.0 + (1.0 + 8.0 * width as f64).sqrt()) / 2.0).round() as usize;
    let sorted = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                let mut r = r.clone();
                r.sort_by(f64::total_cmp);
                r
            })
            .collect()
    };
    let (sa, sb) = (sorted(a), sorted(b));
    let entries: Vec<KsResult> = (0..width)
        .map(|e| {
            let xa: Vec<f64> = sa.iter().map(|r| r[e]).collect();
            let xb: Vec<f64> = sb.iter().map(|r| r[e]).collect();
            ks_two_sample(&xa, &xb)
        })
        .collect();
    Ok(DistanceLawComparison {
        l,
        reps: a.len().min(b.len()),
        min_p_value: entries.iter().map(|r| r.p_value).fold(1.0, f64::min),
        max_statistic: entries.iter().map(|r| r.statistic).fold(0.0, f64::max),
        entries: entries.iter().map(|r| (r.statistic, r.p_value)).collect(),
    })
}

/// Draws `reps` distance vectors from each sampler (`l` points per draw)
/// and compares them.
pub fn two_sample_distance_law<R: Rng + ?Sized>(
    mut sample_a: impl FnMut(&mut R) -> Result<Vec<f64>>,
    mut sample_b: impl FnMut(&mut R) -> Result<Vec<f64>>,
    reps: usize,
    rng: &mut R,
) -> Result<DistanceLawComparison> {
    let a = (0..reps)
        .map(|_| sample_a(rng))
        .collect::<Result<Vec<_>>>()?;
    let b = (0..reps)
        .map(|_| sample_b(rng))
        .collect::<Result<Vec<_>>>()?;
    compare_distance_laws(&a, &b)
}

/// `inf_x μ(B(x, δ))`, the smallest mass of a closed δ-ball.
pub fn kappa_delta(x: &FiniteMMSpace, delta: f64) -> f64 {
    (0..x.len())
        .map(|i| {
            (0..x.len())
                .filter(|&j| x.dist(i, j) <= delta)
                .map(|j| x.mass[j])
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}
