//! Grid versions of the continuum objects: Brownian excursions and their
//! area tilts, the reflected drifted Brownian motion with its marked
//! excursions, and the glued trees `M^(k)`, `M^D(λ)`, `M^vac(a0)`.
//!
//! Excursions are elevated Dyck paths: a uniform Dyck path with `N − 1`
//! up-steps is lifted by one and framed by an up and a down step, giving
//! `2N` steps on `[0, 1]` scaled by `1/√(2N)`. The uniform Dyck path comes
//! from a uniform arrangement of `N − 1` ups and `N` downs rotated after its
//! first minimum (cyclic lemma).

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rand::RngCore;
use rand_distr::{Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::degrees::DriftParams;
use crate::error::{Error, Result};
use crate::mmspace::{Estimate, FiniteMMSpace};
use crate::rng::replica_rng;
use crate::stats::mean_se;
use crate::surgery::{floyd_warshall, AcceptanceStats, TiltMethod};
use crate::vacant::vacant_critical;

/// Default cap on the area in the tilt rejection step. `P(∫e > 2)` is
/// below `1e-10`, so the truncation is invisible at any feasible sample size.
pub const DEFAULT_AREA_CAP: f64 = 2.0;

/// Heights on the grid `0, dt, 2dt, …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExcursionPath {
    values: Vec<f64>,
    dt: f64,
}

impl ExcursionPath {
    pub fn new(values: Vec<f64>, dt: f64) -> Result<Self> {
        if values.len() < 2 || !(dt > 0.0) || values.iter().any(|&v| !(v >= 0.0)) {
            return Err(Error::Precondition(
                "an excursion needs two or more nonnegative values".into(),
            ));
        }
        Ok(ExcursionPath { values, dt })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.dt
    }

    /// Trapezoid rule.
    pub fn area(&self) -> f64 {
        let v = &self.values;
        let inner: f64 = v[1..v.len() - 1].iter().sum();
        (inner + 0.5 * (v[0] + v[v.len() - 1])) * self.dt
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Draws the next step of a uniform arrangement with `up` ups and `down`
/// downs remaining; true for an up-step.
#[inline(always)]
fn next_is_up<R: RngCore + ?Sized>(rng: &mut R, up: u64, down: u64) -> u64 {
    let x = rng.next_u64() as u128;
    (((x * (up + down) as u128) >> 64) < up as u128) as u64
}

fn check_grid(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Precondition(format!("grid size {n} < 2")));
    }
    Ok(())
}

/// Uniform elevated Dyck path with `2n` steps, as integer heights.
fn dyck_heights<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Vec<u32> {
    let len = 2 * n - 1;
    let mut steps = vec![false; len];
    let (mut up, mut down) = ((n - 1) as u64, n as u64);
    let (mut s, mut min, mut tau) = (0i64, 0i64, 0usize);
    for (j, step) in steps.iter_mut().enumerate() {
        let u = next_is_up(rng, up, down);
        up -= u;
        down -= 1 - u;
        s += 2 * u as i64 - 1;
        *step = u == 1;
        if s < min {
            min = s;
            tau = j + 1;
        }
    }
    let mut h = Vec::with_capacity(2 * n + 1);
    h.push(0);
    let mut level = 1i64;
    h.push(1);
    // rotated steps minus the final down-step, which is the frame's last step
    for j in 0..len - 1 {
        level += if steps[(tau + j) % len] { 1 } else { -1 };
        h.push(level as u32);
    }
    h.push(0);
    debug_assert_eq!(level, 1);
    h
}

/// Discrete Brownian excursion on `[0, 1]` with `2n` steps.
pub fn sample_excursion<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<ExcursionPath> {
    check_grid(n)?;
    let scale = 1.0 / ((2 * n) as f64).sqrt();
    let values = dyck_heights(n, rng)
        .into_iter()
        .map(|x| x as f64 * scale)
        .collect();
    ExcursionPath::new(values, 1.0 / (2 * n) as f64)
}

/// `∫e` for the excursion [`sample_excursion`] would return from the same
/// generator state, without storing the path.
pub fn excursion_area<R: RngCore + ?Sized>(n: usize, rng: &mut R) -> Result<f64> {
    check_grid(n)?;
    let len = 2 * n - 1;
    let (mut up, mut down) = ((n - 1) as u64, n as u64);
    let (mut s, mut min, mut tau) = (0i64, 0i64, 0i64);
    let mut prefix = 0i64;
    for j in 0..len {
        let u = next_is_up(rng, up, down);
        up -= u;
        down -= 1 - u;
        s += 2 * u as i64 - 1;
        prefix += s;
        if s < min {
            min = s;
            tau = j as i64 + 1;
        }
    }
    // Σ of the rotated partial sums over 0..L, minus the final value −1
    let dyck = prefix - len as i64 * min - tau + 1;
    let total = dyck + len as i64;
    let m = (2 * n) as f64;
    Ok(total as f64 / (m * m.sqrt()))
}

/// Rejection or pool settings for area-tilted excursions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcursionTilt {
    pub method: TiltMethod,
    pub area_cap: f64,
    pub max_attempts: u64,
    pub pool_size: usize,
}

impl Default for ExcursionTilt {
    fn default() -> Self {
        ExcursionTilt {
            method: TiltMethod::Rejection,
            area_cap: DEFAULT_AREA_CAP,
            max_attempts: 10_000_000,
            pool_size: 2_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedExcursion {
    pub path: ExcursionPath,
    pub method: TiltMethod,
    pub acceptance_stats: AcceptanceStats,
}

/// Excursion with law `∝ (∫h)^k ν(dh)`. Rejection accepts a plain
/// excursion with probability `min(1, ∫h / cap)^k`.
pub fn sample_tilted_excursion<R: RngCore + ?Sized>(
    k: u32,
    n: usize,
    options: ExcursionTilt,
    rng: &mut R,
) -> Result<TiltedExcursion> {
    check_grid(n)?;
    let stats = |attempts: u64, ess: Option<f64>, approximate: bool| AcceptanceStats {
        attempts,
        accepted: 1,
        acceptance_rate: 1.0 / attempts.max(1) as f64,
        effective_sample_size: ess,
        approximate,
    };
    if k == 0 {
        return Ok(TiltedExcursion {
            path: sample_excursion(n, rng)?,
            method: options.method,
            acceptance_stats: stats(1, None, false),
        });
    }
    match options.method {
        TiltMethod::Rejection => {
            for attempt in 1..=options.max_attempts {
                let path = sample_excursion(n, rng)?;
                let ratio = (path.area() / options.area_cap).min(1.0);
                if rng.gen::<f64>() < ratio.powi(k as i32) {
                    return Ok(TiltedExcursion {
                        path,
                        method: TiltMethod::Rejection,
                        acceptance_stats: stats(attempt, None, false),
                    });
                }
            }
            Err(Error::AttemptsExhausted(options.max_attempts))
        }
        TiltMethod::Pool => {
            let size = options.pool_size.max(1);
            let pool = (0..size)
                .map(|_| sample_excursion(n, rng))
                .collect::<Result<Vec<_>>>()?;
            let w: Vec<f64> = pool.iter().map(|p| p.area().powi(k as i32)).collect();
            let sum: f64 = w.iter().sum();
            let sq: f64 = w.iter().map(|x| x * x).sum();
            let pick = WeightedIndex::new(&w)
                .map_err(|e| Error::Precondition(e.to_string()))?
                .sample(rng);
            Ok(TiltedExcursion {
                path: pool.into_iter().nth(pick).expect("index in pool"),
                method: TiltMethod::Pool,
                acceptance_stats: stats(size as u64, Some(sum * sum / sq), true),
            })
        }
    }
}

const AREA_CHUNK: usize = 4096;

/// Monte Carlo `E[(∫e)^k]` on grid `n`. Chunk `c` uses replica stream `c`
/// of `seed`, so the estimate does not depend on the thread count.
pub fn area_moment(k: u32, n: usize, samples: usize, seed: u64) -> Result<Estimate> {
    if k == 0 {
        return Ok(Estimate {
            value: 1.0,
            standard_error: 0.0,
            exact: true,
        });
    }
    check_grid(n)?;
    if samples < 2 {
        return Err(Error::Precondition("need at least two samples".into()));
    }
    let chunks = samples.div_ceil(AREA_CHUNK);
    let values: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = replica_rng(seed, c as u64);
            let len = AREA_CHUNK.min(samples - c * AREA_CHUNK);
            (0..len)
                .map(|_| excursion_area(n, &mut rng).map(|a| a.powi(k as i32)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?
        .concat();
    let (value, standard_error) = mean_se(&values);
    Ok(Estimate {
        value,
        standard_error,
        exact: false,
    })
}

/// Sparse table for range minima.
#[derive(Debug, Clone)]
pub struct RangeMin {
    levels: Vec<Vec<f64>>,
}

impl RangeMin {
    pub fn new(values: &[f64]) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while 2 * width <= values.len() {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=values.len() - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        RangeMin { levels }
    }

    /// Minimum over the closed range between `a` and `b`, in either order.
    pub fn min(&self, a: usize, b: usize) -> f64 {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let span = hi - lo + 1;
        let level = (usize::BITS - 1 - span.leading_zeros()) as usize;
        let row = &self.levels[level];
        row[lo].min(row[hi + 1 - (1 << level)])
    }
}

/// A point of a contour tree: a grid time and a height at or below the
/// height at that time, i.e. a point on the root path of the time's vertex.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TreePoint {
    pub time: usize,
    pub height: f64,
}

/// The real tree coded by a contour `h` with `k` identifications.
#[derive(Debug, Clone)]
pub struct GluedTree {
    heights: Vec<f64>,
    rmq: RangeMin,
    glue: Vec<(TreePoint, TreePoint)>,
    /// Shortest paths between glue endpoints, `2k × 2k`.
    closure: Vec<Vec<f64>>,
    scale: f64,
}

impl GluedTree {
    pub fn new(heights: Vec<f64>, glue: Vec<(TreePoint, TreePoint)>) -> Result<Self> {
        if heights.len() < 2 {
            return Err(Error::Precondition(
                "contour needs two or more values".into(),
            ));
        }
        for &(a, b) in &glue {
            for p in [a, b] {
                if p.time >= heights.len() || p.height > heights[p.time] + 1e-12 || p.height < 0.0 {
                    return Err(Error::Precondition(format!("{p:?} is not on the tree")));
                }
            }
        }
        let rmq = RangeMin::new(&heights);
        let mut t = GluedTree {
            heights,
            rmq,
            glue,
            closure: vec![],
            scale: 1.0,
        };
        let ends: Vec<TreePoint> = t.glue.iter().flat_map(|&(a, b)| [a, b]).collect();
        let mut c: Vec<Vec<f64>> = ends
            .iter()
            .map(|&a| ends.iter().map(|&b| t.tree_distance(a, b)).collect())
            .collect();
        for i in 0..t.glue.len() {
            c[2 * i][2 * i + 1] = 0.0;
            c[2 * i + 1][2 * i] = 0.0;
        }
        floyd_warshall(&mut c);
        t.closure = c;
        Ok(t)
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn glue(&self) -> &[(TreePoint, TreePoint)] {
        &self.glue
    }

    pub fn scale_factor(&self) -> f64 {
        self.scale
    }

    /// Multiplies every distance by `alpha`.
    pub fn scaled(mut self, alpha: f64) -> Self {
        self.scale *= alpha;
        self
    }

    /// Number of grid cells; the measure is uniform over times `0..cells`.
    pub fn cells(&self) -> usize {
        self.heights.len() - 1
    }

    pub fn point(&self, time: usize) -> TreePoint {
        TreePoint {
            time,
            height: self.heights[time],
        }
    }

    /// Unscaled distance in the tree before gluing:
    /// `y + z − 2 min(y, z, inf h)`.
    pub fn tree_distance(&self, a: TreePoint, b: TreePoint) -> f64 {
        let m = self.rmq.min(a.time, b.time).min(a.height).min(b.height);
        (a.height + b.height - 2.0 * m).max(0.0)
    }

    /// Quotient distance, scaled.
    pub fn distance(&self, a: TreePoint, b: TreePoint) -> f64 {
        let mut best = self.tree_distance(a, b);
        if !self.glue.is_empty() {
            let ends: Vec<TreePoint> = self.glue.iter().flat_map(|&(x, y)| [x, y]).collect();
            let da: Vec<f64> = ends.iter().map(|&p| self.tree_distance(a, p)).collect();
            let db: Vec<f64> = ends.iter().map(|&p| self.tree_distance(p, b)).collect();
            for (p, &x) in da.iter().enumerate() {
                for (q, &y) in db.iter().enumerate() {
                    best = best.min(x + self.closure[p][q] + y);
                }
            }
        }
        best * self.scale
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> TreePoint {
        self.point(rng.gen_range(0..self.cells()))
    }

    /// Distances between `l` i.i.d. points of the measure, upper triangle
    /// in row order.
    pub fn sample_distances<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Vec<f64> {
        let pts: Vec<TreePoint> = (0..l).map(|_| self.sample_point(rng)).collect();
        let mut out = Vec::with_capacity(l * (l.saturating_sub(1)) / 2);
        for i in 0..l {
            for j in i + 1..l {
                out.push(self.distance(pts[i], pts[j]));
            }
        }
        out
    }

    /// Finite space on the root plus `points` uniform samples, each of mass
    /// `1/points`; the root (index 0) has mass 0.
    pub fn to_mmspace<R: Rng + ?Sized>(&self, points: usize, rng: &mut R) -> Result<FiniteMMSpace> {
        if points == 0 {
            return Err(Error::Precondition("need at least one point".into()));
        }
        let mut pts = vec![self.point(0)];
        pts.extend((0..points).map(|_| self.sample_point(rng)));
        let mut mass = vec![1.0 / points as f64; points + 1];
        mass[0] = 0.0;
        let n = pts.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distance(pts[i], pts[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(FiniteMMSpace::new(n, dist, mass)?.with_root(0))
    }

    /// First Betti number of the discrete contour tree plus one edge per
    /// identification (each glue point rounded down to a tree vertex on
    /// its root path).
    pub fn betti_number(&self) -> usize {
        // vertex ids from the contour: equal consecutive heights are one vertex
        let h = &self.heights;
        let mut vertex = vec![0usize; h.len()];
        let mut stack = vec![0usize];
        let mut parent = vec![usize::MAX];
        let mut next = 1;
        for t in 1..h.len() {
            if h[t] > h[t - 1] {
                parent.push(*stack.last().unwrap());
                stack.push(next);
                next += 1;
            } else if h[t] < h[t - 1] && stack.len() > 1 {
                stack.pop();
            }
            vertex[t] = *stack.last().unwrap();
        }
        let ancestor_at = |p: TreePoint| {
            // latest time at or before p.time whose height is ≤ p.height
            let mut t = p.time;
            while t > 0 && h[t] > p.height + 1e-12 {
                t -= 1;
            }
            vertex[t]
        };
        let mut uf: Vec<usize> = (0..next).collect();
        fn find(uf: &mut [usize], mut x: usize) -> usize {
            while uf[x] != x {
                uf[x] = uf[uf[x]];
                x = uf[x];
            }
            x
        }
        let mut cycles = 0;
        let mut edges: Vec<(usize, usize)> = (1..next).map(|v| (parent[v], v)).collect();
        edges.extend(
            self.glue
                .iter()
                .map(|&(a, b)| (ancestor_at(a), ancestor_at(b))),
        );
        for (a, b) in edges {
            let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
            if ra == rb {
                cycles += 1;
            } else {
                uf[ra] = rb;
            }
        }
        cycles
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "construction", rename_all = "lowercase")]
pub enum Construction {
    Mk { k: u32 },
    Md { index: usize, xi: f64, surplus: u64 },
}

/// One limit component on a grid.
#[derive(Debug, Clone)]
pub struct LimitSpaceSample {
    pub construction: Construction,
    pub grid: usize,
    pub space: GluedTree,
    pub acceptance_stats: AcceptanceStats,
}

impl LimitSpaceSample {
    pub fn sample_distances<R: Rng + ?Sized>(&self, l: usize, rng: &mut R) -> Vec<f64> {
        self.space.sample_distances(l, rng)
    }

    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "construction": self.construction,
            "grid": self.grid,
            "scale": self.space.scale_factor(),
            "glue": self.space.glue().len(),
            "acceptance_stats": self.acceptance_stats,
        })
    }
}

/// `M^(k)`: the tree of `2ẽ_(k)` with `k` height-biased points glued to
/// uniform points of their root paths.
pub fn build_mk<R: RngCore + ?Sized>(
    k: u32,
    n: usize,
    options: ExcursionTilt,
    rng: &mut R,
) -> Result<LimitSpaceSample> {
    let tilted = sample_tilted_excursion(k, n, options, rng)?;
    let heights: Vec<f64> = tilted.path.values().iter().map(|&x| 2.0 * x).collect();
    let mut glue = Vec::with_capacity(k as usize);
    if k > 0 {
        let w = WeightedIndex::new(&heights).map_err(|e| Error::Precondition(e.to_string()))?;
        for _ in 0..k {
            let time = w.sample(rng);
            let x = TreePoint {
                time,
                height: heights[time],
            };
            let y = TreePoint {
                time,
                height: rng.gen::<f64>() * heights[time],
            };
            glue.push((x, y));
        }
    }
    Ok(LimitSpaceSample {
        construction: Construction::Mk { k },
        grid: n,
        space: GluedTree::new(heights, glue)?,
        acceptance_stats: tilted.acceptance_stats,
    })
}

/// One excursion of the reflected process above zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkedExcursion {
    pub start: f64,
    pub end: f64,
    pub length: f64,
    pub area: f64,
    pub marks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkedExcursionList {
    /// Completed excursions by decreasing length.
    pub excursions: Vec<MarkedExcursion>,
    pub horizon: f64,
    pub dt: f64,
    /// Length of the excursion still open at the horizon.
    pub open_length: f64,
}

impl MarkedExcursionList {
    pub fn largest_length(&self) -> f64 {
        self.excursions.first().map_or(0.0, |e| e.length)
    }
}

/// Euler path of `W^{μ,λ}` reflected at its running minimum, on `steps`
/// cells of `[0, horizon]`.
pub fn reflected_path<R: Rng + ?Sized>(
    mu: DriftParams,
    lambda: f64,
    horizon: f64,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_drift(mu)?;
    if !(horizon > 0.0) || steps == 0 {
        return Err(Error::Precondition(
            "need a positive horizon and steps".into(),
        ));
    }
    let dt = horizon / steps as f64;
    let sd = (mu.eta).sqrt() / mu.alpha * dt.sqrt();
    let curv = mu.eta / (2.0 * mu.alpha.powi(3));
    let mut out = Vec::with_capacity(steps + 1);
    let (mut w, mut min) = (0.0f64, 0.0f64);
    out.push(0.0);
    for i in 0..steps {
        let (s0, s1) = (i as f64 * dt, (i + 1) as f64 * dt);
        let z: f64 = rng.sample(StandardNormal);
        w += sd * z + lambda * dt - curv * (s1 * s1 - s0 * s0);
        min = min.min(w);
        out.push(w - min);
    }
    Ok(out)
}

fn check_drift(mu: DriftParams) -> Result<()> {
    if !(mu.alpha > 0.0 && mu.eta > 0.0 && mu.beta > 0.0) {
        return Err(Error::Precondition(format!("need α, η, β > 0, got {mu:?}")));
    }
    Ok(())
}

/// Splits a reflected path into excursions between zeros and marks each
/// with `Poisson(β · area)` points.
pub fn excursions_of<R: Rng + ?Sized>(
    path: &[f64],
    dt: f64,
    beta: f64,
    rng: &mut R,
) -> MarkedExcursionList {
    let mut excursions = Vec::new();
    let mut last_zero = 0usize;
    let mut area = 0.0;
    for (j, &x) in path.iter().enumerate().skip(1) {
        if x <= 0.0 {
            if j > last_zero + 1 {
                let mean = beta * area;
                let marks = if mean > 0.0 {
                    Poisson::new(mean)
                        .map(|p| p.sample(rng) as u64)
                        .unwrap_or(0)
                } else {
                    0
                };
                excursions.push(MarkedExcursion {
                    start: last_zero as f64 * dt,
                    end: j as f64 * dt,
                    length: (j - last_zero) as f64 * dt,
                    area,
                    marks,
                });
            }
            last_zero = j;
            area = 0.0;
        } else {
            area += x * dt;
        }
    }
    excursions.sort_by(|a, b| {
        b.length
            .total_cmp(&a.length)
            .then(a.start.total_cmp(&b.start))
    });
    MarkedExcursionList {
        excursions,
        horizon: (path.len() - 1) as f64 * dt,
        dt,
        open_length: (path.len() - 1 - last_zero) as f64 * dt,
    }
}

/// Settings for [`reflected_process`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedOptions {
    pub horizon: f64,
    pub steps_per_unit: usize,
    /// Doublings of the horizon allowed when the open excursion at the
    /// horizon is at least as long as the largest completed one.
    pub max_doublings: u32,
}

impl Default for ReflectedOptions {
    fn default() -> Self {
        ReflectedOptions {
            horizon: 10.0,
            steps_per_unit: 10_000,
            max_doublings: 4,
        }
    }
}

/// Marked excursions of the reflected process, sorted by decreasing length.
pub fn reflected_process<R: Rng + ?Sized>(
    mu: DriftParams,
    lambda: f64,
    options: ReflectedOptions,
    rng: &mut R,
) -> Result<MarkedExcursionList> {
    check_drift(mu)?;
    let mut horizon = options.horizon;
    for _ in 0..=options.max_doublings {
        let steps = (horizon * options.steps_per_unit as f64).round().max(1.0) as usize;
        let path = reflected_path(mu, lambda, horizon, steps, rng)?;
        let list = excursions_of(&path, horizon / steps as f64, mu.beta, rng);
        if list.open_length < list.largest_length() {
            return Ok(list);
        }
        horizon *= 2.0;
    }
    Err(Error::Precondition(format!(
        "horizon {horizon} still cuts the largest excursion; raise it"
    )))
}

/// `M^D(λ)` from the first three moments of `D`: the `components` longest
/// excursions, each a rescaled `M^(N_i)`.
pub fn build_md<R: RngCore + ?Sized>(
    moments: (f64, f64, f64),
    lambda: f64,
    n: usize,
    components: usize,
    options: ReflectedOptions,
    rng: &mut R,
) -> Result<Vec<LimitSpaceSample>> {
    let mu = DriftParams::from_moments(moments.0, moments.1, moments.2);
    check_drift(mu)?;
    let list = reflected_process(mu, lambda, options, rng)?;
    list.excursions
        .iter()
        .take(components)
        .enumerate()
        .map(|(index, e)| {
            let k = u32::try_from(e.marks)
                .map_err(|_| Error::Precondition("surplus count overflow".into()))?;
            let mut s = build_mk(k, n, ExcursionTilt::default(), rng)?;
            s.construction = Construction::Md {
                index,
                xi: e.length,
                surplus: e.marks,
            };
            s.space = s.space.scaled(mu.alpha * e.length.sqrt() / mu.eta.sqrt());
            Ok(s)
        })
        .collect()
}

/// `M^vac(a0)`: [`build_md`] with the moments of `D_vac` and `λ_vac`.
pub fn build_mvac<R: RngCore + ?Sized>(
    r: u32,
    a0: f64,
    n: usize,
    components: usize,
    options: ReflectedOptions,
    rng: &mut R,
) -> Result<Vec<LimitSpaceSample>> {
    let vc = vacant_critical(r, a0)?;
    build_md(vc.moments(), vc.lambda_vac, n, components, options, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::stats::ks_two_sample;

    #[test]
    fn excursion_shape() {
        let mut rng = rng_from_seed(1);
        for n in [2, 3, 10, 500] {
            let e = sample_excursion(n, &mut rng).unwrap();
            let v = e.values();
            assert_eq!(v.len(), 2 * n + 1);
            assert_eq!(v[0], 0.0);
            assert_eq!(v[2 * n], 0.0);
            assert!(v[1..2 * n].iter().all(|&x| x > 0.0));
            assert!((e.duration() - 1.0).abs() < 1e-12);
        }
        assert!(sample_excursion(1, &mut rng).is_err());
    }

    #[test]
    fn fast_area_matches_path() {
        for seed in 0..20 {
            let e = sample_excursion(300, &mut rng_from_seed(seed)).unwrap();
            let a = excursion_area(300, &mut rng_from_seed(seed)).unwrap();
            assert!((e.area() - a).abs() < 1e-12, "{} vs {a}", e.area());
        }
    }

    #[test]
    fn small_grid_is_uniform_over_dyck_paths() {
        // n = 4: elevated Dyck paths of semilength 3, Catalan(3) = 5 shapes
        let mut rng = rng_from_seed(2);
        let mut counts = std::collections::BTreeMap::new();
        let draws = 50_000;
        for _ in 0..draws {
            *counts.entry(dyck_heights(4, &mut rng)).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 5);
        let obs: Vec<u64> = counts.values().copied().collect();
        let chi = crate::stats::chi_square_gof(&obs, &[0.2; 5]);
        assert!(chi.p_value > 1e-4, "{chi:?}");
    }

    #[test]
    fn area_moment_zero_is_one() {
        let e = area_moment(0, 100, 10, 1).unwrap();
        assert_eq!(e.value, 1.0);
        assert!(e.exact);
    }

    #[test]
    fn area_mean_near_sqrt_pi_over_8() {
        let e = area_moment(1, 1000, 20_000, 3).unwrap();
        let target = (std::f64::consts::PI / 8.0).sqrt();
        assert!(
            (e.value - target).abs() < 4.0 * e.standard_error + 0.005,
            "{e:?}"
        );
    }

    #[test]
    fn area_moment_independent_of_threads() {
        let a = area_moment(2, 200, 9000, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap();
        let b = pool.install(|| area_moment(2, 200, 9000, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn tilted_k1_mean_matches_moment_ratio() {
        let mut rng = rng_from_seed(4);
        let reps = 6000;
        let areas: Vec<f64> = (0..reps)
            .map(|_| {
                sample_tilted_excursion(1, 400, ExcursionTilt::default(), &mut rng)
                    .unwrap()
                    .path
                    .area()
            })
            .collect();
        let (m, se) = mean_se(&areas);
        let plain: Vec<f64> = (0..40_000)
            .map(|_| excursion_area(400, &mut rng).unwrap())
            .collect();
        let m1 = plain.iter().sum::<f64>() / plain.len() as f64;
        let m2 = plain.iter().map(|a| a * a).sum::<f64>() / plain.len() as f64;
        assert!((m - m2 / m1).abs() < 3.0 * se + 0.005, "{m} vs {}", m2 / m1);
        // tilted areas dominate plain ones
        let mut a = areas.clone();
        let mut p = plain.clone();
        a.sort_by(f64::total_cmp);
        p.sort_by(f64::total_cmp);
        assert!(crate::stats::quantile_sorted(&a, 0.5) > crate::stats::quantile_sorted(&p, 0.5));
    }

    #[test]
    fn tilt_zero_equals_plain_in_law() {
        let mut rng = rng_from_seed(6);
        let a: Vec<f64> = (0..3000)
            .map(|_| {
                sample_tilted_excursion(0, 200, ExcursionTilt::default(), &mut rng)
                    .unwrap()
                    .path
                    .area()
            })
            .collect();
        let b: Vec<f64> = (0..3000)
            .map(|_| excursion_area(200, &mut rng).unwrap())
            .collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.001);
    }

    #[test]
    fn pool_mode_reports_ess() {
        let mut rng = rng_from_seed(7);
        let opts = ExcursionTilt {
            method: TiltMethod::Pool,
            pool_size: 200,
            ..Default::default()
        };
        let t = sample_tilted_excursion(2, 100, opts, &mut rng).unwrap();
        assert!(t.acceptance_stats.approximate);
        let ess = t.acceptance_stats.effective_sample_size.unwrap();
        assert!(ess > 1.0 && ess <= 200.0);
    }

    #[test]
    fn range_min_matches_scan() {
        let mut rng = rng_from_seed(8);
        let v: Vec<f64> = (0..157).map(|_| rng.gen()).collect();
        let r = RangeMin::new(&v);
        for _ in 0..500 {
            let (a, b) = (rng.gen_range(0..v.len()), rng.gen_range(0..v.len()));
            let (lo, hi) = (a.min(b), a.max(b));
            let m = v[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(r.min(a, b), m);
        }
    }

    #[test]
    fn contour_distances_are_tree_like() {
        let mut rng = rng_from_seed(9);
        let s = build_mk(0, 300, ExcursionTilt::default(), &mut rng).unwrap();
        let t = &s.space;
        for _ in 0..300 {
            let p: Vec<TreePoint> = (0..4).map(|_| t.sample_point(&mut rng)).collect();
            let d = |i: usize, j: usize| t.distance(p[i], p[j]);
            let lhs = d(0, 1) + d(2, 3);
            let rhs = (d(0, 2) + d(1, 3)).max(d(0, 3) + d(1, 2));
            assert!(lhs <= rhs + 1e-9);
        }
        assert_eq!(t.betti_number(), 0);
    }

    #[test]
    fn glued_points_coincide_and_add_cycles() {
        let mut rng = rng_from_seed(10);
        for k in 0..4u32 {
            let s = build_mk(k, 200, ExcursionTilt::default(), &mut rng).unwrap();
            let t = &s.space;
            for &(x, y) in t.glue() {
                assert_eq!(t.distance(x, y), 0.0);
            }
            assert_eq!(t.betti_number(), k as usize);
            let x = t.to_mmspace(30, &mut rng).unwrap();
            assert!(x.triangle_defect() < 1e-9);
            assert!((x.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gluing_shortens_distances() {
        let mut rng = rng_from_seed(11);
        let s = build_mk(2, 300, ExcursionTilt::default(), &mut rng).unwrap();
        let t = &s.space;
        for _ in 0..200 {
            let (a, b) = (t.sample_point(&mut rng), t.sample_point(&mut rng));
            assert!(t.distance(a, b) <= t.tree_distance(a, b) + 1e-12);
        }
    }

    #[test]
    fn reflected_path_is_nonnegative() {
        let mu = DriftParams {
            alpha: 1.0,
            eta: 1.0,
            beta: 1.0,
        };
        let p = reflected_path(mu, 0.0, 5.0, 20_000, &mut rng_from_seed(12)).unwrap();
        assert!(p.iter().all(|&x| x >= 0.0));
        assert_eq!(p[0], 0.0);
    }

    #[test]
    fn negative_lambda_gives_short_excursions() {
        let mu = DriftParams {
            alpha: 1.0,
            eta: 1.0,
            beta: 1.0,
        };
        let opts = ReflectedOptions {
            steps_per_unit: 2000,
            ..Default::default()
        };
        let mut rng = rng_from_seed(13);
        let mut lengths: Vec<f64> = (0..300)
            .map(|_| {
                reflected_process(mu, -10.0, opts, &mut rng)
                    .unwrap()
                    .largest_length()
            })
            .collect();
        lengths.sort_by(f64::total_cmp);
        assert!(crate::stats::quantile_sorted(&lengths, 0.99) < 0.5);
    }

    #[test]
    fn marks_are_poisson_in_area() {
        // a flat path of height 1 for one unit: area 1, β = 3
        let mut path = vec![0.0];
        path.extend(std::iter::repeat_n(1.0, 999));
        path.push(0.0);
        let mut rng = rng_from_seed(14);
        let marks: Vec<f64> = (0..20_000)
            .map(|_| excursions_of(&path, 1e-3, 3.0, &mut rng).excursions[0].marks as f64)
            .collect();
        let (m, se) = mean_se(&marks);
        let area = 0.999;
        assert!((m - 3.0 * area).abs() < 4.0 * se);
        let var = marks.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (marks.len() - 1) as f64;
        assert!((var - 3.0 * area).abs() < 0.15);
    }

    #[test]
    fn excursion_list_is_sorted() {
        let mu = DriftParams::from_moments(1.5, 3.0, 7.5);
        let l = reflected_process(mu, 0.0, ReflectedOptions::default(), &mut rng_from_seed(15))
            .unwrap();
        assert!(l.excursions.windows(2).all(|w| w[0].length >= w[1].length));
        assert!(l.open_length < l.largest_length());
    }

    #[test]
    fn md_components_carry_probability_measures() {
        let mut rng = rng_from_seed(16);
        let opts = ReflectedOptions {
            steps_per_unit: 1000,
            ..Default::default()
        };
        let comps = build_md((1.0, 2.0, 5.0), 0.0, 200, 3, opts, &mut rng).unwrap();
        assert_eq!(comps.len(), 3);
        for c in &comps {
            let x = c.space.to_mmspace(10, &mut rng).unwrap();
            assert!((x.mass().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            match c.construction {
                Construction::Md { xi, surplus, .. } => {
                    assert!(xi > 0.0);
                    assert_eq!(c.space.glue().len() as u64, surplus);
                }
                _ => panic!("wrong construction"),
            }
        }
    }

    #[test]
    fn mvac_builds() {
        let mut rng = rng_from_seed(17);
        let opts = ReflectedOptions {
            steps_per_unit: 500,
            ..Default::default()
        };
        let comps = build_mvac(3, 0.0, 100, 2, opts, &mut rng).unwrap();
        assert_eq!(comps.len(), 2);
        assert!(build_mvac(2, 0.0, 100, 2, opts, &mut rng).is_err());
    }

    #[test]
    fn grid_refinement_is_stable() {
        let mut rng = rng_from_seed(18);
        let draw = |n: usize, rng: &mut crate::rng::SimRng| -> Vec<f64> {
            let s = build_mk(0, n, ExcursionTilt::default(), rng).unwrap();
            s.sample_distances(2, rng)
        };
        let a: Vec<f64> = (0..1500).map(|_| draw(500, &mut rng)[0]).collect();
        let b: Vec<f64> = (0..1500).map(|_| draw(1000, &mut rng)[0]).collect();
        assert!(ks_two_sample(&a, &b).p_value > 0.001);
    }
}
