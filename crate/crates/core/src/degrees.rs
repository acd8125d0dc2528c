//! Degree sequences, children sequences and criticality parameters.
//!
//! Vertex labels are 1-based at the API surface (`label(1)` is the first
//! vertex) and stored 0-based internally: label `j` lives at index `j - 1`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Degrees of labeled vertices `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DegreeSequence {
    degrees: Vec<u32>,
}

impl DegreeSequence {
    /// Builds a sequence with at least one vertex and an even degree sum.
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Precondition("degree sequence is empty".into()));
        }
        let seq = DegreeSequence { degrees };
        if seq.sum() % 2 == 1 {
            return Err(Error::OddDegreeSum(seq.sum()));
        }
        Ok(seq)
    }

    /// `n` vertices of degree `r`.
    pub fn regular(n: usize, r: u32) -> Result<Self> {
        Self::new(vec![r; n])
    }

    /// `n1` vertices of degree `d1` followed by `n2` vertices of degree `d2`.
    pub fn two_atom(n1: usize, d1: u32, n2: usize, d2: u32) -> Result<Self> {
        let mut degrees = vec![d1; n1];
        degrees.extend(std::iter::repeat_n(d2, n2));
        Self::new(degrees)
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.degrees
    }

    /// Degree of the vertex with 1-based `label`.
    pub fn label(&self, label: usize) -> u32 {
        self.degrees[label - 1]
    }

    pub fn sum(&self) -> u64 {
        self.degrees.iter().map(|&d| d as u64).sum()
    }

    pub fn max(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn has_degree_one(&self) -> bool {
        self.degrees.contains(&1)
    }

    /// `counts[i]` = number of vertices of degree `i`.
    pub fn degree_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.max() as usize + 1];
        for &d in &self.degrees {
            counts[d as usize] += 1;
        }
        counts
    }

    /// Parses either newline/whitespace separated integers or a JSON array.
    pub fn parse(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        let degrees: Vec<u32> = if trimmed.starts_with('[') {
            serde_json::from_str(trimmed)?
        } else {
            trimmed
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|e| Error::Parse(format!("bad degree {s:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        Self::new(degrees)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Children counts `c_j` of the vertices of a plane tree or forest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChildSequence {
    counts: Vec<u32>,
}

impl ChildSequence {
    pub fn new(counts: Vec<u32>) -> Self {
        ChildSequence { counts }
    }

    /// Expands an ECD `s` into counts, zeros first.
    pub fn from_ecd(ecd: &[u64]) -> Self {
        let counts = ecd
            .iter()
            .enumerate()
            .flat_map(|(i, &s)| std::iter::repeat_n(i as u32, s as usize))
            .collect();
        ChildSequence { counts }
    }

    /// Parses a comma or whitespace separated list of children counts.
    pub fn parse(text: &str) -> Result<Self> {
        let counts = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<u32>()
                    .map_err(|e| Error::Parse(format!("bad child count {s:?}: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(ChildSequence { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Number of vertices `m`.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Empirical children distribution: `s[i] = #{j : c_j = i}`.
    pub fn ecd(&self) -> Vec<u64> {
        let max = self.counts.iter().copied().max().unwrap_or(0) as usize;
        let mut s = vec![0u64; max + 1];
        for &c in &self.counts {
            s[c as usize] += 1;
        }
        s
    }

    /// Number of leaves `s_0`.
    pub fn leaves(&self) -> usize {
        self.counts.iter().filter(|&&c| c == 0).count()
    }

    /// `k(s) = Σ s_i − Σ i s_i`, the number of trees of a forest with this ECD.
    pub fn forest_roots(&self) -> i64 {
        let total: i64 = self.counts.iter().map(|&c| c as i64).sum();
        self.counts.len() as i64 - total
    }

    pub fn is_tree_tenable(&self) -> bool {
        self.forest_roots() == 1 && self.leaves() >= 1
    }

    pub fn is_forest_tenable(&self) -> bool {
        self.forest_roots() >= 1
    }

    pub fn require_tree_tenable(&self) -> Result<()> {
        if self.is_tree_tenable() {
            Ok(())
        } else {
            Err(Error::NotTenable(format!(
                "m = {}, Σc = {}, s0 = {}",
                self.len(),
                self.len() as i64 - self.forest_roots(),
                self.leaves()
            )))
        }
    }
}

/// Children sequence built from a degree sequence with `k` surplus edges,
/// plus the relabeling that moved the first degree-one vertex to the front.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEncoding {
    pub children: ChildSequence,
    /// `order[i]` is the original 1-based label of the vertex at relabeled
    /// position `i + 1`. Position 1 is the degree-one vertex.
    pub order: Vec<usize>,
    pub surplus: usize,
}

impl TreeEncoding {
    /// Number of graph vertices `m̃`.
    pub fn graph_vertices(&self) -> usize {
        self.order.len()
    }
}

/// Forms `c = (d_2 − 1, …, d_m̃ − 1, 0, …, 0)` with `2k` trailing zeros.
///
/// The smallest label among degree-one vertices plays the role of vertex 1;
/// the remaining vertices keep their relative order.
pub fn ecd_from_degrees(d: &DegreeSequence, k: usize) -> Result<TreeEncoding> {
    let m_tilde = d.len() as u64;
    let expected = 2 * (m_tilde - 1) + 2 * k as u64;
    if d.sum() != expected {
        return Err(Error::DegreeSumMismatch {
            sum: d.sum(),
            expected,
        });
    }
    if d.as_slice().contains(&0) {
        return Err(Error::Precondition(
            "connected sampling needs every degree ≥ 1".into(),
        ));
    }
    let first = d
        .as_slice()
        .iter()
        .position(|&x| x == 1)
        .ok_or(Error::NoDegreeOne)?;
    let mut order = Vec::with_capacity(d.len());
    order.push(first + 1);
    order.extend((0..d.len()).filter(|&i| i != first).map(|i| i + 1));
    let mut counts: Vec<u32> = order[1..].iter().map(|&l| d.label(l) - 1).collect();
    counts.extend(std::iter::repeat_n(0, 2 * k));
    Ok(TreeEncoding {
        children: ChildSequence::new(counts),
        order,
        surplus: k,
    })
}

/// Parameters `μ = (α, η, β)` of the drifted Brownian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftParams {
    pub alpha: f64,
    pub eta: f64,
    pub beta: f64,
}

impl DriftParams {
    /// `α = σ1`, `η = σ3σ1 − σ2²`, `β = 1/σ1`.
    pub fn from_moments(sigma1: f64, sigma2: f64, sigma3: f64) -> Self {
        DriftParams {
            alpha: sigma1,
            eta: sigma3 * sigma1 - sigma2 * sigma2,
            beta: 1.0 / sigma1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalityParams {
    pub nu_n: f64,
    /// `n^{1/3}(ν_n − 1)`.
    pub lambda: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
    pub mu: DriftParams,
}

pub fn criticality(d: &DegreeSequence) -> CriticalityParams {
    let n = d.len() as f64;
    let (mut s1, mut s2, mut s3, mut falling) = (0f64, 0f64, 0f64, 0f64);
    for &x in d.as_slice() {
        let x = x as f64;
        s1 += x;
        s2 += x * x;
        s3 += x * x * x;
        falling += x * (x - 1.0);
    }
    let nu_n = if s1 > 0.0 { falling / s1 } else { 0.0 };
    let (sigma1, sigma2, sigma3) = (s1 / n, s2 / n, s3 / n);
    CriticalityParams {
        nu_n,
        lambda: n.cbrt() * (nu_n - 1.0),
        sigma1,
        sigma2,
        sigma3,
        mu: DriftParams::from_moments(sigma1, sigma2, sigma3),
    }
}

/// Which limit law a family is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// Children law with mean 1.
    Children,
    /// Degree law with mean 2.
    Degrees,
}

impl LawKind {
    fn mean(self) -> f64 {
        match self {
            LawKind::Children => 1.0,
            LawKind::Degrees => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionRow {
    pub size: usize,
    pub pmf_sup_deviation: f64,
    pub second_moment_deviation: f64,
    pub max_over_sqrt_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub kind: LawKind,
    pub limit_mean: f64,
    pub limit_second_moment: f64,
    pub limit_variance: f64,
    pub rows: Vec<AssumptionRow>,
}

/// Compares each sequence's empirical law (given as value counts, index =
/// value) with the limit pmf.
pub fn check_assumption(
    family: &[Vec<u64>],
    limit_pmf: &[f64],
    kind: LawKind,
) -> Result<AssumptionReport> {
    const TOL: f64 = 1e-9;
    let total: f64 = limit_pmf.iter().sum();
    if (total - 1.0).abs() > TOL || limit_pmf.iter().any(|&p| p < 0.0) {
        return Err(Error::NotNormalized(total));
    }
    let mean: f64 = limit_pmf
        .iter()
        .enumerate()
        .map(|(i, p)| i as f64 * p)
        .sum();
    if (mean - kind.mean()).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "limit pmf has mean {mean}, expected {}",
            kind.mean()
        )));
    }
    let second: f64 = limit_pmf
        .iter()
        .enumerate()
        .map(|(i, p)| (i * i) as f64 * p)
        .sum();
    let rows = family
        .iter()
        .map(|counts| {
            let size: u64 = counts.iter().sum();
            let m = size.max(1) as f64;
            let width = counts.len().max(limit_pmf.len());
            let sup = (0..width)
                .map(|i| {
                    let emp = counts.get(i).copied().unwrap_or(0) as f64 / m;
                    (emp - limit_pmf.get(i).copied().unwrap_or(0.0)).abs()
                })
                .fold(0.0, f64::max);
            let emp_second: f64 = counts
                .iter()
                .enumerate()
                .map(|(i, &c)| (i * i) as f64 * c as f64)
                .sum::<f64>()
                / m;
            let max_value = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
            AssumptionRow {
                size: size as usize,
                pmf_sup_deviation: sup,
                second_moment_deviation: (emp_second - second).abs(),
                max_over_sqrt_size: max_value as f64 / m.sqrt(),
            }
        })
        .collect();
    Ok(AssumptionReport {
        kind,
        limit_mean: mean,
        limit_second_moment: second,
        limit_variance: second - mean * mean,
        rows,
    })
}
