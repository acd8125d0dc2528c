//! Brute-force enumeration oracles and exact counting identities.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::degrees::{ecd_from_degrees, ChildSequence, DegreeSequence};
use crate::error::{Error, Result};
use crate::graphs::MultiGraph;
use crate::plane_tree::{count_trees, enumerate_trees, factorial};
use crate::surgery::{admissible_pairs, count_pair_sets, PairSetRule};

/// Largest graph handled by the graph enumerators.
pub const MAX_GRAPH_VERTICES: usize = 10;
/// Largest tree handled by [`enumerate_tilted`].
pub const MAX_TREE_VERTICES: usize = 14;
const TREE_BUDGET: u64 = 50_000_000;

/// Calls `visit` on every labeled simple graph with degrees `d`
/// (connected ones only when `connected_only`).
pub fn for_each_simple_graph(
    d: &DegreeSequence,
    connected_only: bool,
    mut visit: impl FnMut(&[(u32, u32)]),
) -> Result<()> {
    let n = d.len();
    if n > MAX_GRAPH_VERTICES {
        return Err(Error::BudgetExceeded(format!(
            "{n} vertices exceed the enumeration limit of {MAX_GRAPH_VERTICES}"
        )));
    }
    if d.sum() % 2 == 1 {
        return Err(Error::OddDegreeSum(d.sum()));
    }
    let mut residual: Vec<u32> = d.as_slice().to_vec();
    let mut edges = Vec::new();
    search(0, &mut residual, &mut edges, n, connected_only, &mut visit);
    Ok(())
}

// Vertices are completed in label order: at vertex v every remaining
// half-edge must go to a larger label.
fn search(
    v: usize,
    residual: &mut [u32],
    edges: &mut Vec<(u32, u32)>,
    n: usize,
    connected_only: bool,
    visit: &mut impl FnMut(&[(u32, u32)]),
) {
    if v == n {
        if !connected_only || is_connected(n, edges) {
            visit(edges);
        }
        return;
    }
    let need = residual[v] as usize;
    let later: Vec<usize> = ((v + 1)..n).filter(|&w| residual[w] > 0).collect();
    if later.len() < need {
        return;
    }
    choose(
        v,
        need,
        &later,
        0,
        residual,
        edges,
        n,
        connected_only,
        visit,
    );
}

#[allow(clippy::too_many_arguments)]
fn choose(
    v: usize,
    need: usize,
    later: &[usize],
    from: usize,
    residual: &mut [u32],
    edges: &mut Vec<(u32, u32)>,
    n: usize,
    connected_only: bool,
    visit: &mut impl FnMut(&[(u32, u32)]),
) {
    if need == 0 {
        let saved = residual[v];
        residual[v] = 0;
        search(v + 1, residual, edges, n, connected_only, visit);
        residual[v] = saved;
        return;
    }
    for i in from..later.len() {
        if later.len() - i < need {
            break;
        }
        let w = later[i];
        residual[w] -= 1;
        edges.push((v as u32, w as u32));
        choose(
            v,
            need - 1,
            later,
            i + 1,
            residual,
            edges,
            n,
            connected_only,
            visit,
        );
        edges.pop();
        residual[w] += 1;
    }
}

fn is_connected(n: usize, edges: &[(u32, u32)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a as usize), find(&mut parent, b as usize));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps <= 1
}

/// All labeled simple graphs with degrees `d`.
pub fn enumerate_simple_graphs(
    d: &DegreeSequence,
    connected_only: bool,
) -> Result<Vec<MultiGraph>> {
    let mut out = Vec::new();
    for_each_simple_graph(d, connected_only, |e| {
        out.push(MultiGraph::new(d.len(), e.to_vec()).expect("labels in range"));
    })?;
    Ok(out)
}

/// `|𝔾^con_d|`, the number of labeled connected simple graphs.
pub fn enumerate_connected(d: &DegreeSequence) -> Result<BigUint> {
    let mut count = 0u64;
    for_each_simple_graph(d, true, |_| count += 1)?;
    Ok(BigUint::from(count))
}

/// `|𝕋_s^(k)| = Σ_t |A_k(t)|` over all plane trees with the ECD.
pub fn enumerate_tilted(children: &ChildSequence, k: usize, rule: PairSetRule) -> Result<BigUint> {
    if children.len() > MAX_TREE_VERTICES {
        return Err(Error::BudgetExceeded(format!(
            "{} tree vertices exceed the limit of {MAX_TREE_VERTICES}",
            children.len()
        )));
    }
    let trees = enumerate_trees(children, TREE_BUDGET)?;
    let total: u128 = trees
        .iter()
        .map(|t| {
            if k == 0 {
                1
            } else {
                count_pair_sets(t, &admissible_pairs(t).pairs, k, rule)
            }
        })
        .sum();
    Ok(BigUint::from(total))
}

/// Wright ratio `|𝔾^con|·∏(d_i − 1)!·m̃^{k/2} / (m̃ + 2k − 2)!`, kept as
/// `rational · m̃^{k/2}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrightRatio {
    #[serde(serialize_with = "ser_rational")]
    pub rational: BigRational,
    pub m_tilde: usize,
    pub k: usize,
    pub value: f64,
}

impl WrightRatio {
    /// Exact form such as `1/10 * 5^(1/2)`.
    pub fn exact_string(&self) -> String {
        let q = &self.rational;
        if self.k == 0 {
            return q.to_string();
        }
        if self.k.is_multiple_of(2) {
            let p = BigInt::from(self.m_tilde).pow((self.k / 2) as u32);
            return (q * BigRational::from_integer(p)).to_string();
        }
        format!("{q} * {}^({}/2)", self.m_tilde, self.k)
    }
}

fn ser_rational<S: serde::Serializer>(
    q: &BigRational,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn factorial_product(xs: impl Iterator<Item = u64>) -> BigUint {
    xs.fold(BigUint::from(1u32), |acc, x| acc * factorial(x))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn wright_ratio_from_count(count: &BigUint, d: &DegreeSequence, k: usize) -> WrightRatio {
    let m = d.len();
    let num = count * factorial_product(d.as_slice().iter().map(|&x| x.saturating_sub(1) as u64));
    let den = factorial((m + 2 * k).saturating_sub(2) as u64);
    let rational = BigRational::new(num.into(), den.into());
    let value = to_f64(&rational) * (m as f64).powf(k as f64 / 2.0);
    WrightRatio {
        rational,
        m_tilde: m,
        k,
        value,
    }
}

pub fn wright_ratio(d: &DegreeSequence, k: usize) -> Result<WrightRatio> {
    let expected = 2 * (d.len() as u64 - 1) + 2 * k as u64;
    if d.sum() != expected {
        return Err(Error::DegreeSumMismatch {
            sum: d.sum(),
            expected,
        });
    }
    Ok(wright_ratio_from_count(&enumerate_connected(d)?, d, k))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationResult {
    #[serde(serialize_with = "ser_big")]
    pub count_connected: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub count_trees: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub count_tilted: BigUint,
    pub wright_ratio_exact: String,
    pub wright_ratio_float: f64,
    /// `|𝔾^con|·∏(d_j − 1)!`.
    #[serde(serialize_with = "ser_big")]
    pub graph_side: BigUint,
    /// `|𝕋_s^(k)|·(s0 − 2k)!·∏_{i≥1} s_i!`.
    #[serde(serialize_with = "ser_big")]
    pub tree_side: BigUint,
    pub identity_holds: bool,
}

fn ser_big<S: serde::Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x.to_u64() {
        Some(v) => s.serialize_u64(v),
        None => s.serialize_str(&x.to_string()),
    }
}

/// Counts both sides of the graph/tree identity for `(d, k)`.
pub fn enumerate(d: &DegreeSequence, k: usize, rule: PairSetRule) -> Result<EnumerationResult> {
    let enc = ecd_from_degrees(d, k)?;
    let count_connected = enumerate_connected(d)?;
    let count_trees = count_trees(&enc.children)?;
    let count_tilted = enumerate_tilted(&enc.children, k, rule)?;
    let ecd = enc.children.ecd();
    let graph_side =
        &count_connected * factorial_product(d.as_slice().iter().map(|&x| x as u64 - 1));
    let tree_side = &count_tilted
        * factorial(ecd[0] - 2 * k as u64)
        * factorial_product(ecd[1..].iter().copied());
    let ratio = wright_ratio_from_count(&count_connected, d, k);
    Ok(EnumerationResult {
        identity_holds: graph_side == tree_side,
        count_connected,
        count_trees,
        count_tilted,
        wright_ratio_exact: ratio.exact_string(),
        wright_ratio_float: ratio.value,
        graph_side,
        tree_side,
    })
}

/// Every non-increasing degree sequence on `m̃` vertices with
/// `Σ d = 2(m̃ − 1) + 2k`, all degrees in `1..=m̃−1`, and a degree-one
/// vertex.
pub fn identity_corpus(m_tilde: usize, k: usize) -> Vec<DegreeSequence> {
    let target = 2 * (m_tilde as u32 - 1) + 2 * k as u32;
    let max_deg = (m_tilde as u32 - 1).max(1);
    let mut out = Vec::new();
    fn rec(
        cur: &mut Vec<u32>,
        left: usize,
        remaining: u32,
        cap: u32,
        out: &mut Vec<DegreeSequence>,
    ) {
        if left == 0 {
            if remaining == 0 && cur.last() == Some(&1) {
                out.push(DegreeSequence::new(cur.clone()).expect("even sum"));
            }
            return;
        }
        for x in (1..=cap.min(remaining)).rev() {
            if remaining - x < (left as u32 - 1) {
                continue;
            }
            cur.push(x);
            rec(cur, left - 1, remaining - x, x, out);
            cur.pop();
        }
    }
    rec(&mut Vec::new(), m_tilde, target, max_deg, &mut out);
    out
}

/// `E[(∫e)^0] = 1`, the zeroth area moment, exactly.
pub fn zeroth_area_moment() -> BigRational {
    BigRational::from_integer(1.into())
}

/// Whether a rational is zero (helper for callers that only hold floats).
pub fn is_zero(q: &BigRational) -> bool {
    q.is_zero()
}
