//! Command-line front end. Replica `i` always draws from
//! `replica_rng(seed, i)` and results are gathered in replica order, so the
//! output depends on the seed only, never on the thread count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::degrees::{ChildSequence, DegreeSequence};
use crate::error::{Error, Result};
use crate::exact::{enumerate, enumerate_simple_graphs, wright_ratio};
use crate::graphs::{
    component_census, sample_cm, sample_connected_with, sample_simple, MultiGraph,
};
use crate::limits::{
    build_md, build_mk, build_mvac, ExcursionTilt, LimitSpaceSample, ReflectedOptions,
};
use crate::mmspace::compare_distance_laws;
use crate::plane_tree::{
    count_trees, enumerate_trees, permutation_concentration_stat, sample_tree, TreeRecord,
};
use crate::rng::{replica_rng, SimRng};
use crate::stats::chi_square_gof;
use crate::surgery::{PairSetRule, TiltMethod, TiltOptions};
use crate::vacant::{annealed_pipeline, vacant_critical, BaseModel};

#[derive(Debug, Parser)]
#[command(
    name = "critgraph",
    version,
    about = "Critical random graphs with prescribed degrees"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 1)]
    pub reps: usize,
    /// Worker threads; CRITGRAPH_THREADS takes precedence.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Cm,
    Simple,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConstructionArg {
    Mk,
    Md,
    Mvac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Rescaled uniform trees against the grid CRT.
    TreeCrt,
    /// Uniform trees against independent uniform trees.
    SelfTree,
    /// Uniform trees against uniform trees with distances doubled.
    TreeScaled,
    /// Rescaled uniform connected graphs with surplus k against `M^(k)`.
    ConnectedMk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Simple,
    Literal,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uniform plane trees with given children counts.
    SampleTree {
        /// Children counts, comma separated.
        #[arg(long)]
        ecd: String,
    },
    /// Uniform connected simple graphs with `k` surplus edges.
    SampleConnected {
        /// Degree file: JSON array or whitespace/comma separated integers
        #[arg(long)]
        degrees: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long)]
        pool: bool,
    },
    /// Configuration model multigraphs.
    SampleCm {
        /// Degree file: JSON array or whitespace/comma separated integers
        #[arg(long)]
        degrees: PathBuf,
        /// Emit the component census instead of edges.
        #[arg(long)]
        census: bool,
    },
    /// Uniform simple graphs.
    SampleSimple {
        /// Degree file: JSON array or whitespace/comma separated integers
        #[arg(long)]
        degrees: PathBuf,
        #[arg(long)]
        census: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_attempts: u64,
    },
    /// Vacant set of a random walk on random regular graphs.
    VacantSet {
        #[arg(long, default_value_t = 3)]
        r: u32,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a0: f64,
        #[arg(long)]
        n: usize,
        /// Walk time; defaults to `u★ − a0 n^{-1/3}`.
        #[arg(long)]
        u: Option<f64>,
        #[arg(long, value_enum, default_value_t = ModelArg::Simple)]
        model: ModelArg,
    },
    /// Exact counts of connected graphs and tilted trees.
    Enumerate {
        /// Degree file: JSON array or whitespace/comma separated integers
        #[arg(long)]
        degrees: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
        #[arg(long, value_enum, default_value_t = RuleArg::Simple)]
        rule: RuleArg,
    },
    /// Exact Wright ratio.
    Wright {
        /// Degree file: JSON array or whitespace/comma separated integers
        #[arg(long)]
        degrees: PathBuf,
        #[arg(long, default_value_t = 0)]
        k: usize,
    },
    /// Distance samples from grid limit spaces.
    LimitSim {
        #[arg(long, value_enum, default_value_t = ConstructionArg::Mk)]
        construction: ConstructionArg,
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        r: u32,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a0: f64,
        /// `E D, E D², E D³` for `md`.
        #[arg(long, default_value = "1,2,5")]
        moments: String,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
        /// Distance draws per space.
        #[arg(long, default_value_t = 1)]
        samples: usize,
        /// Points per draw.
        #[arg(long, default_value_t = 4)]
        l: usize,
        /// Components kept for `md` and `mvac`.
        #[arg(long, default_value_t = 1)]
        components: usize,
    },
    /// Two-sample comparison of distance laws.
    Compare {
        #[arg(long, value_enum, default_value_t = Preset::TreeCrt)]
        preset: Preset,
        /// Approximate tree or graph size.
        #[arg(long, default_value_t = 10_001)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
        #[arg(long, default_value_t = 4)]
        l: usize,
        #[arg(long, default_value_t = 0.001)]
        threshold: f64,
    },
    /// Permutation concentration statistic of a probability vector.
    Concentration {
        /// Weights file (same formats as degrees); normalized.
        #[arg(long)]
        weights: Option<PathBuf>,
        /// Without a file, weights `1..=n`.
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
}

/// Rendered output plus a one-line summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub summary: String,
}

fn thread_count(common: &Common) -> usize {
    std::env::var("CRITGRAPH_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .unwrap_or(common.threads)
        .max(1)
}

/// Runs a parsed command and writes `--out` if given.
pub fn run(cli: &Cli) -> Result<Output> {
    if cli.common.reps == 0 {
        return Err(Error::Precondition("--reps must be ≥ 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(&cli.common))
        .build()
        .map_err(|e| Error::Precondition(e.to_string()))?;
    let out = pool.install(|| dispatch(&cli.common, &cli.command))?;
    if let Some(path) = &cli.common.out {
        std::fs::write(path, &out.body)?;
    }
    Ok(out)
}

/// Maps replicas in parallel, keeping replica order.
fn replicas<T: Send>(
    common: &Common,
    f: impl Fn(usize, &mut SimRng) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..common.reps)
        .into_par_iter()
        .map(|i| f(i, &mut replica_rng(common.seed, i as u64)))
        .collect()
}

fn json_body(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn csv_body(header: &str, rows: &[String]) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(r);
        s.push('\n');
    }
    s
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn graph_rows(replica: usize, g: &MultiGraph) -> Vec<String> {
    g.edges()
        .iter()
        .map(|&(a, b)| format!("{replica},{},{}", a + 1, b + 1))
        .collect()
}

fn graph_json(g: &MultiGraph) -> Value {
    g.to_json_value()
}

fn emit_graphs(
    common: &Common,
    graphs: &[MultiGraph],
    extra: impl Fn(usize) -> Value,
    census: bool,
) -> String {
    match common.format {
        Format::Json => {
            let items: Vec<Value> = graphs
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let mut v = if census {
                        json!({ "census": component_census(g).summary_json(10) })
                    } else {
                        graph_json(g)
                    };
                    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra(i)) {
                        m.extend(e);
                    }
                    v
                })
                .collect();
            if items.len() == 1 {
                json_body(&items[0])
            } else {
                json_body(&Value::Array(items))
            }
        }
        Format::Csv if census => {
            let rows: Vec<String> = graphs
                .iter()
                .enumerate()
                .flat_map(|(i, g)| {
                    component_census(g)
                        .components
                        .iter()
                        .take(10)
                        .enumerate()
                        .map(|(j, c)| {
                            format!("{i},{},{},{},{}", j + 1, c.size, c.surplus, c.sum_deg_sq)
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            csv_body("replica,rank,size,surplus,sum_deg_sq", &rows)
        }
        Format::Csv => {
            let rows: Vec<String> = graphs
                .iter()
                .enumerate()
                .flat_map(|(i, g)| graph_rows(i, g))
                .collect();
            csv_body("replica,u,v", &rows)
        }
    }
}

fn dispatch(common: &Common, command: &Command) -> Result<Output> {
    match command {
        Command::SampleTree { ecd } => sample_tree_cmd(common, ecd),
        Command::SampleConnected { degrees, k, pool } => {
            let d = DegreeSequence::from_path(degrees)?;
            let options = TiltOptions {
                method: if *pool {
                    TiltMethod::Pool
                } else {
                    TiltMethod::Rejection
                },
                ..TiltOptions::default()
            };
            let graphs = replicas(common, |_, rng| sample_connected_with(&d, *k, options, rng))?;
            Ok(Output {
                body: emit_graphs(common, &graphs, |_| json!({}), false),
                summary: format!(
                    "sample-connected: {} graph(s) on {} vertices, k = {k}{}",
                    graphs.len(),
                    d.len(),
                    if *pool {
                        " (pool mode, approximate)"
                    } else {
                        ""
                    }
                ),
            })
        }
        Command::SampleCm { degrees, census } => {
            let d = DegreeSequence::from_path(degrees)?;
            let graphs = replicas(common, |_, rng| sample_cm(&d, rng))?;
            let simple = graphs.iter().filter(|g| g.is_simple()).count();
            Ok(Output {
                body: emit_graphs(common, &graphs, |_| json!({}), *census),
                summary: format!(
                    "sample-cm: {} multigraph(s), {simple} simple, n = {}",
                    graphs.len(),
                    d.len()
                ),
            })
        }
        Command::SampleSimple {
            degrees,
            census,
            max_attempts,
        } => {
            let d = DegreeSequence::from_path(degrees)?;
            let samples = replicas(common, |_, rng| sample_simple(&d, rng, *max_attempts))?;
            let attempts: Vec<u64> = samples.iter().map(|s| s.attempts).collect();
            let graphs: Vec<MultiGraph> = samples.into_iter().map(|s| s.graph).collect();
            let total: u64 = attempts.iter().sum();
            Ok(Output {
                body: emit_graphs(
                    common,
                    &graphs,
                    |i| json!({ "attempts": attempts[i] }),
                    *census,
                ),
                summary: format!(
                    "sample-simple: {} graph(s), acceptance rate {:.4}",
                    graphs.len(),
                    graphs.len() as f64 / total as f64
                ),
            })
        }
        Command::VacantSet { r, a0, n, u, model } => vacant_cmd(common, *r, *a0, *n, *u, *model),
        Command::Enumerate { degrees, k, rule } => {
            let d = DegreeSequence::from_path(degrees)?;
            let rule = match rule {
                RuleArg::Simple => PairSetRule::SimpleSurgery,
                RuleArg::Literal => PairSetRule::DistinctLeaves,
            };
            let r = enumerate(&d, *k, rule)?;
            let body = match common.format {
                Format::Json => json_body(&serde_json::to_value(&r)?),
                Format::Csv => csv_body(
                    "count_connected,count_trees,count_tilted,wright_ratio_exact,wright_ratio_float,identity_holds",
                    &[format!(
                        "{},{},{},\"{}\",{},{}",
                        r.count_connected,
                        r.count_trees,
                        r.count_tilted,
                        r.wright_ratio_exact,
                        r.wright_ratio_float,
                        r.identity_holds
                    )],
                ),
            };
            Ok(Output {
                body,
                summary: format!(
                    "enumerate: {} connected graph(s), identity holds: {}",
                    r.count_connected, r.identity_holds
                ),
            })
        }
        Command::Wright { degrees, k } => {
            let d = DegreeSequence::from_path(degrees)?;
            let w = wright_ratio(&d, *k)?;
            let count = enumerate_simple_graphs(&d, true)?.len();
            let body = match common.format {
                Format::Json => json_body(&json!({
                    "m_tilde": w.m_tilde,
                    "k": w.k,
                    "count_connected": count,
                    "rational": w.rational.to_string(),
                    "exact": w.exact_string(),
                    "value": w.value,
                })),
                Format::Csv => csv_body(
                    "m_tilde,k,count_connected,exact,value",
                    &[format!(
                        "{},{},{count},\"{}\",{}",
                        w.m_tilde,
                        w.k,
                        w.exact_string(),
                        w.value
                    )],
                ),
            };
            Ok(Output {
                body,
                summary: format!("wright: ratio {} ≈ {:.6}", w.exact_string(), w.value),
            })
        }
        Command::LimitSim {
            construction,
            k,
            lambda,
            r,
            a0,
            moments,
            grid,
            samples,
            l,
            components,
        } => {
            let moments = parse_moments(moments)?;
            let spaces = replicas(common, |_, rng| -> Result<Vec<LimitSpaceSample>> {
                match construction {
                    ConstructionArg::Mk => {
                        Ok(vec![build_mk(*k, *grid, ExcursionTilt::default(), rng)?])
                    }
                    ConstructionArg::Md => build_md(
                        moments,
                        *lambda,
                        *grid,
                        *components,
                        ReflectedOptions::default(),
                        rng,
                    ),
                    ConstructionArg::Mvac => build_mvac(
                        *r,
                        *a0,
                        *grid,
                        *components,
                        ReflectedOptions::default(),
                        rng,
                    ),
                }
            })?;
            // distances drawn from a per-replica stream after the build
            let draws: Vec<Vec<Vec<Vec<f64>>>> = spaces
                .par_iter()
                .enumerate()
                .map(|(i, comps)| {
                    let mut rng = replica_rng(common.seed ^ 0x5eed, i as u64);
                    comps
                        .iter()
                        .map(|c| {
                            (0..*samples)
                                .map(|_| c.sample_distances(*l, &mut rng))
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let body = match common.format {
                Format::Json => {
                    let items: Vec<Value> = spaces
                        .iter()
                        .zip(&draws)
                        .enumerate()
                        .map(|(i, (comps, d))| {
                            json!({
                                "replica": i,
                                "components": comps.iter().zip(d).map(|(c, dd)| json!({
                                    "metadata": c.metadata_json(),
                                    "distances": dd,
                                })).collect::<Vec<_>>(),
                            })
                        })
                        .collect();
                    json_body(&json!({ "l": l, "grid": grid, "replicas": items }))
                }
                Format::Csv => {
                    let width = l * l.saturating_sub(1) / 2;
                    let header =
                        (0..width).fold(String::from("replica,component,sample"), |mut h, e| {
                            let _ = write!(h, ",d{e}");
                            h
                        });
                    let mut rows = Vec::new();
                    for (i, d) in draws.iter().enumerate() {
                        for (c, dd) in d.iter().enumerate() {
                            for (s, v) in dd.iter().enumerate() {
                                rows.push(format!("{i},{c},{s},{}", join(v)));
                            }
                        }
                    }
                    csv_body(&header, &rows)
                }
            };
            Ok(Output {
                body,
                summary: format!(
                    "limit-sim: {} replica(s), {} space(s), grid {grid}",
                    spaces.len(),
                    spaces.iter().map(|s| s.len()).sum::<usize>()
                ),
            })
        }
        Command::Compare {
            preset,
            n,
            k,
            grid,
            l,
            threshold,
        } => compare_cmd(common, *preset, *n, *k, *grid, *l, *threshold),
        Command::Concentration { weights, n } => {
            let p: Vec<f64> = match weights {
                Some(path) => read_weights(path)?,
                None => (1..=*n).map(|i| i as f64).collect(),
            };
            let total: f64 = p.iter().sum();
            if !(total > 0.0) {
                return Err(Error::Precondition(
                    "weights must have positive total".into(),
                ));
            }
            let p: Vec<f64> = p.iter().map(|x| x / total).collect();
            let mut rng = replica_rng(common.seed, 0);
            let s = permutation_concentration_stat(&p, &mut rng, common.reps)?;
            let body = match common.format {
                Format::Json => json_body(&serde_json::to_value(&s)?),
                Format::Csv => csv_body(
                    "level,quantile",
                    &s.quantiles
                        .iter()
                        .map(|(a, b)| format!("{a},{b}"))
                        .collect::<Vec<_>>(),
                ),
            };
            Ok(Output {
                body,
                summary: format!("concentration: {} permutations, max {:.4}", s.reps, s.max),
            })
        }
    }
}

fn parse_moments(s: &str) -> Result<(f64, f64, f64)> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("{x:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    match v[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Error::Parse("--moments needs three values".into())),
    }
}

fn read_weights(path: &std::path::Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let t = text.trim();
    if t.starts_with('[') {
        return Ok(serde_json::from_str(t)?);
    }
    t.split_whitespace()
        .map(|x| {
            x.parse::<f64>()
                .map_err(|e| Error::Parse(format!("{x:?}: {e}")))
        })
        .collect()
}

fn sample_tree_cmd(common: &Common, ecd: &str) -> Result<Output> {
    let cs = ChildSequence::parse(ecd)?;
    cs.require_tree_tenable()?;
    let trees = replicas(common, |_, rng| sample_tree(&cs, rng))?;
    if common.reps == 1 {
        let t = trees.into_iter().next().expect("one replica");
        let rec = TreeRecord::from(t.clone());
        let body = match common.format {
            Format::Json => json_body(&serde_json::to_value(&rec)?),
            Format::Csv => csv_body(
                "vertex,parent,children",
                &(0..t.len())
                    .map(|v| {
                        let p = t.parent(v).map_or(String::new(), |p| p.to_string());
                        format!("{v},{p},{}", t.child_count(v))
                    })
                    .collect::<Vec<_>>(),
            ),
        };
        return Ok(Output {
            body,
            summary: format!("sample-tree: one tree on {} vertices", t.len()),
        });
    }
    let mut table: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
    for t in &trees {
        *table.entry(t.preorder_counts()).or_default() += 1;
    }
    // chi-square against the full support when it is small enough to list
    let chi = match count_trees(&cs) {
        Ok(c) if c <= 100_000u32.into() => {
            let support = enumerate_trees(&cs, 100_000)?;
            let obs: Vec<u64> = support
                .iter()
                .map(|t| table.get(&t.preorder_counts()).copied().unwrap_or(0))
                .collect();
            let probs = vec![1.0 / obs.len() as f64; obs.len()];
            Some((support.len(), chi_square_gof(&obs, &probs)))
        }
        _ => None,
    };
    let body = match common.format {
        Format::Json => json_body(&json!({
            "reps": common.reps,
            "distinct": table.len(),
            "support": chi.as_ref().map(|c| c.0),
            "chi_square": chi.as_ref().map(|c| json!({
                "statistic": c.1.statistic,
                "df": c.1.df,
                "p_value": c.1.p_value,
            })),
            "table": table.iter().map(|(k, v)| json!({ "tree": k, "count": v })).collect::<Vec<_>>(),
        })),
        Format::Csv => csv_body(
            "tree,count",
            &table
                .iter()
                .map(|(k, v)| format!("\"{}\",{v}", join(k)))
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output {
        body,
        summary: match &chi {
            Some((s, c)) => format!(
                "sample-tree: {} draws over {} of {s} trees, chi-square p = {:.4}",
                common.reps,
                table.len(),
                c.p_value
            ),
            None => format!(
                "sample-tree: {} draws, {} distinct trees",
                common.reps,
                table.len()
            ),
        },
    })
}

fn vacant_cmd(
    common: &Common,
    r: u32,
    a0: f64,
    n: usize,
    u: Option<f64>,
    model: ModelArg,
) -> Result<Output> {
    let c = vacant_critical(r, a0)?;
    let u = u.unwrap_or_else(|| c.u_n(n));
    let model = match model {
        ModelArg::Cm => BaseModel::Cm,
        ModelArg::Simple => BaseModel::Simple,
    };
    let samples = replicas(common, |_, rng| annealed_pipeline(r, u, n, model, rng))?;
    let rows: Vec<Value> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            json!({
                "replica": i,
                "c1": s.census.size(0),
                "c2": s.census.size(1),
                "surplus1": s.census.components.first().map_or(0, |c| c.surplus),
                "pmf": s.pmf,
            })
        })
        .collect();
    let body = match common.format {
        Format::Json => json_body(&json!({
            "r": r,
            "a0": a0,
            "n": n,
            "u": u,
            "u_star": c.u_star,
            "p_vac": c.p_vac,
            "d_vac": c.d_vac,
            "rows": rows,
        })),
        Format::Csv => {
            let header = (0..=r).fold(String::from("replica,c1,c2,surplus1"), |mut h, i| {
                let _ = write!(h, ",pmf{i}");
                h
            });
            let lines: Vec<String> = samples
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    format!(
                        "{i},{},{},{},{}",
                        s.census.size(0),
                        s.census.size(1),
                        s.census.components.first().map_or(0, |c| c.surplus),
                        join(&s.pmf)
                    )
                })
                .collect();
            csv_body(&header, &lines)
        }
    };
    let mean_c1 =
        samples.iter().map(|s| s.census.size(0) as f64).sum::<f64>() / samples.len() as f64;
    Ok(Output {
        body,
        summary: format!(
            "vacant-set: r = {r}, n = {n}, u = {u:.5}, mean |C1| = {mean_c1:.1} over {} replica(s)",
            samples.len()
        ),
    })
}

/// Tree with children 0/1/3 in proportions 1/2, 1/4, 1/4 (`σ² = 3/2`) on
/// `4q + 1 ≈ n` vertices.
fn preset_tree(n: usize) -> ChildSequence {
    let q = (n.saturating_sub(1) / 4).max(1) as u64;
    ChildSequence::from_ecd(&[2 * q + 1, q, 0, q])
}

/// Degrees 1/2/3 in proportions 1/4, 1/2, 1/4 (`σ² = 1/2`) on `4q ≈ n`
/// vertices, nudged by `|k − 1|` degree changes so the sum is
/// `2(m̃ − 1) + 2k`.
fn preset_degrees(n: usize, k: u32) -> Result<DegreeSequence> {
    let q = (n / 4).max(k as usize + 2);
    let k = k as usize;
    // q ones, 2q twos, q threes sum to 8q = 2(4q − 1) + 2
    let mut d = vec![1u32; q];
    d.extend(std::iter::repeat_n(2, 2 * q));
    d.extend(std::iter::repeat_n(3, q));
    let target = 2 * (d.len() - 1) + 2 * k;
    let mut sum: usize = d.iter().map(|&x| x as usize).sum();
    let mut i = q;
    while sum < target && i < 3 * q {
        d[i] = 3;
        sum += 1;
        i += 1;
    }
    let mut j = 3 * q;
    while sum > target && j < 4 * q {
        d[j] = 2;
        sum -= 1;
        j += 1;
    }
    DegreeSequence::new(d)
}

fn tree_draw(
    cs: &ChildSequence,
    sigma: f64,
    factor: f64,
    l: usize,
    rng: &mut SimRng,
) -> Result<Vec<f64>> {
    use rand::Rng;
    let t = sample_tree(cs, rng)?;
    let scale = factor * sigma / (t.len() as f64).sqrt();
    let pts: Vec<usize> = (0..l).map(|_| rng.gen_range(0..t.len())).collect();
    let mut out = Vec::new();
    for i in 0..l {
        for j in i + 1..l {
            out.push(t.distance(pts[i], pts[j]) as f64 * scale);
        }
    }
    Ok(out)
}

fn graph_draw(d: &DegreeSequence, k: usize, l: usize, rng: &mut SimRng) -> Result<Vec<f64>> {
    use rand::Rng;
    let g = sample_connected_with(d, k, TiltOptions::default(), rng)?;
    let m = g.n() as f64;
    let p2: f64 = d
        .as_slice()
        .iter()
        .map(|&x| (x as f64).powi(2))
        .sum::<f64>()
        / m;
    let sigma = (p2 - 4.0).sqrt();
    let scale = sigma / m.sqrt();
    let adj = g.adjacency();
    let pts: Vec<usize> = (0..l).map(|_| rng.gen_range(0..g.n())).collect();
    let mut out = Vec::new();
    for i in 0..l {
        let dist = g.bfs(&adj, pts[i]);
        for j in i + 1..l {
            out.push(dist[pts[j]] as f64 * scale);
        }
    }
    Ok(out)
}

fn compare_cmd(
    common: &Common,
    preset: Preset,
    n: usize,
    k: u32,
    grid: usize,
    l: usize,
    threshold: f64,
) -> Result<Output> {
    if l < 2 {
        return Err(Error::Precondition("need l ≥ 2 points".into()));
    }
    let sigma = 1.5f64.sqrt();
    let cs = preset_tree(n);
    let crt = |rng: &mut SimRng, k: u32| -> Result<Vec<f64>> {
        Ok(build_mk(k, grid, ExcursionTilt::default(), rng)?.sample_distances(l, rng))
    };
    // side a uses even replica streams, side b odd ones
    let side = |offset: u64, f: &(dyn Fn(&mut SimRng) -> Result<Vec<f64>> + Sync)| {
        (0..common.reps)
            .into_par_iter()
            .map(|i| f(&mut replica_rng(common.seed, 2 * i as u64 + offset)))
            .collect::<Result<Vec<_>>>()
    };
    let (a, b) = match preset {
        Preset::TreeCrt => (
            side(0, &|rng| tree_draw(&cs, sigma, 1.0, l, rng))?,
            side(1, &|rng| crt(rng, 0))?,
        ),
        Preset::SelfTree => (
            side(0, &|rng| tree_draw(&cs, sigma, 1.0, l, rng))?,
            side(1, &|rng| tree_draw(&cs, sigma, 1.0, l, rng))?,
        ),
        Preset::TreeScaled => (
            side(0, &|rng| tree_draw(&cs, sigma, 1.0, l, rng))?,
            side(1, &|rng| tree_draw(&cs, sigma, 2.0, l, rng))?,
        ),
        Preset::ConnectedMk => {
            let d = preset_degrees(n, k)?;
            (
                side(0, &|rng| graph_draw(&d, k as usize, l, rng))?,
                side(1, &|rng| crt(rng, k))?,
            )
        }
    };
    let cmp = compare_distance_laws(&a, &b)?;
    let pass = cmp.passes(threshold);
    let preset_name = preset
        .to_possible_value()
        .map_or(String::new(), |v| v.get_name().to_owned());
    let body = match common.format {
        Format::Json => json_body(&json!({
            "preset": preset_name,
            "l": cmp.l,
            "reps": cmp.reps,
            "entries": cmp.entries.iter().map(|(s, p)| json!({ "statistic": s, "p_value": p })).collect::<Vec<_>>(),
            "min_p_value": cmp.min_p_value,
            "max_statistic": cmp.max_statistic,
            "threshold": threshold,
            "pass": pass,
        })),
        Format::Csv => csv_body(
            "entry,statistic,p_value",
            &cmp.entries
                .iter()
                .enumerate()
                .map(|(e, (s, p))| format!("{e},{s},{p}"))
                .collect::<Vec<_>>(),
        ),
    };
    Ok(Output {
        body,
        summary: format!(
            "compare {preset_name}: min p = {:.4}, {} at threshold {threshold}",
            cmp.min_p_value,
            if pass { "not rejected" } else { "rejected" }
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("critgraph").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn preset_degrees_have_requested_surplus() {
        for k in 0..3 {
            let d = preset_degrees(400, k).unwrap();
            assert_eq!(d.sum(), 2 * (d.len() as u64 - 1) + 2 * k as u64);
            assert_eq!(d.as_slice()[0], 1);
        }
    }

    #[test]
    fn preset_tree_is_tenable() {
        for n in [5, 100, 1001] {
            assert!(preset_tree(n).is_tree_tenable());
        }
    }

    #[test]
    fn sample_tree_table_reports_chi_square() {
        let out = run(&parse(&[
            "sample-tree",
            "--ecd",
            "0,0,0,2,2",
            "--reps",
            "2000",
            "--seed",
            "7",
        ]))
        .unwrap();
        let v: Value = serde_json::from_str(&out.body).unwrap();
        assert_eq!(v["support"], 2);
        assert!(v["chi_square"]["p_value"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn zero_reps_is_an_error() {
        assert!(run(&parse(&["sample-tree", "--ecd", "1,0", "--reps", "0"])).is_err());
    }

    #[test]
    fn self_preset_does_not_reject_and_scaled_does() {
        let same = run(&parse(&[
            "compare",
            "--preset",
            "self-tree",
            "--n",
            "401",
            "--reps",
            "300",
        ]))
        .unwrap();
        let v: Value = serde_json::from_str(&same.body).unwrap();
        assert_eq!(v["pass"], true);
        let scaled = run(&parse(&[
            "compare",
            "--preset",
            "tree-scaled",
            "--n",
            "401",
            "--reps",
            "300",
        ]))
        .unwrap();
        let v: Value = serde_json::from_str(&scaled.body).unwrap();
        assert_eq!(v["pass"], false);
    }
}
