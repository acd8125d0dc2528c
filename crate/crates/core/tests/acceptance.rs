//! Acceptance suite. Each test writes one `criterion N ... PASS|FAIL` line to
//! stderr, visible without `--nocapture`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use critgraph::degrees::{ChildSequence, DegreeSequence};
use critgraph::exact::{enumerate, enumerate_simple_graphs, identity_corpus, wright_ratio};
use critgraph::graphs::{
    cm_pmf, component_census, enumerate_pairings, sample_cm, sample_connected, sample_simple,
    MultiGraph,
};
use critgraph::limits::{
    area_moment, build_mk, reflected_process, ExcursionTilt, ReflectedOptions,
};
use critgraph::mmspace::{compare_distance_laws, gh_exact, FiniteMMSpace};
use critgraph::plane_tree::{enumerate_trees, factorial, sample_tree};
use critgraph::rng::{replica_rng, rng_from_seed};
use critgraph::stats::{chi_square_gof, ks_two_sample, quantile_sorted};
use critgraph::surgery::PairSetRule;
use critgraph::vacant::{annealed_pipeline, total_variation, vacant_critical, BaseModel};
use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

fn report(id: u32, name: &str, pass: bool, start: Instant, detail: String) {
    // straight to the stderr handle so the line survives output capture
    let _ = writeln!(
        std::io::stderr(),
        "criterion {id:>2} {name:<28} {} ({:.1}s) {detail}",
        if pass { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
}

fn chi_square_uniform<K: Ord>(draws: impl Iterator<Item = K>, support: usize) -> (usize, f64) {
    let mut counts: BTreeMap<K, u64> = BTreeMap::new();
    for k in draws {
        *counts.entry(k).or_default() += 1;
    }
    let mut obs: Vec<u64> = counts.values().copied().collect();
    let seen = obs.len();
    obs.resize(support.max(seen), 0);
    let probs = vec![1.0 / obs.len() as f64; obs.len()];
    (seen, chi_square_gof(&obs, &probs).p_value)
}

#[test]
fn criterion_01_counting_identity() {
    let start = Instant::now();
    let (mut checked, mut failures) = (0usize, Vec::new());
    for m_tilde in 2..=7 {
        for k in 0..=2 {
            for d in identity_corpus(m_tilde, k) {
                let r = enumerate(&d, k, PairSetRule::SimpleSurgery).unwrap();
                checked += 1;
                if !r.identity_holds {
                    failures.push(format!("{:?} k={k}", d.as_slice()));
                }
            }
        }
    }
    let pass = failures.is_empty() && checked > 0;
    report(
        1,
        "counting identity",
        pass,
        start,
        format!("{checked} cases, failures {failures:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_02_sampler_uniformity() {
    let start = Instant::now();
    let draws = 100_000;

    let cs = ChildSequence::from_ecd(&[2, 3, 1]);
    let support_a = enumerate_trees(&cs, 1000).unwrap().len();
    let mut rng = rng_from_seed(201);
    let (seen_a, p_a) = chi_square_uniform(
        (0..draws).map(|_| sample_tree(&cs, &mut rng).unwrap().preorder_counts()),
        support_a,
    );

    let d = DegreeSequence::new(vec![1, 2, 2, 2, 3]).unwrap();
    let support_b = enumerate_simple_graphs(&d, true).unwrap();
    let mut rng = rng_from_seed(202);
    let (seen_b, p_b) = chi_square_uniform(
        (0..draws).map(|_| sample_connected(&d, 1, &mut rng).unwrap().canonical()),
        support_b.len(),
    );

    let d = DegreeSequence::new(vec![1, 1, 2, 2]).unwrap();
    let support_c = enumerate_simple_graphs(&d, false).unwrap();
    let mut rng = rng_from_seed(203);
    let (seen_c, p_c) = chi_square_uniform(
        (0..draws).map(|_| {
            sample_simple(&d, &mut rng, 10_000)
                .unwrap()
                .graph
                .canonical()
        }),
        support_c.len(),
    );

    let pass = support_a == 10
        && support_b.len() == 6
        && seen_a == support_a
        && seen_b == support_b.len()
        && seen_c == support_c.len()
        && p_a > 0.001
        && p_b > 0.001
        && p_c > 0.001;
    report(
        2,
        "sampler uniformity",
        pass,
        start,
        format!(
            "trees {seen_a}/{support_a} p={p_a:.4}; connected {seen_b}/{} p={p_b:.4}; simple {seen_c}/{} p={p_c:.4}",
            support_b.len(),
            support_c.len()
        ),
    );
    assert!(pass);
}

/// Uniform random degree sequence of a tree on `m` vertices: degrees are
/// one plus the multiplicities in a uniform Prüfer word.
fn random_tree_degrees(m: usize, rng: &mut impl Rng) -> Vec<u32> {
    let mut d = vec![1u32; m];
    for _ in 0..m - 2 {
        d[rng.gen_range(0..m)] += 1;
    }
    d
}

#[test]
fn criterion_03_wright_ratio_k0() {
    let start = Instant::now();
    let mut rng = rng_from_seed(301);
    let mut bad = Vec::new();
    for _ in 0..20 {
        let m = rng.gen_range(3..=9);
        let d = random_tree_degrees(m, &mut rng);
        let ds = DegreeSequence::new(d.clone()).unwrap();
        let w = wright_ratio(&ds, 0).unwrap();
        // Cayley: (m − 2)! / ∏ (d_i − 1)! labeled trees
        let cayley = BigRational::new(
            factorial(m as u64 - 2).into(),
            d.iter()
                .fold(BigUint::one(), |acc, &x| acc * factorial(x as u64 - 1))
                .into(),
        );
        let count = enumerate_simple_graphs(&ds, true).unwrap().len();
        if !w.rational.is_one() || cayley != BigRational::from_integer(count.into()) {
            bad.push(d);
        }
    }
    report(
        3,
        "wright ratio k=0",
        bad.is_empty(),
        start,
        format!("20 sequences, failures {bad:?}"),
    );
    assert!(bad.is_empty());
}

#[test]
fn criterion_04_excursion_area() {
    let start = Instant::now();
    let target = (PI / 8.0).sqrt();
    let e = area_moment(1, 10_000, 1_000_000, 401).unwrap();
    let allowance = 0.005;
    let err = (e.value - target).abs();
    let pass = err <= 3.0 * e.standard_error + allowance;
    report(
        4,
        "excursion area moment",
        pass,
        start,
        format!(
            "mean {:.5} se {:.5} target {target:.5} |err| {err:.5} (strict 3se: {})",
            e.value,
            e.standard_error,
            err <= 3.0 * e.standard_error
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_05_cm_pmf() {
    let start = Instant::now();
    let d = DegreeSequence::new(vec![2, 2]).unwrap();
    let mut rng = rng_from_seed(501);
    let draws = 100_000;
    let double = (0..draws)
        .filter(|_| {
            let g = sample_cm(&d, &mut rng).unwrap();
            g.edges().iter().all(|&(a, b)| a != b)
        })
        .count();
    let p_hat = double as f64 / draws as f64;
    let half_width = 2.5758 * (2.0 / 9.0 / draws as f64).sqrt();
    let freq_ok = (p_hat - 2.0 / 3.0).abs() <= half_width;

    let mut sums_ok = true;
    let mut sequences = 0;
    for n in 1..=4usize {
        let mut d = vec![0u32; n];
        loop {
            if d.iter().sum::<u32>() % 2 == 0 && d.iter().any(|&x| x > 0) {
                let ds = DegreeSequence::new(d.clone()).unwrap();
                let mut distinct: BTreeMap<Vec<(usize, usize)>, MultiGraph> = BTreeMap::new();
                for g in enumerate_pairings(&ds, 1_000_000).unwrap() {
                    distinct.entry(g.canonical()).or_insert(g);
                }
                let total = distinct
                    .values()
                    .fold(BigRational::zero(), |acc, g| acc + cm_pmf(g));
                sums_ok &= total.is_one();
                sequences += 1;
            }
            let mut i = 0;
            while i < n && d[i] == 3 {
                d[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
            d[i] += 1;
        }
    }
    let pass = freq_ok && sums_ok;
    report(
        5,
        "configuration model pmf",
        pass,
        start,
        format!("p_hat {p_hat:.4} ± {half_width:.4} vs 2/3; pmf sums exact over {sequences} sequences: {sums_ok}"),
    );
    assert!(pass);
}

fn largest_scaled(n: usize, seed: u64, reps: usize) -> Vec<f64> {
    let d = DegreeSequence::two_atom(3 * n / 4, 1, n / 4, 3).unwrap();
    let mut out: Vec<f64> = (0..reps)
        .map(|i| {
            let mut rng = replica_rng(seed, i as u64);
            let g = sample_simple(&d, &mut rng, 100_000).unwrap().graph;
            component_census(&g).largest_size() as f64 / (n as f64).powf(2.0 / 3.0)
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn criterion_06_critical_scaling() {
    let start = Instant::now();
    let reps = 200;
    let medians: Vec<(usize, f64)> = [1_000usize, 10_000, 30_000]
        .iter()
        .map(|&n| {
            (
                n,
                quantile_sorted(&largest_scaled(n, 600 + n as u64, reps), 0.5),
            )
        })
        .collect();
    let hi = medians.iter().map(|m| m.1).fold(0.0, f64::max);
    let lo = medians.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let band_ok = hi / lo <= 2.0;

    let graph = largest_scaled(30_000, 6030, reps);
    // 3n/4 of degree 1, n/4 of degree 3: σ = (3/2, 3, 15/2), λ = 0
    let mu = critgraph::degrees::DriftParams::from_moments(1.5, 3.0, 7.5);
    let reference: Vec<f64> = (0..2000)
        .map(|i| {
            let mut rng = replica_rng(6100, i);
            reflected_process(mu, 0.0, ReflectedOptions::default(), &mut rng)
                .unwrap()
                .largest_length()
        })
        .collect();
    let ks = ks_two_sample(&graph, &reference);
    let pass = band_ok && ks.p_value > 0.001;
    report(
        6,
        "critical scaling",
        pass,
        start,
        format!(
            "medians {medians:?} ratio {:.3}; KS D={:.4} p={:.4}",
            hi / lo,
            ks.statistic,
            ks.p_value
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_07_vacant_set() {
    let start = Instant::now();
    let (r, n) = (3u32, 100_000usize);
    let c = vacant_critical(r, 0.0).unwrap();
    let u = c.u_n(n);
    let mut pooled = vec![0.0; r as usize + 1];
    let reps = 50;
    for i in 0..reps {
        let mut rng = replica_rng(701, i);
        let s = annealed_pipeline(r, u, n, BaseModel::Simple, &mut rng).unwrap();
        for (p, q) in pooled.iter_mut().zip(&s.pmf) {
            *p += q / reps as f64;
        }
    }
    let tv = total_variation(&pooled, &c.d_vac);
    let giant = |u: f64, seed: u64| -> Vec<f64> {
        (0..10)
            .map(|i| {
                let mut rng = replica_rng(seed, i);
                let s = annealed_pipeline(r, u, n, BaseModel::Simple, &mut rng).unwrap();
                s.census.largest_size() as f64 / n as f64
            })
            .collect()
    };
    let sub = giant(c.u_star / 2.0, 702);
    let sup = giant(3.0 * c.u_star, 703);
    let sub_ok = sub.iter().all(|&x| x > 0.1);
    let sup_ok = sup.iter().all(|&x| x < 0.01);
    let pass = tv < 0.05 && sub_ok && sup_ok;
    let fmt = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(0.0, f64::max);
        format!("[{lo:.4}, {hi:.4}]")
    };
    report(
        7,
        "vacant set",
        pass,
        start,
        format!(
            "TV {tv:.4} pmf {pooled:.4?}; |C1|/n at u*/2 {} at 3u* {}",
            fmt(&sub),
            fmt(&sup)
        ),
    );
    assert!(pass);
}

fn tree_distances(cs: &ChildSequence, sigma: f64, l: usize, rng: &mut impl Rng) -> Vec<f64> {
    let t = sample_tree(cs, rng).unwrap();
    let scale = sigma / (t.len() as f64).sqrt();
    let pts: Vec<usize> = (0..l).map(|_| rng.gen_range(0..t.len())).collect();
    let mut out = Vec::new();
    for i in 0..l {
        for j in i + 1..l {
            out.push(t.distance(pts[i], pts[j]) as f64 * scale);
        }
    }
    out
}

fn graph_distances(
    d: &DegreeSequence,
    k: usize,
    sigma: f64,
    l: usize,
    rng: &mut impl Rng,
) -> Vec<f64> {
    let g = sample_connected(d, k, rng).unwrap();
    let adj = g.adjacency();
    let scale = sigma / (g.n() as f64).sqrt();
    let pts: Vec<usize> = (0..l).map(|_| rng.gen_range(0..g.n())).collect();
    let mut out = Vec::new();
    for i in 0..l {
        let dist = g.bfs(&adj, pts[i]);
        for j in i + 1..l {
            out.push(dist[pts[j]] as f64 * scale);
        }
    }
    out
}

#[test]
fn criterion_08_gromov_weak_agreement() {
    let start = Instant::now();
    let (reps, l, grid) = (1000u64, 4, 10_000);

    // children 0/1/3 with probabilities 1/2, 1/4, 1/4: σ² = 1.5
    let cs = ChildSequence::from_ecd(&[5001, 2500, 0, 2500]);
    let trees: Vec<Vec<f64>> = (0..reps)
        .map(|i| tree_distances(&cs, 1.5f64.sqrt(), l, &mut replica_rng(801, i)))
        .collect();
    let crt: Vec<Vec<f64>> = (0..reps)
        .map(|i| {
            let mut rng = replica_rng(802, i);
            build_mk(0, grid, ExcursionTilt::default(), &mut rng)
                .unwrap()
                .sample_distances(l, &mut rng)
        })
        .collect();
    let a = compare_distance_laws(&trees, &crt).unwrap();

    // degrees 1/2/3 with probabilities 1/4, 1/2, 1/4 and k = 1: σ² = 0.5
    let mut d = vec![1u32; 2500];
    d.extend(std::iter::repeat_n(2, 5000));
    d.extend(std::iter::repeat_n(3, 2500));
    let d = DegreeSequence::new(d).unwrap();
    let graphs: Vec<Vec<f64>> = (0..reps)
        .map(|i| graph_distances(&d, 1, 0.5f64.sqrt(), l, &mut replica_rng(803, i)))
        .collect();
    let mk: Vec<Vec<f64>> = (0..reps)
        .map(|i| {
            let mut rng = replica_rng(804, i);
            build_mk(1, grid, ExcursionTilt::default(), &mut rng)
                .unwrap()
                .sample_distances(l, &mut rng)
        })
        .collect();
    let b = compare_distance_laws(&graphs, &mk).unwrap();

    let pass = a.passes(0.001) && b.passes(0.001);
    report(
        8,
        "gromov-weak agreement",
        pass,
        start,
        format!(
            "trees vs CRT min p={:.4} max D={:.4}; connected k=1 vs M(1) min p={:.4} max D={:.4}",
            a.min_p_value, a.max_statistic, b.min_p_value, b.max_statistic
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_09_exact_gh() {
    let start = Instant::now();
    let mut rng = rng_from_seed(901);
    let point = FiniteMMSpace::new(1, vec![0.0], vec![1.0]).unwrap();
    let two = |a: f64| FiniteMMSpace::new(2, vec![0.0, a, a, 0.0], vec![0.5, 0.5]).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a: f64 = rng.gen_range(0.01..10.0);
        let b: f64 = rng.gen_range(0.01..10.0);
        let x = two(a);
        worst = worst.max(gh_exact(&x, &x).unwrap());
        worst = worst.max((gh_exact(&point, &x).unwrap() - a / 2.0).abs());
        worst = worst.max((gh_exact(&x, &two(b)).unwrap() - (a - b).abs() / 2.0).abs());
    }
    let pass = worst < 1e-12;
    report(
        9,
        "exact gromov-hausdorff",
        pass,
        start,
        format!("max error {worst:e} over 100 draws"),
    );
    assert!(pass);
}

fn run_cli(args: &[&str], threads: &str, via_env: bool, out: &std::path::Path) -> Vec<u8> {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_critgraph"));
    cmd.args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CRITGRAPH_THREADS");
    if via_env {
        cmd.env("CRITGRAPH_THREADS", threads);
    } else {
        cmd.args(["--threads", threads]);
    }
    let status = cmd.output().expect("binary runs");
    assert!(
        status.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&status.stderr)
    );
    std::fs::read(out).expect("output written")
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let deg = dir.path().join("d.txt");
    std::fs::write(&deg, "1\n2\n2\n2\n3\n").unwrap();
    let reg = dir.path().join("r.json");
    std::fs::write(&reg, serde_json_array(&[3; 40])).unwrap();
    let weights = dir.path().join("w.txt");
    std::fs::write(&weights, "0.1 0.2 0.3 0.4").unwrap();
    let d = deg.to_str().unwrap();
    let r = reg.to_str().unwrap();
    let w = weights.to_str().unwrap();
    let commands: Vec<Vec<&str>> = vec![
        vec!["sample-tree", "--ecd", "0,0,0,2,2", "--reps", "500"],
        vec!["sample-tree", "--ecd", "3,0,1,0,0", "--format", "csv"],
        vec![
            "sample-connected",
            "--degrees",
            d,
            "--k",
            "1",
            "--reps",
            "20",
        ],
        vec![
            "sample-connected",
            "--degrees",
            d,
            "--k",
            "1",
            "--reps",
            "5",
            "--pool",
            "--format",
            "csv",
        ],
        vec!["sample-cm", "--degrees", r, "--reps", "8", "--census"],
        vec![
            "sample-cm",
            "--degrees",
            r,
            "--reps",
            "3",
            "--format",
            "csv",
        ],
        vec!["sample-simple", "--degrees", r, "--reps", "8"],
        vec![
            "vacant-set",
            "--r",
            "3",
            "--a0",
            "0",
            "--n",
            "2000",
            "--reps",
            "6",
        ],
        vec![
            "vacant-set",
            "--n",
            "1000",
            "--reps",
            "3",
            "--model",
            "cm",
            "--format",
            "csv",
        ],
        vec!["enumerate", "--degrees", d, "--k", "1"],
        vec!["wright", "--degrees", d, "--k", "1", "--format", "csv"],
        vec![
            "limit-sim",
            "--construction",
            "mk",
            "--k",
            "2",
            "--grid",
            "300",
            "--reps",
            "6",
            "--samples",
            "3",
        ],
        vec![
            "limit-sim",
            "--construction",
            "md",
            "--grid",
            "100",
            "--reps",
            "3",
            "--components",
            "2",
            "--format",
            "csv",
        ],
        vec![
            "limit-sim",
            "--construction",
            "mvac",
            "--grid",
            "100",
            "--reps",
            "2",
        ],
        vec![
            "compare", "--preset", "tree-crt", "--n", "201", "--grid", "200", "--reps", "40",
        ],
        vec![
            "compare",
            "--preset",
            "connected-mk",
            "--n",
            "80",
            "--grid",
            "200",
            "--reps",
            "20",
            "--format",
            "csv",
        ],
        vec!["concentration", "--weights", w, "--reps", "200"],
        vec![
            "concentration",
            "--n",
            "50",
            "--reps",
            "100",
            "--format",
            "csv",
        ],
    ];
    let mut bad = Vec::new();
    for (i, c) in commands.iter().enumerate() {
        let mut args = c.clone();
        args.extend(["--seed", "42"]);
        let out = |tag: &str| dir.path().join(format!("out-{i}-{tag}"));
        let runs = [
            run_cli(&args, "1", false, &out("a")),
            run_cli(&args, "1", false, &out("b")),
            run_cli(&args, "4", false, &out("c")),
            run_cli(&args, "4", true, &out("d")),
        ];
        if runs.iter().any(|r| r != &runs[0] || r.is_empty()) {
            bad.push(c.join(" "));
        }
    }
    let pass = bad.is_empty();
    report(
        10,
        "determinism",
        pass,
        start,
        format!(
            "{} commands x 4 runs (threads 1, 1, 4, env 4); differing: {bad:?}",
            commands.len()
        ),
    );
    assert!(pass);
}

fn serde_json_array(xs: &[u32]) -> String {
    format!(
        "[{}]",
        xs.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    )
}
