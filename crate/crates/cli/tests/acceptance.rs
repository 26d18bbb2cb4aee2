//! Acceptance checks, one line per criterion. Runs as a plain binary so the
//! summary is printed even when everything passes; exits nonzero if any
//! criterion fails. Criteria that need the political blogs data are skipped
//! when it has not been fetched.

use std::process::Command;
use std::time::{Duration, Instant};

use lrdpg::cluster::{cluster_graph, Method};
use lrdpg::datasets::{karate, load_polblogs};
use lrdpg::embed::{fit_embedding, PairDesign};
use lrdpg::embed::regression::{fit_nonneg_logistic, DenseDesign, RegressionOptions};
use lrdpg::eval::{
    brute_force_assignment, latent_nmse, loglik_gradient, max_assignment, normalized_jaccard, oracle_mle, pearson,
    spearman, OracleOptions,
};
use lrdpg::embed::log_likelihood;
use lrdpg::generators::presets::{two_dense_clusters, Panel};
use lrdpg::generators::{sample_logistic_rdpg, sample_sbm, LatentConfig, SbmSpec};
use lrdpg::rng::{derive_seed, stream};
use lrdpg::spectral::{build_adjacency, eigh, top_eigenpairs, SymmetricMatrix};
use lrdpg::NodeLabels;
use lrdpg_cli::bench::{mean_scores, run_bench, BenchConfig};
use rand::Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn within(elapsed: Duration, budget: Duration) -> bool {
    elapsed <= budget
}

fn median(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let m = x.len() / 2;
    if x.len() % 2 == 1 {
        x[m]
    } else {
        0.5 * (x[m - 1] + x[m])
    }
}

/// True when the two labellings induce the same partition.
fn same_partition(a: &NodeLabels, b: &NodeLabels) -> bool {
    use std::collections::HashMap;
    let mut fwd = HashMap::new();
    let mut back = HashMap::new();
    a.as_slice().iter().zip(b.as_slice()).all(|(&x, &y)| {
        *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x
    })
}

fn karate_club() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.tsv");
    let bin = env!("CARGO_BIN_EXE_lrdpg");
    let start = Instant::now();
    let status = Command::new(bin)
        .args(["cluster", "--dataset", "karate", "--method", "logistic-rdpg", "--dim", "1", "--k", "2", "--out"])
        .arg(&pred)
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    if !status.success() {
        return Outcome::Fail("cluster command failed".into());
    }
    let eval = Command::new(bin)
        .args(["eval", "--dataset", "karate", "--pred"])
        .arg(&pred)
        .output()
        .unwrap();
    let printed = String::from_utf8_lossy(&eval.stdout).trim().to_string();

    let truth = karate().labels;
    let labels = std::fs::read_to_string(&pred).unwrap();
    let pred = NodeLabels::parse(&labels, 34).unwrap();
    // Misassigned nodes under the better of the two label matchings.
    let agree = truth.as_slice().iter().zip(pred.as_slice()).filter(|(a, b)| a == b).count();
    let wrong = agree.min(34 - agree);
    verdict(
        wrong == 0 && printed == "jaccard\t1.0" && within(elapsed, Duration::from_secs(1)),
        format!("{wrong} of 34 misassigned, eval printed {printed:?}, cluster took {elapsed:.2?}"),
    )
}

fn political_blogs() -> Outcome {
    let ds = match load_polblogs() {
        Ok(Some(ds)) => ds,
        Ok(None) => return Outcome::Skip("dataset not fetched (run `lrdpg fetch-data`)".into()),
        Err(e) => return Outcome::Fail(format!("dataset unreadable: {e}")),
    };
    let start = Instant::now();
    let g = &ds.graph;
    let emb = fit_embedding(g, 1).unwrap();
    let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
    let dist: Vec<f64> = emb.v.iter().map(|r| r.first().copied().unwrap_or(0.0).abs()).collect();
    let r = pearson(&deg, &dist).unwrap_or(f64::NAN);
    let pred = cluster_graph(g, Method::LogisticRdpg, 1, 2, 0).unwrap();
    let j = normalized_jaccard(&ds.labels, &pred, 2).unwrap();
    let elapsed = start.elapsed();
    verdict(
        (0.90..=1.0).contains(&r) && j > 0.75 && within(elapsed, Duration::from_secs(60)),
        format!(
            "{} nodes, corr(degree, |x|) = {r:.3}, jaccard = {j:.3}, {elapsed:.1?}",
            g.node_count()
        ),
    )
}

fn likelihood_near_optimality() -> Outcome {
    let start = Instant::now();
    let half = 0.2f64.sqrt();
    let mut gaps = Vec::new();
    for trial in 0..50u64 {
        let mut r = stream(derive_seed(3, &[trial]), 0);
        let v: Vec<Vec<f64>> = (0..40).map(|_| vec![r.gen_range(-half..=half)]).collect();
        let cfg = LatentConfig::new(v, 0.0).unwrap();
        let g = sample_logistic_rdpg(&cfg, derive_seed(3, &[trial, 1])).unwrap();
        let alg = fit_embedding(&g, 1).unwrap().log_likelihood(&g);
        let oracle = oracle_mle(&g, 1, derive_seed(3, &[trial, 2]), None, &OracleOptions::default()).unwrap();
        gaps.push((alg - oracle.loglik) / oracle.loglik.abs());
    }
    let elapsed = start.elapsed();
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let worst = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        mean >= -0.01 && worst >= -0.05 && within(elapsed, Duration::from_secs(300)),
        format!("mean relative gap {mean:.4} (need >= -0.01), worst {worst:.4} (need >= -0.05), {elapsed:.1?}"),
    )
}

fn degree_dominated_top_eigenvector() -> Outcome {
    let start = Instant::now();
    let (spec, truth) = two_dense_clusters(250, 1.0).unwrap();
    let (mut corr, mut ours, mut adj) = (Vec::new(), Vec::new(), Vec::new());
    for trial in 0..20u64 {
        let (g, _) = sample_sbm(&spec, derive_seed(4, &[trial])).unwrap();
        let deg: Vec<f64> = g.degrees().iter().map(|&d| d as f64).collect();
        let top = top_eigenpairs(&build_adjacency(&g), 1).unwrap();
        corr.push(pearson(&top.vectors[0], &deg).unwrap().abs());
        let first: Vec<Vec<f64>> = top.vectors[0].iter().map(|&x| vec![x]).collect();
        adj.push(latent_nmse(&truth, &first).unwrap());
        ours.push(latent_nmse(&truth, &fit_embedding(&g, 1).unwrap().v).unwrap());
    }
    let (c, o, a) = (median(corr), median(ours), median(adj));
    verdict(
        c > 0.5 && o < 0.2 && a > 0.5,
        format!(
            "median |corr(top eigenvector of A, degree)| {c:.3}, NMSE ours {o:.3}, NMSE adjacency {a:.3}, {:.1?}",
            start.elapsed()
        ),
    )
}

fn panel_ordering() -> Outcome {
    let start = Instant::now();
    let run = |panel: Panel, methods: Vec<Method>, grid: Vec<f64>| {
        let mut cfg = BenchConfig::for_panel(panel, 20, 5);
        cfg.methods = methods;
        cfg.grid = grid;
        run_bench(&cfg, std::io::sink()).unwrap()
    };
    let mean_at = |rows: &[lrdpg_cli::bench::BenchRow], m: Method| mean_scores(rows, m)[0].1;

    let a = run(Panel::A, vec![Method::LogisticRdpg, Method::Modularity], vec![Panel::A.strong_signal()]);
    let (a_ours, a_mod) = (mean_at(&a, Method::LogisticRdpg), mean_at(&a, Method::Modularity));

    let e = run(Panel::E, Method::ALL.to_vec(), vec![Panel::E.strong_signal()]);
    let e_ours = mean_at(&e, Method::LogisticRdpg);
    let e_best_other = Method::ALL[1..]
        .iter()
        .map(|&m| (m, mean_at(&e, m)))
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap();

    let mut trends = Vec::new();
    for panel in [Panel::A, Panel::E] {
        let rows = run(panel, vec![Method::LogisticRdpg], panel.default_grid());
        let curve = mean_scores(&rows, Method::LogisticRdpg);
        let (s, j): (Vec<f64>, Vec<f64>) = curve.into_iter().unzip();
        trends.push((panel, spearman(&s, &j).unwrap_or(f64::NAN)));
    }
    let elapsed = start.elapsed();
    let ok = a_ours > a_mod
        && e_ours > e_best_other.1
        && trends.iter().all(|t| t.1 > 0.9)
        && within(elapsed, Duration::from_secs(1200));
    verdict(
        ok,
        format!(
            "panel a: ours {a_ours:.3} vs modularity {a_mod:.3}; panel e: ours {e_ours:.3} vs best baseline {} {:.3}; \
             spearman a {:.3}, e {:.3}; {elapsed:.1?}",
            e_best_other.0, e_best_other.1, trends[0].1, trends[1].1
        ),
    )
}

fn one_dimensional_equivalence() -> Outcome {
    let mut differing = 0;
    for trial in 0..100u64 {
        let mut r = stream(derive_seed(6, &[trial]), 0);
        let n = r.gen_range(40..=300);
        let first = r.gen_range(n / 5..=n - n / 5);
        let p_in = r.gen_range(0.1..0.5);
        let p_out = r.gen_range(0.01..p_in);
        let spec = SbmSpec::planted(vec![first, n - first], p_in, p_out).unwrap();
        let (g, _) = sample_sbm(&spec, derive_seed(6, &[trial, 1])).unwrap();
        let seed = derive_seed(6, &[trial, 2]);
        let ours = cluster_graph(&g, Method::LogisticRdpg, 1, 2, seed).unwrap();
        let plain = cluster_graph(&g, Method::CenteredUnscaled, 1, 2, seed).unwrap();
        if !same_partition(&ours, &plain) {
            differing += 1;
        }
    }
    verdict(differing == 0, format!("{differing} of 100 graphs partitioned differently"))
}

fn numerical_invariants() -> Outcome {
    let start = Instant::now();
    let mut problems = Vec::new();

    // Eigen residuals and orthonormality.
    let mut worst_res = 0.0f64;
    let mut worst_orth = 0.0f64;
    for case in 0..100u64 {
        let mut r = stream(derive_seed(7, &[case]), 0);
        let n = r.gen_range(2..=80);
        let mut m = SymmetricMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                m.set(i, j, r.gen_range(-1.0..1.0));
            }
        }
        let fro = m.frobenius_norm();
        let es = if case % 2 == 0 { eigh(&m).unwrap() } else { top_eigenpairs(&m, (n / 4).max(1)).unwrap() };
        for (l, v) in es.values.iter().zip(&es.vectors) {
            let mv = m.mul_vec(v);
            let res = mv.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
            worst_res = worst_res.max(res / fro);
        }
        for (a, va) in es.vectors.iter().enumerate() {
            for (b, vb) in es.vectors.iter().enumerate() {
                let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst_orth = worst_orth.max((dot - target).abs());
            }
        }
    }
    if worst_res > 1e-8 || worst_orth > 1e-8 {
        problems.push(format!("eigen residual {worst_res:.1e}, orthonormality {worst_orth:.1e}"));
    }

    // Oracle gradient against central differences.
    let mut worst_fd = 0.0f64;
    for case in 0..10u64 {
        let mut r = stream(derive_seed(7, &[1000 + case]), 0);
        let n = r.gen_range(5..=20);
        let d = r.gen_range(1..=3);
        let v: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
        let mu = r.gen_range(-1.0..2.0);
        let g = sample_logistic_rdpg(&LatentConfig::new(v.clone(), mu).unwrap(), case).unwrap();
        let grad = loglik_gradient(&g, &v, mu);
        let h = 1e-5;
        for i in 0..n {
            for k in 0..d {
                let mut p = v.clone();
                p[i][k] += h;
                let mut m = v.clone();
                m[i][k] -= h;
                let fd = (log_likelihood(&g, &p, mu) - log_likelihood(&g, &m, mu)) / (2.0 * h);
                worst_fd = worst_fd.max((fd - grad.v[i][k]).abs() / grad.v[i][k].abs().max(1.0));
            }
        }
        let fd = (log_likelihood(&g, &v, mu + h) - log_likelihood(&g, &v, mu - h)) / (2.0 * h);
        worst_fd = worst_fd.max((fd - grad.mu).abs() / grad.mu.abs().max(1.0));
    }
    if worst_fd > 1e-5 {
        problems.push(format!("oracle gradient relative error {worst_fd:.1e}"));
    }

    // KKT conditions at every returned regression fit.
    let mut worst_kkt = 0.0f64;
    for case in 0..30u64 {
        let mut r = stream(derive_seed(7, &[2000 + case]), 0);
        let d = r.gen_range(1..=4);
        let m = r.gen_range(50..=2000);
        let truth: Vec<f64> = (0..d).map(|_| r.gen_range(-2.0..2.0)).collect();
        let mut x = Vec::with_capacity(m * d);
        let mut y = Vec::with_capacity(m);
        for _ in 0..m {
            let row: Vec<f64> = (0..d).map(|_| r.gen_range(-1.0..1.0)).collect();
            let z: f64 = row.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() - 0.5;
            y.push(r.gen::<f64>() < lrdpg::logistic(z));
            x.extend(row);
        }
        let fit = fit_nonneg_logistic(&DenseDesign::new(x, d, y).unwrap(), &RegressionOptions::default()).unwrap();
        worst_kkt = worst_kkt.max(fit.kkt_violation());
    }
    for case in 0..10u64 {
        let spec = SbmSpec::planted(vec![60, 60, 60], 0.3, 0.1).unwrap();
        let (g, _) = sample_sbm(&spec, case).unwrap();
        let emb = fit_embedding(&g, 1 + case as usize % 4).unwrap();
        worst_kkt = worst_kkt.max(emb.fit.kkt_violation());
        let _ = PairDesign::new(&g, &emb.eigvecs);
    }
    if worst_kkt > 1e-8 {
        problems.push(format!("KKT violation {worst_kkt:.1e}"));
    }

    // Hungarian against brute force.
    let mut mismatches = 0;
    for case in 0..1000u64 {
        let mut r = stream(derive_seed(7, &[3000 + case]), 0);
        let k = r.gen_range(1..=6);
        let s: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| r.gen_range(0.0..1.0)).collect()).collect();
        let (_, fast) = max_assignment(&s).unwrap();
        let (_, slow) = brute_force_assignment(&s);
        if (fast - slow).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    if mismatches > 0 {
        problems.push(format!("{mismatches} Hungarian mismatches"));
    }

    // Worked scoring example.
    let truth = NodeLabels::from_assignments(vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
    let pred = NodeLabels::from_assignments(vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
    let j = normalized_jaccard(&truth, &pred, 2).unwrap();
    if (j - 0.8).abs() > 1e-12 {
        problems.push(format!("worked jaccard example gave {j}"));
    }

    let elapsed = start.elapsed();
    if !within(elapsed, Duration::from_secs(120)) {
        problems.push(format!("took {elapsed:.1?}"));
    }
    let detail = format!(
        "eigen residual {worst_res:.1e}, orthonormality {worst_orth:.1e}, gradient {worst_fd:.1e}, KKT {worst_kkt:.1e}, \
         Hungarian mismatches {mismatches}, worked jaccard {j}, {elapsed:.1?}"
    );
    verdict(problems.is_empty(), detail)
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("karate club factions", karate_club),
        ("political blogs", political_blogs),
        ("likelihood near-optimality", likelihood_near_optimality),
        ("degree-dominated top eigenvector", degree_dominated_top_eigenvector),
        ("benchmark panel ordering", panel_ordering),
        ("d=1 equivalence", one_dimensional_equivalence),
        ("numerical invariants", numerical_invariants),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let line = match check() {
            Outcome::Pass(d) => format!("criterion {id} PASS  {name}: {d}"),
            Outcome::Skip(d) => format!("criterion {id} SKIP  {name}: {d}"),
            Outcome::Fail(d) => {
                failed += 1;
                format!("criterion {id} FAIL  {name}: {d}")
            }
        };
        println!("{line}");
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
