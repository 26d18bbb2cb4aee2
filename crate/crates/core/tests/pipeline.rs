use lrdpg::cluster::{cluster_graph, Method};
use lrdpg::embed::fit_embedding;
use lrdpg::eval::{latent_nmse, normalized_jaccard};
use lrdpg::generators::{sample_erdos_renyi, sample_logistic_rdpg, sample_sbm, LatentConfig, SbmSpec};
use lrdpg::rng::stream;
use lrdpg::spectral::{build_centered, top_eigenpairs, SymmetricMatrix};
use rand::Rng;

fn rayleigh(m: &SymmetricMatrix, v: &[f64]) -> f64 {
    let mv = m.mul_vec(v);
    let num: f64 = mv.iter().zip(v).map(|(a, b)| a * b).sum();
    num / v.iter().map(|x| x * x).sum::<f64>()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Maximizes the Rayleigh quotient over the unit sphere by pattern search
/// from several random starts, without any eigen decomposition.
fn sphere_search(m: &SymmetricMatrix, seed: u64) -> Vec<f64> {
    let n = m.dim();
    let mut r = stream(seed, 0);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        normalize(&mut v);
        let mut value = rayleigh(m, &v);
        let mut step = 0.5;
        while step > 1e-10 {
            let mut moved = false;
            for i in 0..n {
                for sign in [1.0, -1.0] {
                    let mut trial = v.clone();
                    trial[i] += sign * step;
                    normalize(&mut trial);
                    let t = rayleigh(m, &trial);
                    if t > value {
                        (v, value, moved) = (trial, t, true);
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        if best.as_ref().map_or(true, |b| value > b.0) {
            best = Some((value, v));
        }
    }
    best.unwrap().1
}

#[test]
fn top_centered_eigenvector_maximizes_the_quadratic_form() {
    let mut checked = 0;
    for seed in 0..60u64 {
        let n = 4 + seed as usize % 5;
        let g = sample_erdos_renyi(n, 0.5, seed).unwrap();
        let Ok(b) = build_centered(&g) else { continue };
        let top = top_eigenpairs(&b, 2.min(n)).unwrap();
        // A near-degenerate top eigenvalue leaves the direction undetermined.
        if top.values[0] - top.values[1] < 0.1 {
            continue;
        }
        let found = sphere_search(&b, seed);
        let cos: f64 = found.iter().zip(&top.vectors[0]).map(|(a, b)| a * b).sum::<f64>().abs();
        let angle = cos.min(1.0).acos();
        assert!(angle <= 1e-3, "seed {seed}: angle {angle}");
        checked += 1;
    }
    assert!(checked >= 30, "only {checked} graphs had a clear top eigenvalue");
}

#[test]
fn planted_partition_is_recovered() {
    let spec = SbmSpec::planted(vec![100, 100], 0.2, 0.02).unwrap();
    let (g, truth) = sample_sbm(&spec, 4).unwrap();
    let pred = cluster_graph(&g, Method::LogisticRdpg, 1, 2, 4).unwrap();
    assert_eq!(normalized_jaccard(&truth, &pred, 2).unwrap(), 1.0);
}

#[test]
fn latent_positions_are_recovered_in_two_dimensions() {
    let mut r = stream(9, 0);
    let v: Vec<Vec<f64>> = (0..400).map(|_| vec![r.gen_range(-1.5..1.5), r.gen_range(-1.5..1.5)]).collect();
    let g = sample_logistic_rdpg(&LatentConfig::new(v.clone(), 1.0).unwrap(), 9).unwrap();
    let emb = fit_embedding(&g, 2).unwrap();
    assert_eq!(emb.kept_dims.len(), 2);
    let nmse = latent_nmse(&v, &emb.full_latent()).unwrap();
    assert!(nmse < 0.2, "{nmse}");
    assert!((emb.mu_hat - 1.0).abs() < 0.3, "{}", emb.mu_hat);
}
