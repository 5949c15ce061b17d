use packbound_core::sdp::{solve, SolverSettings};
use packbound_core::theta::{alpha_bruteforce, theta_prime, theta_prime_sdp, WeightedGraph};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn settings() -> SolverSettings {
    SolverSettings::default()
}

fn random_graph(rng: &mut impl Rng, n: usize, p: f64, weighted: bool) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let w = (0..n).map(|_| if weighted { rng.gen_range(0.0..2.0) } else { 1.0 }).collect();
    WeightedGraph::new(n, &edges, w).unwrap()
}

/// Independent oracle: best weight over all subsets, with independence of a
/// subset derived from the independence of the subset minus its top vertex.
fn alpha_subset_dp(g: &WeightedGraph) -> f64 {
    let n = g.n_vertices();
    let adj: Vec<usize> = (0..n).map(|x| (0..n).filter(|&y| g.has_edge(x, y)).map(|y| 1 << y).sum()).collect();
    let mut indep = vec![false; 1 << n];
    let mut weight = vec![0.0; 1 << n];
    indep[0] = true;
    let mut best: f64 = 0.0;
    for s in 1usize..1 << n {
        let top = usize::BITS as usize - 1 - s.leading_zeros() as usize;
        let rest = s & !(1 << top);
        indep[s] = indep[rest] && adj[top] & rest == 0;
        weight[s] = weight[rest] + g.weights()[top];
        if indep[s] {
            best = best.max(weight[s]);
        }
    }
    best
}

#[test]
fn sdp_optimum_examples() {
    let cases = [
        (WeightedGraph::complete(3).unwrap(), 1.0),
        (WeightedGraph::unweighted(4, &[]).unwrap(), 4.0),
        (WeightedGraph::cycle(5).unwrap(), 5f64.sqrt()),
    ];
    for (g, expected) in cases {
        let s = solve(&theta_prime_sdp(&g), &settings()).unwrap();
        assert!((-s.primal_value - expected).abs() < 1e-6, "{} vs {expected}", -s.primal_value);
    }
}

#[test]
fn theta_examples() {
    let (v, cert) = theta_prime(&WeightedGraph::petersen(), &settings()).unwrap();
    assert!((v - 4.0).abs() < 1e-5, "{v}");
    assert!(cert.replay(&WeightedGraph::petersen()).unwrap().is_valid(1e-9));

    let c5 = WeightedGraph::cycle(5).unwrap().with_weights(vec![2.0; 5]).unwrap();
    let (v, _) = theta_prime(&c5, &settings()).unwrap();
    assert!((v - 2.0 * 5f64.sqrt()).abs() < 1e-6, "{v}");

    let single = WeightedGraph::new(1, &[], vec![7.0]).unwrap();
    let (v, cert) = theta_prime(&single, &settings()).unwrap();
    assert!((v - 7.0).abs() < 1e-7);
    assert!((cert.matrix.get(0, 0) - 7.0).abs() < 1e-7);
}

#[test]
fn zero_weights_short_circuit() {
    let g = WeightedGraph::new(3, &[(0, 1)], vec![0.0; 3]).unwrap();
    let (v, cert) = theta_prime(&g, &settings()).unwrap();
    assert_eq!(v, 0.0);
    assert!(cert.replay(&g).unwrap().is_valid(0.0));
}

#[test]
fn alpha_matches_subset_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..30 {
        let p = rng.gen_range(0.1..0.7);
        let g = random_graph(&mut rng, 12, p, true);
        let (a, witness) = alpha_bruteforce(&g).unwrap();
        assert!(g.is_independent(&witness));
        assert!((g.set_weight(&witness) - a).abs() < 1e-12);
        assert!((a - alpha_subset_dp(&g)).abs() < 1e-12);
    }
}

#[test]
fn sandwich_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..25 {
        let n = rng.gen_range(1..=14);
        let p = rng.gen_range(0.1..0.8);
        let g = random_graph(&mut rng, n, p, true);
        let (alpha, _) = alpha_bruteforce(&g).unwrap();
        let (theta, cert) = theta_prime(&g, &settings()).unwrap();
        assert!(alpha <= theta + 1e-6, "alpha {alpha} theta {theta}");
        assert!(cert.replay(&g).unwrap().is_valid(1e-9));
    }
}

#[test]
fn edge_monotonicity() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.gen_range(4..=10);
        let g = random_graph(&mut rng, n, 0.3, true);
        let (before, _) = theta_prime(&g, &settings()).unwrap();
        let mut h = g.clone();
        let nonedges: Vec<_> = g.nonedges().collect();
        if nonedges.is_empty() {
            continue;
        }
        let (u, v) = nonedges[rng.gen_range(0..nonedges.len())];
        h.add_edge(u, v).unwrap();
        let (after, _) = theta_prime(&h, &settings()).unwrap();
        assert!(after <= before + 1e-7, "{after} > {before}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn weight_scaling(seed in any::<u64>(), c in 0.01f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=9);
        let g = random_graph(&mut rng, n, 0.4, true);
        let (base, _) = theta_prime(&g, &settings()).unwrap();
        let scaled_w = g.weights().iter().map(|w| c * w).collect();
        let (scaled, _) = theta_prime(&g.with_weights(scaled_w).unwrap(), &settings()).unwrap();
        prop_assert!((scaled - c * base).abs() <= 1e-7 * (c * base).abs().max(1e-300) + 1e-12,
            "scaled {} vs {}", scaled, c * base);
    }
}
