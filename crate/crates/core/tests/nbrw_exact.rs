//! Cross-checks the k-step distribution operator against a brute-force
//! enumeration of every non-backtracking path. The enumeration touches
//! d·(d−1)^(k−1) paths per start, which stays tiny for the graphs here.

use nbrw::graph::{named_graph, RegularGraph};
use nbrw::spectral::{nbrw_k_step_vertex_distribution, short_return_mass_M};

/// Endpoint distribution of a k-step non-backtracking walk from `start`,
/// by summing the probability of each admissible path. The expansion is a
/// worklist over partial paths (predecessor, current vertex, steps left,
/// path probability) rather than recursion.
fn enumerate_endpoints(g: &RegularGraph, start: u32, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; g.vertex_count()];
    let mut stack = vec![(None::<u32>, start, k, 1.0f64)];
    while let Some((prev, cur, left, prob)) = stack.pop() {
        if left == 0 {
            out[cur as usize] += prob;
            continue;
        }
        let choices: Vec<u32> = g
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&w| Some(w) != prev)
            .collect();
        let p = prob / choices.len() as f64;
        for w in choices {
            stack.push((Some(cur), w, left - 1, p));
        }
    }
    out
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn operator_matches_path_enumeration() {
    for name in ["k4", "petersen"] {
        let g = named_graph(name).unwrap();
        for start in 0..g.vertex_count() as u32 {
            for k in 0..=12 {
                let dist = nbrw_k_step_vertex_distribution::<f64>(&g, start, k).unwrap();
                let oracle = enumerate_endpoints(&g, start, k);
                let diff = max_abs_diff(dist.probs(), &oracle);
                assert!(
                    diff <= 1e-12,
                    "{name} start={start} k={k}: operator vs enumeration differ by {diff:e}"
                );
                let mass: f64 = dist.probs().iter().sum();
                assert!((mass - 1.0).abs() <= 1e-12, "{name} k={k}: mass {mass}");
            }
        }
    }
}

#[test]
fn zero_entries_below_graph_distance_are_exact() {
    // No rounding tolerance here: entries that must vanish for reachability
    // reasons have to come out as literal 0.0 from the operator.
    for name in ["k4", "petersen", "q3", "k33"] {
        let g = named_graph(name).unwrap();
        let n = g.vertex_count();
        for start in 0..n as u32 {
            for k in 0..=6usize {
                let dist = nbrw_k_step_vertex_distribution::<f64>(&g, start, k).unwrap();
                for v in 0..n as u32 {
                    let far = match g.pairwise_distance(start, v).unwrap() {
                        None => true,
                        Some(dist) => dist as usize > k,
                    };
                    if far {
                        assert_eq!(
                            dist.probs()[v as usize], 0.0,
                            "{name}: P^({k})[{start}->{v}] must be exactly zero"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn bipartite_mass_alternates_sides() {
    // On K33 and Q3 every walk alternates between the two colour classes,
    // so after k steps the whole unit of mass sits on one side.
    for name in ["k33", "q3"] {
        let g = named_graph(name).unwrap();
        let side = |v: u32| -> usize {
            // both named constructions are coloured by vertex parity
            if name == "k33" {
                (v as usize) / 3
            } else {
                (v.count_ones() as usize) % 2
            }
        };
        for k in 0..=9usize {
            let dist = nbrw_k_step_vertex_distribution::<f64>(&g, 0, k).unwrap();
            let wrong_side: f64 = dist
                .probs()
                .iter()
                .enumerate()
                .filter(|(v, _)| side(*v as u32) != (side(0) + k) % 2)
                .map(|(_, p)| p)
                .sum();
            assert_eq!(wrong_side, 0.0, "{name} k={k}: mass leaked across the bipartition");
        }
    }
}

#[test]
fn short_return_mass_agrees_with_enumeration() {
    let g = named_graph("k4").unwrap();
    let targets: Vec<u32> = (0..4).collect();
    for window in 1..=6usize {
        let claimed = short_return_mass_M::<f64>(&g, &targets, window).unwrap();
        let mut oracle = 0.0f64;
        for &u in &targets {
            for &v in &targets {
                let mut mass = 0.0;
                for k in 1..window {
                    mass += enumerate_endpoints(&g, u, k)[v as usize];
                }
                oracle = oracle.max(mass);
            }
        }
        assert!(
            (claimed - oracle).abs() <= 1e-12,
            "window {window}: {claimed} vs enumerated {oracle}"
        );
    }
}

#[test]
fn k4_three_step_return_probability() {
    // By direct count on K4: of the 3·2·2 = 12 non-backtracking paths of
    // length three, six return to the start.
    let g = named_graph("k4").unwrap();
    let dist = nbrw_k_step_vertex_distribution::<f64>(&g, 2, 3).unwrap();
    assert!((dist.probs()[2] - 0.5).abs() <= 1e-15);
}
