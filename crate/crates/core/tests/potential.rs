//! Cross-checks of the potential-theory layer: a random-walk Monte Carlo
//! oracle for the stopped Green table, the summation-by-parts identity
//! tying energy to the graph Laplacian, and a larger table-vs-series sweep.

use gasket_core::green::{exit_times, GreenSeries, GreenTable};
use gasket_core::harmonic::{energy, laplacian, spow};
use gasket_core::{GasketLevel, Vertex};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Expected visit counts to `targets` for the walk started at `start` and
/// killed on the corners, estimated over `trials` walks. Returns (mean,
/// standard error) per target.
fn mc_visits(
    g: &GasketLevel,
    start: u32,
    targets: &[u32],
    trials: u64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut sum = vec![0.0f64; targets.len()];
    let mut sumsq = vec![0.0f64; targets.len()];
    for _ in 0..trials {
        let mut at = start;
        let mut visits = vec![0u64; targets.len()];
        loop {
            if let Some(t) = targets.iter().position(|&y| y == at) {
                visits[t] += 1;
            }
            let nbrs = g.neighbors(at);
            debug_assert_eq!(nbrs.len(), 4);
            at = nbrs[(rng.next_u32() >> 30) as usize];
            if g.is_boundary(at) {
                break;
            }
        }
        for (t, &v) in visits.iter().enumerate() {
            sum[t] += v as f64;
            sumsq[t] += (v * v) as f64;
        }
    }
    (0..targets.len())
        .map(|t| {
            let mean = sum[t] / trials as f64;
            let var = (sumsq[t] / trials as f64 - mean * mean).max(0.0);
            (mean, (var / trials as f64).sqrt())
        })
        .collect()
}

#[test]
fn monte_carlo_visit_counts_match_green_table() {
    for (n, l, seed) in [(1u32, 0u32, 11u64), (1, 1, 12)] {
        let g = GasketLevel::new(n, l);
        let table = GreenTable::build(&g);
        let start = g.index_of(Vertex::origin()).unwrap();
        let targets = [start, g.index_of(Vertex::new(gasket_core::Half::Plus, 1, 0)).unwrap()];
        let stats = mc_visits(&g, start, &targets, 100_000, seed);
        let visit_scale = spow::<f64>(5, n as i32) / spow::<f64>(3, n as i32);
        for (t, &y) in targets.iter().enumerate() {
            let expect = visit_scale * table.green(start, y);
            let (mean, se) = stats[t];
            assert!(
                (mean - expect).abs() <= 3.0 * se,
                "n={n} l={l} target {y}: mc {mean} vs {expect} (se {se})"
            );
        }
    }
}

#[test]
fn energy_pairs_with_laplacian_by_parts() {
    // E(f, v) = -3^{-n} sum_x laplacian f(x) v(x) whenever v vanishes on the
    // corners; holds exactly for the truncated corner rows.
    let g = GasketLevel::new(2, 1);
    let n = g.n() as i32;
    let f: Vec<f64> = (0..g.vertex_count()).map(|i| ((i * 31 + 7) % 11) as f64 / 3.0).collect();
    let mut v: Vec<f64> = (0..g.vertex_count()).map(|i| ((i * 17 + 3) % 13) as f64 / 5.0).collect();
    for i in g.corner_indices() {
        v[i as usize] = 0.0;
    }
    let e = energy(&g, n, &f, &v);
    let lap = laplacian(&g, n, &f);
    let paired: f64 = lap.iter().zip(&v).map(|(a, b)| a * b).sum();
    let rhs = -spow::<f64>(3, -n) * paired;
    assert!((e - rhs).abs() < 1e-10 * e.abs().max(1.0), "{e} vs {rhs}");
}

#[test]
fn table_matches_series_at_depth_three() {
    let g = GasketLevel::new(3, 1);
    let table = GreenTable::build(&g);
    let series = GreenSeries::<f64>::build(&g);
    let mut max = 0.0f64;
    for x in 0..g.vertex_count() as u32 {
        for y in 0..g.vertex_count() as u32 {
            max = max.max((table.green(x, y) - series.value(x, y)).abs());
        }
    }
    assert!(max < 1e-11, "max diff {max:e}");
}

#[test]
fn deeper_graph_ball_exit_times_grow() {
    let g = GasketLevel::new(4, 1);
    let mut prev = 0.0;
    for r in [1u32, 2, 4, 8] {
        let t = exit_times(&g, Vertex::origin(), r).unwrap().center_time;
        assert!(t > prev, "radius {r}: {t} <= {prev}");
        prev = t;
    }
}
