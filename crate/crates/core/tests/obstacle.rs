// End-to-end checks of the obstacle solver: agreement with the sandpile
// odometer, the closed-form junction values, level and domain stability,
// and the shape of the noncoincidence set at a production level.

use gasket_core::closed_form::ExactObstacle;
use gasket_core::fields::{discretize, Density};
use gasket_core::gasket::Cell;
use gasket_core::limits::containment_margins;
use gasket_core::obstacle::{continuum_ladder, solve};
use gasket_core::sandpile::{stabilize, SweepOrder};
use gasket_core::{GasketLevel, Half};
use num_traits::ToPrimitive;

fn ball3() -> Density {
    Density::from_json(
        r#"{"bound_L": 2, "terms": [{"coeff": "3", "center": {"half":"+","a":0,"b":0,"level":0}, "radius_log2": 0}]}"#,
    )
    .unwrap()
}

#[test]
fn odometer_matches_sandpile_through_level_four() {
    let d = ball3();
    for n in 2..=4 {
        let g = GasketLevel::new(n, d.bound_log2);
        let sigma = discretize(&d, &g).unwrap();
        let p = solve(&g, &sigma).unwrap();
        let state = stabilize(&g, &sigma, 1e-12, SweepOrder::Lex).unwrap();
        let sandpile = state.odometer();
        let sup = p
            .odometer
            .iter()
            .zip(&sandpile)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(sup < 1e-6, "n={n}: sup |obstacle - sandpile| = {sup:.3e}");
        assert_eq!(p.cluster, state.cluster(), "n={n}: cluster mismatch");
    }
}

#[test]
fn junction_values_within_two_percent_at_level_five() {
    for cluster_log2 in [1, 2] {
        let oracle = ExactObstacle::new(0, cluster_log2);
        let g = GasketLevel::new(5, oracle.domain_log2());
        let d = Density::from_spec(&oracle.density_spec()).unwrap();
        let sigma = discretize(&d, &g).unwrap();
        let p = solve(&g, &sigma).unwrap();
        let rescale = 4.0 / 3.0;
        for (v, exact) in oracle.junction_values(5) {
            let exact = exact.to_f64().unwrap();
            let i = g.require_index(v).unwrap() as usize;
            let got = rescale * p.gamma[i];
            let rel = (got - exact).abs() / exact;
            assert!(
                rel < 0.02,
                "L={cluster_log2} at {v:?}: got {got:.6}, closed form {exact:.6}, rel {rel:.3e}"
            );
        }
    }
}

#[test]
fn ladder_is_level_stable_and_domain_independent() {
    let d = ball3();
    let report = continuum_ladder(&d, 4, 6).unwrap();
    assert_eq!(report.levels, vec![4, 5, 6]);
    for (k, sup) in report.consecutive_sup.iter().enumerate() {
        assert!(
            *sup < 1e-8,
            "levels {}->{}: sup {sup:.3e}",
            report.levels[k],
            report.levels[k + 1]
        );
    }
    assert!(
        report.enlarged_domain_sup < 1e-6,
        "domain doubling moved the odometer by {:.3e}",
        report.enlarged_domain_sup
    );

    // The same domain bound holds at level 5 on its own.
    let single = continuum_ladder(&d, 5, 5).unwrap();
    assert!(single.consecutive_sup.is_empty());
    assert!(single.enlarged_domain_sup < 1e-6);
}

#[test]
fn noncoincidence_set_tracks_the_doubled_ball_at_level_six() {
    let d = ball3();
    let g = GasketLevel::new(6, d.bound_log2);
    let sigma = discretize(&d, &g).unwrap();
    let p = solve(&g, &sigma).unwrap();

    // Mass 3 on B(0,1) fills B(0,2): the two side-2 cells at the origin.
    let reference = vec![
        Cell { half: Half::Plus, scale: -1, a: 0, b: 0 },
        Cell { half: Half::Minus, scale: -1, a: 0, b: 0 },
    ];
    let m = containment_margins(&g, &p.cluster, &reference);
    assert!(m.eps_in <= 0.15, "eps_in = {} at {:?}", m.eps_in, m.worst_in);
    assert!(m.eps_out <= 0.15, "eps_out = {} at {:?}", m.eps_out, m.worst_out);
}

#[test]
fn margins_shrink_as_the_level_grows() {
    let d = ball3();
    let reference = vec![
        Cell { half: Half::Plus, scale: -1, a: 0, b: 0 },
        Cell { half: Half::Minus, scale: -1, a: 0, b: 0 },
    ];
    let mut last_in = f64::INFINITY;
    let mut last_out = f64::INFINITY;
    for n in 4..=6 {
        let g = GasketLevel::new(n, d.bound_log2);
        let sigma = discretize(&d, &g).unwrap();
        let p = solve(&g, &sigma).unwrap();
        let m = containment_margins(&g, &p.cluster, &reference);
        // The missed vertices are the outer edge chains, one lattice step
        // from the cluster.
        let delta = (2.0f64).powi(-(n as i32));
        assert!((m.eps_in - delta).abs() < 1e-12, "n={n}: eps_in = {}", m.eps_in);
        assert!(m.eps_in < last_in);
        assert!(m.eps_out <= last_out);
        last_in = m.eps_in;
        last_out = m.eps_out;
    }
}

#[test]
fn cluster_fills_the_ball_except_its_outer_edges() {
    // Mass never accumulates to the toppling threshold on the two outer
    // edges of the target ball: vertices there receive mass from inside
    // but sit behind the lateral holes, so the cluster at every level is
    // exactly the ball minus those edge chains.
    let d = ball3();
    for n in [3, 4] {
        let g = GasketLevel::new(n, d.bound_log2);
        let sigma = discretize(&d, &g).unwrap();
        let p = solve(&g, &sigma).unwrap();
        let side = 1u64 << (n + 1);
        let expected: Vec<u32> = (0..g.vertex_count() as u32)
            .filter(|&i| {
                let v = g.vertex(i);
                v.a + v.b < side
            })
            .collect();
        assert_eq!(p.cluster, expected, "n={n}");
    }
}
