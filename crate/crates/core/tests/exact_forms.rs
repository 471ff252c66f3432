//! Cross-checks the numeric obstacle solver against the exact junction
//! values of the two-scale ball family, and the rational loaded-extension
//! ladder against the closed-form profile evaluators.

use num_rational::BigRational;

use gasket_core::closed_form::{
    profile_center_value, profile_edge_a, profile_edge_a_point, profile_edge_b,
    profile_edge_b_point, profile_top_corner, ExactObstacle,
};
use gasket_core::fields::{discretize, Density};
use gasket_core::harmonic::uniform_load_profile;
use gasket_core::obstacle::obstacle_profile;
use gasket_core::scalar::Scalar;
use gasket_core::{GasketLevel, Half, Vertex};

fn junction_check(source_log2: u32, cluster_log2: u32, n: u32) {
    let e = ExactObstacle::new(source_log2, cluster_log2);
    let g = GasketLevel::new(n, e.domain_log2());
    let d = Density::from_spec(&e.density_spec()).unwrap();
    let sigma = discretize(&d, &g).unwrap();
    let gamma = obstacle_profile(&g, &sigma.values).unwrap();
    let cap = e.cap().to_f64();
    for (v, want) in e.junction_values(n) {
        let i = g.index_of(v).unwrap_or_else(|| panic!("{v:?} not on level {n}"));
        let got = gamma[i as usize] * 4.0 / 3.0;
        let want = want.to_f64();
        assert!(
            (got - want).abs() <= 1e-7 * cap,
            "l={source_log2} L={cluster_log2} n={n} at {v:?}: got {got}, want {want}"
        );
    }
}

#[test]
fn solver_matches_junction_forms_depth_two() {
    junction_check(0, 2, 4);
}

#[test]
fn solver_matches_junction_forms_depth_three() {
    junction_check(0, 3, 3);
    junction_check(0, 3, 4);
}

#[test]
fn solver_matches_junction_forms_with_coarser_source() {
    junction_check(1, 3, 3);
}

#[test]
fn obstacle_peaks_at_outer_corner_of_each_chain_triangle() {
    let e = ExactObstacle::new(0, 2);
    let n = 4;
    let g = GasketLevel::new(n, e.domain_log2());
    let d = Density::from_spec(&e.density_spec()).unwrap();
    let sigma = discretize(&d, &g).unwrap();
    let gamma = obstacle_profile(&g, &sigma.values).unwrap();

    // Triangle j has corners (2c,0), (c,0), (c,c) with c = 2^{L-j+n}; its
    // vertex set is {a >= c, a+b <= 2c} on the upper half.
    for j in 1..=2 {
        let [outer, inner, _apex] = e.chain_triangle(j, n);
        let c = inner.a;
        assert_eq!(outer.a, 2 * c);
        let mut best: Option<(f64, Vertex)> = None;
        for (i, &v) in g.vertices().iter().enumerate() {
            if v.half != Half::Plus || v.a < c || v.a + v.b > 2 * c {
                continue;
            }
            if best.as_ref().is_none_or(|(g0, _)| gamma[i] > *g0) {
                best = Some((gamma[i], v));
            }
        }
        let (_, arg) = best.unwrap();
        assert_eq!(arg, outer, "j={j}");
    }
}

#[test]
fn loaded_extension_matches_profile_forms_exactly() {
    for i in [0u32, 1] {
        let n = 3;
        let f = uniform_load_profile::<BigRational>(n, i, BigRational::from_ratio(4, 3));
        let g = GasketLevel::new(n, i);
        let at = |v: Vertex| f[g.index_of(v).unwrap() as usize].clone();

        assert_eq!(at(Vertex::origin()), profile_center_value(i));
        assert_eq!(at(profile_top_corner(i, n)), BigRational::zero());
        for j in 0..=i + n {
            assert_eq!(at(profile_edge_a_point(i, j, n)), profile_edge_a(i, j), "a, i={i} j={j}");
            assert_eq!(at(profile_edge_b_point(i, j, n)), profile_edge_b(i, j), "b, i={i} j={j}");
        }
    }
}
