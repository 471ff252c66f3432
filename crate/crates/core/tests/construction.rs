//! Graph construction checked against an independent oracle: the gasket of
//! side 2^K built by iterated union of three translated copies, carrying its
//! edge set along. The library uses recursive descent instead, so agreement
//! is meaningful.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use gasket_core::gasket::{
    cell_exists, cell_intersection_measure, lattice_member, planar_dist2_times4, pow3, Cell,
};
use gasket_core::{Error, GasketLevel, Half, Vertex};

type Pt = (u64, u64);
type EdgeSet = BTreeSet<(Pt, Pt)>;

fn norm_edge(p: Pt, q: Pt) -> (Pt, Pt) {
    if p <= q {
        (p, q)
    } else {
        (q, p)
    }
}

/// One half-gasket of side 2^k with its edges, built bottom-up by unioning
/// translated copies.
fn oracle_half(k: u32) -> (BTreeSet<Pt>, EdgeSet) {
    let mut pts: BTreeSet<Pt> = [(0, 0), (1, 0), (0, 1)].into_iter().collect();
    let mut edges: EdgeSet = [
        norm_edge((0, 0), (1, 0)),
        norm_edge((0, 0), (0, 1)),
        norm_edge((1, 0), (0, 1)),
    ]
    .into_iter()
    .collect();

    for step in 0..k {
        let s = 1u64 << step;
        let mut next_pts = pts.clone();
        let mut next_edges = edges.clone();
        for (da, db) in [(s, 0), (0, s)] {
            next_pts.extend(pts.iter().map(|&(a, b)| (a + da, b + db)));
            next_edges.extend(
                edges
                    .iter()
                    .map(|&(p, q)| norm_edge((p.0 + da, p.1 + db), (q.0 + da, q.1 + db))),
            );
        }
        pts = next_pts;
        edges = next_edges;
    }
    (pts, edges)
}

#[test]
fn membership_matches_union_oracle() {
    for k in 0..=6u32 {
        let side = 1u64 << k;
        let (pts, _) = oracle_half(k);
        assert_eq!(pts.len() as u64, (3u64.pow(k + 1) + 3) / 2);
        for b in 0..=side {
            for a in 0..=(side - b) {
                assert_eq!(
                    lattice_member(a, b, side),
                    pts.contains(&(a, b)),
                    "({a},{b}) at side {side}"
                );
            }
        }
    }
}

#[test]
fn adjacency_matches_union_oracle() {
    for (n, l) in [(0u32, 0u32), (1, 0), (0, 1), (2, 0), (1, 1), (2, 1), (3, 1), (2, 2)] {
        let g = GasketLevel::new(n, l);
        let (_, half_edges) = oracle_half(n + l);

        let mut expect: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for half in [Half::Plus, Half::Minus] {
            for &(p, q) in &half_edges {
                let v = Vertex::new(half, p.0, p.1);
                let w = Vertex::new(half, q.0, q.1);
                expect.insert(if v < w { (v, w) } else { (w, v) });
            }
        }

        let mut got: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        for i in 0..g.vertex_count() as u32 {
            let v = g.vertex(i);
            for &j in g.neighbors(i) {
                assert!(
                    g.neighbors(j).contains(&i),
                    "asymmetric edge {v:?} - {:?}",
                    g.vertex(j)
                );
                let w = g.vertex(j);
                got.insert(if v < w { (v, w) } else { (w, v) });
            }
        }
        assert_eq!(got, expect, "edge sets differ at n={n} L={l}");
        assert_eq!(got.len() as u64, 2 * 3u64.pow(n + l + 1));
    }
}

#[test]
fn vertex_counts_and_degrees() {
    for (n, l) in [(0u32, 0u32), (1, 0), (0, 1), (3, 1), (2, 2)] {
        let g = GasketLevel::new(n, l);
        assert_eq!(g.vertex_count() as u64, 3u64.pow(n + l + 1) + 2);

        let corners: BTreeSet<u32> = g.corner_indices().into_iter().collect();
        assert_eq!(corners.len(), 4);
        for i in 0..g.vertex_count() as u32 {
            let nb: BTreeSet<u32> = g.neighbors(i).iter().copied().collect();
            assert_eq!(nb.len(), g.degree(i), "repeated neighbor at {:?}", g.vertex(i));
            if corners.contains(&i) {
                assert_eq!(g.degree(i), 2);
                assert!(g.is_boundary(i));
            } else {
                assert_eq!(g.degree(i), 4, "vertex {:?}", g.vertex(i));
                assert!(!g.is_boundary(i));
            }
        }
    }
}

#[test]
fn enumeration_is_sorted() {
    let g = GasketLevel::new(2, 1);
    for w in g.vertices().windows(2) {
        assert!(w[0] < w[1]);
    }
    assert_eq!(g.vertex(0), Vertex::origin());
}

#[test]
fn every_edge_has_unit_length() {
    let g = GasketLevel::new(3, 1);
    for i in 0..g.vertex_count() as u32 {
        for &j in g.neighbors(i) {
            assert_eq!(planar_dist2_times4(g.vertex(i), g.vertex(j)), 4);
        }
    }
}

#[test]
fn unit_distance_pairs_that_are_not_edges() {
    // Mirror seam: (+,0,1) and (-,0,1) are delta apart but share no cell.
    let g = GasketLevel::new(1, 0);
    let v = g.index_of(Vertex::new(Half::Plus, 0, 1)).unwrap();
    let w = g.index_of(Vertex::new(Half::Minus, 0, 1)).unwrap();
    assert_eq!(planar_dist2_times4(g.vertex(v), g.vertex(w)), 4);
    assert!(!g.neighbors(v).contains(&w));

    // Hole-flanking midpoints: (1,1) and (2,1) at side 4.
    let g = GasketLevel::new(2, 0);
    let v = g.index_of(Vertex::new(Half::Plus, 1, 1)).unwrap();
    let w = g.index_of(Vertex::new(Half::Plus, 2, 1)).unwrap();
    assert_eq!(planar_dist2_times4(g.vertex(v), g.vertex(w)), 4);
    assert!(!g.neighbors(v).contains(&w));
}

#[test]
fn frozen_neighbor_lists() {
    let g = GasketLevel::new(0, 1);
    let i = g.index_of(Vertex::new(Half::Plus, 1, 0)).unwrap();
    let nb: Vec<Vertex> = g.neighbors(i).iter().map(|&j| g.vertex(j)).collect();
    assert_eq!(
        nb,
        vec![
            Vertex::new(Half::Plus, 2, 0),
            Vertex::new(Half::Plus, 1, 1),
            Vertex::new(Half::Plus, 0, 1),
            Vertex::origin(),
        ]
    );
}

#[test]
fn membership_rejects_hole_points() {
    let g = GasketLevel::new(3, 0);
    let bad = Vertex::new(Half::Plus, 3, 2);
    assert!(g.index_of(bad).is_none());
    assert!(matches!(g.require_index(bad), Err(Error::NotAVertex { .. })));
}

#[test]
fn cells_per_scale_counts_and_total_measure() {
    let g = GasketLevel::new(3, 1);
    for k in -1..=3i32 {
        let cells = g.cells_at_scale(k);
        assert_eq!(cells.len() as u64, 2 * 3u64.pow((1 + k) as u32));
        let total: BigRational = cells.iter().map(|c| c.measure()).fold(
            BigRational::from_integer(BigInt::from(0)),
            |acc, m| acc + m,
        );
        assert_eq!(total, pow3(1), "total measure at scale {k}");
        for c in &cells {
            for v in c.corners_at_level(3) {
                assert!(g.index_of(v).is_some(), "corner {v:?} of {c:?} missing");
            }
        }
    }
}

#[test]
fn cell_subdivision_is_three_to_one() {
    let g = GasketLevel::new(2, 1);
    let coarse = g.cells_at_scale(1);
    let fine = g.cells_at_scale(2);
    for f in &fine {
        let parents: Vec<&Cell> = coarse.iter().filter(|c| c.contains_cell(f)).collect();
        assert_eq!(parents.len(), 1, "fine cell {f:?}");
    }
    for c in &coarse {
        let children = fine.iter().filter(|f| c.contains_cell(f)).count();
        assert_eq!(children, 3, "coarse cell {c:?}");
    }
}

#[test]
fn intersection_measure_cases() {
    let outer = Cell { half: Half::Plus, scale: 0, a: 0, b: 0 };
    let inner = Cell { half: Half::Plus, scale: 1, a: 1, b: 0 };
    let inner_far = Cell { half: Half::Plus, scale: 1, a: 2, b: 0 };
    let mirror = Cell { half: Half::Minus, scale: 1, a: 1, b: 0 };
    assert_eq!(cell_intersection_measure(&outer, &inner), inner.measure());
    assert_eq!(cell_intersection_measure(&inner, &outer), inner.measure());
    assert!(cell_intersection_measure(&inner, &inner_far).is_zero());
    assert!(cell_intersection_measure(&outer, &inner_far).is_zero());
    assert!(cell_intersection_measure(&inner, &mirror).is_zero());
}

#[test]
fn double_triangle_cell_counts() {
    let g = GasketLevel::new(2, 1);
    // Origin: one unit cell per half.
    let cells = g.double_triangle_cells(Vertex::origin(), 2).unwrap();
    assert_eq!(cells.len(), 2);
    assert_eq!(
        cells.iter().map(|c| c.half).collect::<BTreeSet<_>>().len(),
        2
    );

    // Interior vertex: two cells in its own half.
    let cells = g.double_triangle_cells(Vertex::new(Half::Plus, 1, 0), 2).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells.iter().all(|c| c.half == Half::Plus));

    // Outer corner: one cell.
    let s = g.side();
    let cells = g.double_triangle_cells(Vertex::new(Half::Plus, s, 0), 2).unwrap();
    assert_eq!(cells.len(), 1);

    // Coarse ball around the origin: B(0, 2^1) is two scale -1 cells.
    let cells = g.double_triangle_cells(Vertex::origin(), -1).unwrap();
    assert_eq!(cells.len(), 2);
    assert_eq!(cells[0].measure() + cells[1].measure(), pow3(1));

    // Non-lattice point for the requested scale.
    let err = g.double_triangle_cells(Vertex::new(Half::Plus, 1, 0), 1).unwrap_err();
    assert!(matches!(err, Error::CellScale { .. }));

    // Not a vertex at all.
    let g3 = GasketLevel::new(3, 0);
    assert!(g3
        .double_triangle_cells(Vertex::new(Half::Plus, 3, 2), 3)
        .is_err());
}

#[test]
fn graph_ball_radius_one_and_full_cover() {
    let g = GasketLevel::new(2, 0);
    let o = g.index_of(Vertex::origin()).unwrap();
    let ball = g.graph_ball(o, 1);
    let mut expect: Vec<u32> = g.neighbors(o).to_vec();
    expect.push(o);
    expect.sort_unstable();
    assert_eq!(ball, expect);

    let all = g.graph_ball(o, 2 * g.side() as u32);
    assert_eq!(all.len(), g.vertex_count());
}

#[test]
fn nested_sides_preserve_membership() {
    for k in 1..=6u32 {
        let side = 1u64 << k;
        for b in 0..=(side / 2) {
            for a in 0..=(side / 2 - b) {
                if lattice_member(a, b, side / 2) {
                    assert!(lattice_member(a, b, side));
                }
                if cell_exists(a, b, side / 2) {
                    assert!(cell_exists(a, b, side));
                }
            }
        }
    }
}
