//! Convergence harness: planar geometry of clusters, containment margins
//! against reference cell regions, measure comparisons, and scaling-exponent
//! fits.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::fields::DensityField;
use crate::gasket::{pow3, unbounded_cell_exists};
use crate::green::exit_times;
use crate::{alpha_scale, Cell, Error, GasketLevel, Half, Result, Vertex};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Planar embedding coordinates in continuum units.
pub fn vertex_planar(v: Vertex, n: u32) -> (f64, f64) {
    let d = (2.0f64).powi(-(n as i32));
    let x = v.a as f64 + v.b as f64 / 2.0;
    let sx = match v.half {
        Half::Plus => x,
        Half::Minus => -x,
    };
    (sx * d, v.b as f64 * SQRT3 / 2.0 * d)
}

fn doubled_coords(v: Vertex) -> (i64, i64) {
    let s = (2 * v.a + v.b) as i64;
    match v.half {
        Half::Plus => (s, v.b as i64),
        Half::Minus => (-s, v.b as i64),
    }
}

/// Euclidean distance between two level-n vertices. The squared distance is
/// assembled exactly in integers before the final square root.
pub fn planar_distance(v: Vertex, w: Vertex, n: u32) -> f64 {
    let (xv, bv) = doubled_coords(v);
    let (xw, bw) = doubled_coords(w);
    let (dx, db) = (xv - xw, bv - bw);
    let q = (dx * dx + 3 * db * db) as f64;
    (2.0f64).powi(-(n as i32)) * q.sqrt() / 2.0
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ex, ey) = (b.0 - a.0, b.1 - a.1);
    let len2 = ex * ex + ey * ey;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * ex + (p.1 - a.1) * ey) / len2).clamp(0.0, 1.0)
    };
    let (dx, dy) = (p.0 - (a.0 + t * ex), p.1 - (a.1 + t * ey));
    (dx * dx + dy * dy).sqrt()
}

/// Euclidean distance from a level-n vertex to a closed cell (zero inside).
/// Requires the cell to be no finer than the vertex lattice.
pub fn vertex_cell_distance(v: Vertex, cell: &Cell, n: u32) -> f64 {
    assert!(cell.scale <= n as i32, "cell finer than the vertex lattice");
    if cell.contains_vertex(v, n) {
        return 0.0;
    }
    let p = vertex_planar(v, n);
    let [c0, c1, c2] = cell.corners_at_level(n);
    let (p0, p1, p2) = (vertex_planar(c0, n), vertex_planar(c1, n), vertex_planar(c2, n));
    segment_distance(p, p0, p1)
        .min(segment_distance(p, p1, p2))
        .min(segment_distance(p, p0, p2))
}

type CellKey = (Half, u64, u64);

fn cell_key(c: &Cell) -> CellKey {
    (c.half, c.a, c.b)
}

/// Scale-k cells of the domain whose closed triangle contains the given
/// level-m lattice point: the incident cells when the point is on the
/// scale-k lattice, the single enclosing cell otherwise.
fn containing_cells(domain_log2: u32, half: Half, a: u64, b: u64, m: u32, k: i32) -> Vec<CellKey> {
    let shift = domain_log2 as i32 + k;
    assert!(shift >= 0, "cell scale coarser than the domain");
    let side_k = 1u64 << shift;
    let (ka, kb, on_lattice) = if k >= m as i32 {
        let s = (k - m as i32) as u32;
        (a << s, b << s, true)
    } else {
        let s = (m as i32 - k) as u32;
        let mask = (1u64 << s) - 1;
        (a >> s, b >> s, a & mask == 0 && b & mask == 0)
    };
    let mut out = Vec::with_capacity(2);
    if !on_lattice {
        // Interior of a unique cell, or on one of its edges.
        out.push((half, ka, kb));
        return out;
    }
    if ka == 0 && kb == 0 {
        for h in [Half::Plus, Half::Minus] {
            out.push((h, 0, 0));
        }
        return out;
    }
    let mut push = |ca: u64, cb: u64| {
        if ca + cb + 1 <= side_k && unbounded_cell_exists(ca, cb) {
            out.push((half, ca, cb));
        }
    };
    push(ka, kb);
    if ka > 0 {
        push(ka - 1, kb);
    }
    if kb > 0 {
        push(ka, kb - 1);
    }
    out
}

/// A cluster with its planar geometry: exact lattice coordinates, derived
/// point cloud, and dyadic cell covers.
#[derive(Clone, Debug)]
pub struct ClusterGeometry {
    n: u32,
    domain_log2: u32,
    indices: Vec<u32>,
    vertices: Vec<Vertex>,
}

impl ClusterGeometry {
    pub fn new(g: &GasketLevel, cluster: &[u32]) -> Self {
        let mut indices = cluster.to_vec();
        indices.sort_unstable();
        indices.dedup();
        let vertices = indices.iter().map(|&i| g.vertex(i)).collect();
        ClusterGeometry { n: g.n(), domain_log2: g.domain_log2(), indices, vertices }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.vertices.iter().map(|&v| vertex_planar(v, self.n)).collect()
    }

    /// Scale-k cells containing at least one cluster vertex; k at least as
    /// fine as the vertex lattice.
    pub fn cell_cover(&self, scale: i32) -> Vec<Cell> {
        assert!(scale >= self.n as i32, "cover scale coarser than the vertex lattice");
        let mut keys = HashSet::new();
        for v in &self.vertices {
            for key in containing_cells(self.domain_log2, v.half, v.a, v.b, self.n, scale) {
                keys.insert(key);
            }
        }
        let mut cells: Vec<Cell> =
            keys.into_iter().map(|(half, a, b)| Cell { half, scale, a, b }).collect();
        cells.sort_by_key(|c| (c.half, c.b, c.a));
        cells
    }

    /// mu of the scale-k cover: (cell count)·3^{-k}/2, exact.
    pub fn cover_measure(&self, scale: i32) -> BigRational {
        let count = BigRational::from_integer(BigInt::from(self.cell_cover(scale).len()));
        count * pow3(-scale) / BigRational::from_integer(BigInt::from(2))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Margins {
    /// Smallest eps such that every level-n vertex of the reference region
    /// lies within eps of some cluster vertex.
    pub eps_in: f64,
    /// Smallest eps such that the cluster lies in the closed
    /// eps-neighborhood of the reference.
    pub eps_out: f64,
    pub worst_in: Option<Vertex>,
    pub worst_out: Option<Vertex>,
}

/// Containment margins of a cluster against a reference region given as a
/// union of same-scale cells, i.e. the two one-sided Hausdorff
/// deficiencies: eps_in measures how far a reference lattice point can be
/// from the cluster, eps_out how far a cluster point can stray from the
/// reference region. Distances are Euclidean in the plane. Boundary layers
/// a single lattice step thick cost O(delta_n) here; an erosion-style
/// margin would charge them the full depth of the nearest gasket gap.
/// Conventions: an empty reference yields eps_in = 0 and (if the cluster
/// is nonempty) eps_out = infinity; an empty cluster against a nonempty
/// reference yields (infinity, 0).
pub fn containment_margins(g: &GasketLevel, cluster: &[u32], reference: &[Cell]) -> Margins {
    let n = g.n();
    if let Some(first) = reference.first() {
        assert!(
            reference.iter().all(|c| c.scale == first.scale),
            "reference cells must share one scale"
        );
    }
    let mut sorted = cluster.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    if reference.is_empty() {
        let eps_out = if sorted.is_empty() { 0.0 } else { f64::INFINITY };
        return Margins { eps_in: 0.0, eps_out, worst_in: None, worst_out: None };
    }

    let in_ref = |v: Vertex| reference.iter().any(|c| c.contains_vertex(v, n));

    let mut eps_out = 0.0f64;
    let mut worst_out = None;
    for &i in &sorted {
        let v = g.vertex(i);
        if in_ref(v) {
            continue;
        }
        let d = reference
            .iter()
            .map(|c| vertex_cell_distance(v, c, n))
            .fold(f64::INFINITY, f64::min);
        if d > eps_out {
            eps_out = d;
            worst_out = Some(v);
        }
    }

    if sorted.is_empty() {
        return Margins { eps_in: f64::INFINITY, eps_out: 0.0, worst_in: None, worst_out: None };
    }

    let cluster_points: Vec<Vertex> = sorted.iter().map(|&i| g.vertex(i)).collect();

    let mut eps_in = 0.0f64;
    let mut worst_in = None;
    for i in 0..g.vertex_count() as u32 {
        let v = g.vertex(i);
        if !in_ref(v) || sorted.binary_search(&i).is_ok() {
            continue;
        }
        let d = cluster_points
            .iter()
            .map(|&w| planar_distance(v, w, n))
            .fold(f64::INFINITY, f64::min);
        if d > eps_in {
            eps_in = d;
            worst_in = Some(v);
        }
    }

    Margins { eps_in, eps_out, worst_in, worst_out }
}

/// delta_n^alpha-weighted size of the symmetric difference, exact before
/// the final float conversion. Errors when the levels differ.
pub fn symmetric_difference_measure(
    a: &ClusterGeometry,
    b: &ClusterGeometry,
) -> Result<f64> {
    if a.n != b.n {
        return Err(Error::Config(format!(
            "cluster level mismatch: {} vs {}",
            a.n, b.n
        )));
    }
    let (mut i, mut j, mut count) = (0usize, 0usize, 0u64);
    while i < a.indices.len() || j < b.indices.len() {
        match (a.indices.get(i), b.indices.get(j)) {
            (Some(&x), Some(&y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(&x), Some(&y)) if x < y => {
                count += 1;
                i += 1;
            }
            (Some(_), Some(_)) | (None, Some(_)) => {
                count += 1;
                j += 1;
            }
            (Some(_), None) => {
                count += 1;
                i += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    let exact = BigRational::from_integer(BigInt::from(count)) * pow3(-(a.n as i32));
    Ok(exact.to_f64().expect("weighted count fits in f64"))
}

/// For each scale k, mu of the scale-k cells whose closure meets both the
/// region (a union of same-scale cells) and the gasket complement of the
/// region; the complement includes the four outer domain corners, where the
/// unbounded gasket attaches. The sequence is non-increasing because a
/// meeting cell's parent also meets both sides.
pub fn boundary_measure_estimate(
    g: &GasketLevel,
    region: &[Cell],
    k_lo: i32,
    k_hi: i32,
) -> Vec<f64> {
    assert!(k_lo <= k_hi);
    let m = region.first().map_or(k_hi, |c| c.scale);
    assert!(region.iter().all(|c| c.scale == m), "region cells must share one scale");
    assert!(k_hi <= m, "estimate scales must be no finer than the region cells");
    assert!(m >= g.n() as i32, "region cells coarser than the vertex lattice");
    let m = m as u32;

    let region_keys: HashSet<CellKey> = region.iter().map(cell_key).collect();
    let mut region_points: HashSet<(Half, u64, u64)> = HashSet::new();
    for c in region {
        for v in c.corners_at_level(m) {
            region_points.insert((v.half, v.a, v.b));
        }
    }
    let mut complement_points: HashSet<(Half, u64, u64)> = HashSet::new();
    for c in g.cells_at_scale(m as i32) {
        if region_keys.contains(&cell_key(&c)) {
            continue;
        }
        for v in c.corners_at_level(m) {
            complement_points.insert((v.half, v.a, v.b));
        }
    }
    let side_m = 1u64 << (g.domain_log2() + m);
    for half in [Half::Plus, Half::Minus] {
        complement_points.insert((half, side_m, 0));
        complement_points.insert((half, 0, side_m));
    }

    let mut out = Vec::new();
    let mut prev: Option<BigRational> = None;
    for k in k_lo..=k_hi {
        let mut meets_region: HashSet<CellKey> = HashSet::new();
        for &(half, a, b) in &region_points {
            meets_region.extend(containing_cells(g.domain_log2(), half, a, b, m, k));
        }
        let mut count = 0u64;
        let mut counted: HashSet<CellKey> = HashSet::new();
        for &(half, a, b) in &complement_points {
            for key in containing_cells(g.domain_log2(), half, a, b, m, k) {
                if meets_region.contains(&key) && counted.insert(key) {
                    count += 1;
                }
            }
        }
        let measure = BigRational::from_integer(BigInt::from(count)) * pow3(-k)
            / BigRational::from_integer(BigInt::from(2));
        if let Some(p) = &prev {
            assert!(&measure <= p, "boundary estimate must not increase");
        }
        out.push(measure.to_f64().expect("measure fits in f64"));
        prev = Some(measure);
    }
    out
}

#[derive(Clone, Debug)]
pub struct MassReport {
    /// delta_n^alpha * |cluster|.
    pub cluster_measure: f64,
    /// delta_n^alpha * total sigma.
    pub mass_measure: f64,
    pub gap: f64,
    pub rel_gap: f64,
    /// Vertices outside the cluster adjacent to it, where residual mass can
    /// sit after stabilization.
    pub boundary_count: usize,
    /// delta_n^alpha * boundary_count * max(1, sup sigma).
    pub bound: f64,
    pub pass: bool,
}

/// Conservation of mass at the cluster scale: the weighted cluster size must
/// match the weighted total mass up to the outer-boundary allowance.
pub fn mass_conservation_check(
    g: &GasketLevel,
    sigma: &DensityField,
    cluster: &[u32],
) -> MassReport {
    assert!(sigma.n == g.n() && sigma.domain_log2 == g.domain_log2());
    let w = alpha_scale(g.n());
    let mut in_cluster = vec![false; g.vertex_count()];
    for &i in cluster {
        in_cluster[i as usize] = true;
    }
    let mut boundary_count = 0usize;
    for i in 0..g.vertex_count() as u32 {
        if !in_cluster[i as usize]
            && g.neighbors(i).iter().any(|&j| in_cluster[j as usize])
        {
            boundary_count += 1;
        }
    }
    let mass: f64 = sigma.values.iter().sum();
    let count = cluster.len() as f64;
    let sigma_max = sigma.values.iter().copied().fold(1.0f64, f64::max);
    let gap = (mass - count).abs();
    let bound_raw = boundary_count as f64 * sigma_max;
    MassReport {
        cluster_measure: w * count,
        mass_measure: w * mass,
        gap: w * gap,
        rel_gap: if mass > 0.0 { gap / mass } else { 0.0 },
        boundary_count,
        bound: w * bound_raw,
        pass: gap <= bound_raw + 1e-9 * mass.max(1.0),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    /// 1.96 standard errors: a 95% band under the usual normal model.
    pub half_width: f64,
}

/// Least-squares slope of log(value) against log(scale).
pub fn exponent_fit(series: &[(f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 3 {
        return Err(Error::Config(format!(
            "exponent fit needs at least 3 points, got {}",
            series.len()
        )));
    }
    if series.iter().any(|&(r, v)| r <= 0.0 || v <= 0.0) {
        return Err(Error::Config("exponent fit needs positive data".into()));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(r, v)| (r.ln(), v.ln())).collect();
    let m = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("exponent fit needs at least two distinct scales".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 =
        pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let std_error = (ss_res / (m - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, intercept, std_error, half_width: 1.96 * std_error })
}

/// (radius, |graph ball|) pairs for volume-exponent fits.
pub fn ball_volume_series(
    g: &GasketLevel,
    center: Vertex,
    radii: &[u32],
) -> Result<Vec<(f64, f64)>> {
    let c = g.require_index(center)?;
    Ok(radii
        .iter()
        .map(|&r| (r as f64, g.graph_ball(c, r).len() as f64))
        .collect())
}

/// (radius, expected exit time from the center) pairs for walk-exponent
/// fits, in raw steps.
pub fn exit_time_series(
    g: &GasketLevel,
    center: Vertex,
    radii: &[u32],
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let t = exit_times(g, center, r)?;
        out.push((r as f64, t.center_time));
    }
    Ok(out)
}
