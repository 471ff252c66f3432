//! Vertex, cell, and graph geometry of the truncated double gasket.
//!
//! The level-n graph lives on lattice points a*(1,0) + b*(1/2, sqrt3/2),
//! scaled by delta_n = 2^{-n}, in the closed half-plane x >= 0, together with
//! the mirror image of that set across the y-axis. The two halves meet only
//! at the origin. The working domain is the double triangle B(0, 2^L): the
//! closed triangle with corners 0, (2^L, 0), (2^{L-1}, 2^{L-1} sqrt3), plus
//! its mirror. In lattice coordinates at level n one half-triangle is the
//! simplex {a >= 0, b >= 0, a + b <= 2^{L+n}}.
//!
//! Two vertices are adjacent iff they are corners of a common scale-n cell.
//! This is NOT the same as "planar distance delta_n": the mirror pair at
//! (+-delta/2, sqrt3 delta/2) and the midpoint pairs flanking a hole are at
//! distance delta_n but share no cell and are not edges. The cell rule is the
//! one that makes every non-corner vertex 4-regular.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub enum Half {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Half {
    pub fn sign(self) -> f64 {
        match self {
            Half::Plus => 1.0,
            Half::Minus => -1.0,
        }
    }
}

/// Lattice vertex. `(a, b)` are nonnegative coordinates in the basis
/// (1,0), (1/2, sqrt3/2) at the working level; `Minus` mirrors x -> -x.
/// The origin is canonically `(Plus, 0, 0)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Vertex {
    pub half: Half,
    pub a: u64,
    pub b: u64,
}

impl Vertex {
    pub fn new(half: Half, a: u64, b: u64) -> Vertex {
        if a == 0 && b == 0 {
            Vertex { half: Half::Plus, a: 0, b: 0 }
        } else {
            Vertex { half, a, b }
        }
    }

    pub fn origin() -> Vertex {
        Vertex { half: Half::Plus, a: 0, b: 0 }
    }

    pub fn is_origin(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn mirrored(&self) -> Vertex {
        let half = match self.half {
            Half::Plus => Half::Minus,
            Half::Minus => Half::Plus,
        };
        Vertex::new(half, self.a, self.b)
    }

    /// Planar coordinates at level n.
    pub fn planar(&self, n: u32) -> (f64, f64) {
        let d = crate::mesh(n);
        let x = (self.a as f64 + self.b as f64 / 2.0) * d * self.half.sign();
        let y = self.b as f64 * d * 3f64.sqrt() / 2.0;
        (x, y)
    }

    /// Coarsest level at which this vertex is a lattice point, relative to
    /// the working level n (result <= n; the origin reports level -2^31 + n
    /// clamped to -(2^31)..; callers only compare against cell scales).
    pub fn intrinsic_level(&self, n: u32) -> i64 {
        if self.is_origin() {
            return i64::MIN / 2;
        }
        let tz = self.a.trailing_zeros().min(self.b.trailing_zeros());
        n as i64 - tz as i64
    }
}

/// Enumeration and comparison order: half (Plus first), then (b, a).
impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.half, self.b, self.a).cmp(&(other.half, other.b, other.a))
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// 4 * (planar distance / delta_n)^2, exact in integers.
pub fn planar_dist2_times4(v: Vertex, w: Vertex) -> u128 {
    if v.half == w.half || v.is_origin() || w.is_origin() {
        // Same half (the origin belongs to both): quadratic form of the
        // triangular lattice.
        let (da, db) = (v.a as i128 - w.a as i128, v.b as i128 - w.b as i128);
        (4 * (da * da + da * db + db * db)) as u128
    } else {
        let s = v.a as i128 * 2 + v.b as i128 + w.a as i128 * 2 + w.b as i128;
        let t = v.b as i128 - w.b as i128;
        (s * s + 3 * t * t) as u128
    }
}

/// Membership of a lattice point in the gasket triangle of the given side
/// (side a power of two). Recursive descent into the three corner
/// subtriangles; the central inverted hole is empty.
pub fn lattice_member(mut a: u64, mut b: u64, mut side: u64) -> bool {
    if a + b > side {
        return false;
    }
    while side > 1 {
        let h = side / 2;
        if a + b <= h {
            side = h;
        } else if a >= h {
            a -= h;
            side = h;
        } else if b >= h {
            b -= h;
            side = h;
        } else {
            return false;
        }
    }
    true
}

/// Whether the upward unit triangle with bottom-left lattice corner (a, b)
/// is a cell of the gasket triangle of the given side. Upward triples whose
/// three corners are all members need not be cells: the medial triangle of a
/// hole has member corners but straddles the hole.
pub fn cell_exists(mut a: u64, mut b: u64, mut side: u64) -> bool {
    if a + b + 1 > side {
        return false;
    }
    while side > 1 {
        let h = side / 2;
        if a + b + 1 <= h {
            side = h;
        } else if a >= h {
            a -= h;
            side = h;
        } else if b >= h {
            b -= h;
            side = h;
        } else {
            return false;
        }
    }
    true
}

/// Upward cell of side 2^{-scale}. `(a, b)` is the bottom-left corner in
/// lattice units of 2^{-scale}; the corners are (a,b), (a+1,b), (a,b+1).
/// Negative scales describe cells coarser than the unit triangle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Cell {
    pub half: Half,
    pub scale: i32,
    pub a: u64,
    pub b: u64,
}

impl Cell {
    /// mu(cell) = 3^{-scale} / 2.
    pub fn measure(&self) -> BigRational {
        pow3(-self.scale) / BigRational::from_integer(BigInt::from(2))
    }

    /// Corner vertices in lattice coordinates of level n (requires n >= scale).
    pub fn corners_at_level(&self, n: u32) -> [Vertex; 3] {
        let shift = (n as i64 - self.scale as i64) as u32;
        let (a, b) = (self.a << shift, self.b << shift);
        let u = 1u64 << shift;
        [
            Vertex::new(self.half, a, b),
            Vertex::new(self.half, a + u, b),
            Vertex::new(self.half, a, b + u),
        ]
    }

    /// Whether `other` is geometrically contained in `self` (cells of the
    /// same half are either nested or have disjoint interiors).
    pub fn contains_cell(&self, other: &Cell) -> bool {
        if self.half != other.half || other.scale < self.scale {
            return false;
        }
        let shift = (other.scale - self.scale) as u32;
        let (lo_a, lo_b) = (self.a << shift, self.b << shift);
        let hi = (self.a + self.b + 1) << shift;
        other.a >= lo_a && other.b >= lo_b && other.a + other.b + 1 <= hi
    }

    /// Whether a level-n vertex lies in the closed cell.
    pub fn contains_vertex(&self, v: Vertex, n: u32) -> bool {
        if v.half != self.half && !v.is_origin() {
            return false;
        }
        if self.scale <= n as i32 {
            let shift = (n as i64 - self.scale as i64) as u32;
            let (lo_a, lo_b) = (self.a << shift, self.b << shift);
            let hi = (self.a + self.b + 1) << shift;
            v.a >= lo_a && v.b >= lo_b && v.a + v.b <= hi
        } else {
            // Cell finer than the vertex lattice: compare in cell units.
            let shift = (self.scale - n as i32) as u32;
            let (va, vb) = (v.a << shift, v.b << shift);
            va >= self.a && vb >= self.b && va + vb <= self.a + self.b + 1
        }
    }
}

/// mu of the intersection of two cells: the finer cell's measure if nested,
/// zero otherwise (distinct cells meet in at most corner points, which are
/// null for the alpha-dimensional measure).
pub fn cell_intersection_measure(c1: &Cell, c2: &Cell) -> BigRational {
    if c1.contains_cell(c2) {
        c2.measure()
    } else if c2.contains_cell(c1) {
        c1.measure()
    } else {
        BigRational::from_integer(BigInt::from(0))
    }
}

/// Membership in the unbounded gasket half-plane (no domain truncation).
/// The descent value stabilizes once the side exceeds twice the coordinate
/// sum, so a finite side suffices.
pub fn unbounded_member(a: u64, b: u64) -> bool {
    lattice_member(a, b, (2 * (a + b) + 2).next_power_of_two())
}

/// Cell existence in the unbounded gasket.
pub fn unbounded_cell_exists(a: u64, b: u64) -> bool {
    cell_exists(a, b, (2 * (a + b) + 2).next_power_of_two())
}

/// 3^k as an exact rational (k may be negative).
pub fn pow3(k: i32) -> BigRational {
    let p = BigInt::from(3u32).pow(k.unsigned_abs());
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

/// 5^k as an exact rational (k may be negative).
pub fn pow5(k: i32) -> BigRational {
    let p = BigInt::from(5u32).pow(k.unsigned_abs());
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

/// The level-n graph on the double triangle B(0, 2^L), with neighbor lists
/// in counterclockwise order starting from the +x direction.
pub struct GasketLevel {
    n: u32,
    domain_log2: u32,
    side: u64,
    verts: Vec<Vertex>,
    index: HashMap<Vertex, u32>,
    nbr: Vec<[u32; 4]>,
    deg: Vec<u8>,
    boundary: Vec<bool>,
}

/// Direction index (counterclockwise from +x) of a lattice offset seen in
/// the planar embedding of the given half.
fn dir_index(frame: Half, da: i64, db: i64) -> u8 {
    let plus = match (da, db) {
        (1, 0) => 0,
        (0, 1) => 1,
        (-1, 1) => 2,
        (-1, 0) => 3,
        (0, -1) => 4,
        (1, -1) => 5,
        _ => unreachable!("not a unit lattice offset: ({da},{db})"),
    };
    match frame {
        Half::Plus => plus,
        Half::Minus => match plus {
            0 => 3,
            1 => 2,
            2 => 1,
            3 => 0,
            4 => 5,
            5 => 4,
            _ => unreachable!(),
        },
    }
}

impl GasketLevel {
    pub fn new(n: u32, domain_log2: u32) -> GasketLevel {
        assert!(n + domain_log2 <= 16, "graph side 2^{} too large", n + domain_log2);
        let side = 1u64 << (n + domain_log2);

        let mut verts = Vec::new();
        for half in [Half::Plus, Half::Minus] {
            for b in 0..=side {
                for a in 0..=(side - b) {
                    if half == Half::Minus && a == 0 && b == 0 {
                        continue;
                    }
                    if lattice_member(a, b, side) {
                        verts.push(Vertex::new(half, a, b));
                    }
                }
            }
        }

        let index: HashMap<Vertex, u32> =
            verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();

        let mut nbr = vec![[u32::MAX; 4]; verts.len()];
        let mut deg = vec![0u8; verts.len()];
        let mut boundary = vec![false; verts.len()];

        for (i, &v) in verts.iter().enumerate() {
            let mut others: Vec<Vertex> = Vec::with_capacity(4);
            for cell in incident_unit_cells(v, side) {
                for w in corners_of_unit(&cell) {
                    if w != v {
                        others.push(w);
                    }
                }
            }
            others.sort_by_key(|w| {
                let (frame, wa, wb, va, vb) = if v.is_origin() {
                    (w.half, w.a as i64, w.b as i64, 0, 0)
                } else {
                    let (wa, wb) =
                        if w.is_origin() { (0, 0) } else { (w.a as i64, w.b as i64) };
                    (v.half, wa, wb, v.a as i64, v.b as i64)
                };
                dir_index(frame, wa - va, wb - vb)
            });
            deg[i] = others.len() as u8;
            for (s, w) in others.iter().enumerate() {
                nbr[i][s] = index[w];
            }
            boundary[i] = (v.a == side && v.b == 0) || (v.a == 0 && v.b == side);
        }

        GasketLevel { n, domain_log2, side, verts, index, nbr, deg, boundary }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain_log2(&self) -> u32 {
        self.domain_log2
    }

    /// Side of one half-triangle in lattice units: 2^{L+n}.
    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.verts
    }

    pub fn vertex(&self, i: u32) -> Vertex {
        self.verts[i as usize]
    }

    pub fn index_of(&self, v: Vertex) -> Option<u32> {
        self.index.get(&v).copied()
    }

    pub fn require_index(&self, v: Vertex) -> Result<u32> {
        self.index_of(v).ok_or(Error::NotAVertex {
            half: v.half,
            a: v.a,
            b: v.b,
            n: self.n,
            domain_log2: self.domain_log2,
        })
    }

    pub fn is_member(&self, v: Vertex) -> bool {
        lattice_member(v.a, v.b, self.side)
    }

    /// Neighbors in ccw order from +x; length = degree (4 interior, 2 at the
    /// four outer corners).
    pub fn neighbors(&self, i: u32) -> &[u32] {
        &self.nbr[i as usize][..self.deg[i as usize] as usize]
    }

    pub fn degree(&self, i: u32) -> usize {
        self.deg[i as usize] as usize
    }

    /// True exactly for the four outer corners of the double triangle; these
    /// are the only vertices whose full gasket neighborhood is truncated.
    pub fn is_boundary(&self, i: u32) -> bool {
        self.boundary[i as usize]
    }

    pub fn corner_indices(&self) -> [u32; 4] {
        let s = self.side;
        [
            self.index[&Vertex::new(Half::Plus, s, 0)],
            self.index[&Vertex::new(Half::Plus, 0, s)],
            self.index[&Vertex::new(Half::Minus, s, 0)],
            self.index[&Vertex::new(Half::Minus, 0, s)],
        ]
    }

    pub fn interior_indices(&self) -> Vec<u32> {
        (0..self.vertex_count() as u32).filter(|&i| !self.is_boundary(i)).collect()
    }

    /// Closed graph ball of the given radius in graph metric, as sorted
    /// vertex indices. BFS is clipped to the domain.
    pub fn graph_ball(&self, center: u32, r: u32) -> Vec<u32> {
        let mut dist: HashMap<u32, u32> = HashMap::new();
        dist.insert(center, 0);
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(center);
        while let Some(i) = queue.pop_front() {
            let d = dist[&i];
            if d == r {
                continue;
            }
            for &w in self.neighbors(i) {
                dist.entry(w).or_insert_with(|| {
                    queue.push_back(w);
                    d + 1
                });
            }
        }
        let mut out: Vec<u32> = dist.into_keys().collect();
        out.sort_unstable();
        out
    }

    /// All cells of the given scale inside the domain, ordered by
    /// (half, b, a). Requires scale >= -L.
    pub fn cells_at_scale(&self, scale: i32) -> Vec<Cell> {
        assert!(scale >= -(self.domain_log2 as i32), "cell scale coarser than the domain");
        let side_k = 1u64 << (self.domain_log2 as i32 + scale);
        let mut out = Vec::new();
        for half in [Half::Plus, Half::Minus] {
            gen_cells(half, scale, 0, 0, side_k, &mut out);
        }
        out.sort_by_key(|c| (c.half, c.b, c.a));
        out
    }

    /// The cells of scale k incident to v: the double triangle B(v, 2^{-k}).
    /// Two cells for interior vertices (one per half at the origin), one at
    /// an outer corner of the domain. Errors if v is not on the scale-k
    /// lattice.
    pub fn double_triangle_cells(&self, v: Vertex, scale: i32) -> Result<Vec<Cell>> {
        self.require_index(v)?;
        assert!(scale >= -(self.domain_log2 as i32), "cell scale coarser than the domain");
        let (sa, sb) = if scale >= self.n as i32 {
            let shift = (scale - self.n as i32) as u32;
            (v.a << shift, v.b << shift)
        } else {
            let shift = (self.n as i32 - scale) as u32;
            if v.a % (1 << shift) != 0 || v.b % (1 << shift) != 0 {
                return Err(Error::CellScale { vertex_level: self.n, scale });
            }
            (v.a >> shift, v.b >> shift)
        };
        let side_k = 1u64 << (self.domain_log2 as i32 + scale);
        Ok(incident_cells_at(v.half, sa, sb, scale, side_k))
    }
}

/// Incident scale-k cells of a point given in scale-k lattice coordinates.
/// Handles the origin's mirror cell.
fn incident_cells_at(half: Half, sa: u64, sb: u64, scale: i32, side_k: u64) -> Vec<Cell> {
    let mut out = Vec::with_capacity(2);
    if sa == 0 && sb == 0 {
        for h in [Half::Plus, Half::Minus] {
            if cell_exists(0, 0, side_k) {
                out.push(Cell { half: h, scale, a: 0, b: 0 });
            }
        }
        return out;
    }
    let push = |a: u64, b: u64, out: &mut Vec<Cell>| {
        if cell_exists(a, b, side_k) {
            out.push(Cell { half, scale, a, b });
        }
    };
    push(sa, sb, &mut out);
    if sa > 0 {
        push(sa - 1, sb, &mut out);
    }
    if sb > 0 {
        push(sa, sb - 1, &mut out);
    }
    out
}

/// Unit-scale (working level) incident cells, as bare lattice triples.
struct UnitCell {
    half: Half,
    a: u64,
    b: u64,
}

fn incident_unit_cells(v: Vertex, side: u64) -> Vec<UnitCell> {
    let mut out = Vec::with_capacity(2);
    if v.is_origin() {
        for h in [Half::Plus, Half::Minus] {
            if cell_exists(0, 0, side) {
                out.push(UnitCell { half: h, a: 0, b: 0 });
            }
        }
        return out;
    }
    let push = |a: u64, b: u64, out: &mut Vec<UnitCell>| {
        if cell_exists(a, b, side) {
            out.push(UnitCell { half: v.half, a, b });
        }
    };
    push(v.a, v.b, &mut out);
    if v.a > 0 {
        push(v.a - 1, v.b, &mut out);
    }
    if v.b > 0 {
        push(v.a, v.b - 1, &mut out);
    }
    out
}

fn corners_of_unit(c: &UnitCell) -> [Vertex; 3] {
    [
        Vertex::new(c.half, c.a, c.b),
        Vertex::new(c.half, c.a + 1, c.b),
        Vertex::new(c.half, c.a, c.b + 1),
    ]
}

fn gen_cells(half: Half, scale: i32, a: u64, b: u64, side: u64, out: &mut Vec<Cell>) {
    if side == 1 {
        out.push(Cell { half, scale, a, b });
        return;
    }
    let h = side / 2;
    gen_cells(half, scale, a, b, h, out);
    gen_cells(half, scale, a + h, b, h, out);
    gen_cells(half, scale, a, b + h, h, out);
}
