//! Rotor-router aggregation.
//!
//! Each vertex owns a rotor pointing into its counterclockwise neighbor
//! list. An emitted particle first advances the rotor one slot, then moves
//! along it; a particle settles at the first unoccupied site it reaches.
//! Edge counts N(x,y) are kept per directed edge so the flux identities
//! can be checked in exact integer arithmetic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::fields::{discretize_floor, Density, ParticleField};
use crate::gasket::GasketLevel;
use crate::sandpile::SweepOrder;
use crate::{beta_scale, Error, Result};

#[derive(Clone, Copy, Debug)]
pub enum RotorInit {
    /// Every rotor starts at slot 0 of the neighbor list.
    Zero,
    /// Independent uniform slots from a seeded stream.
    Random { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct RotorState {
    n: u32,
    domain_log2: u32,
    /// Current slot per vertex into its neighbor list.
    pub rotors: Vec<u8>,
    pub occupied: Vec<bool>,
    /// Particles emitted per vertex (raw odometer).
    pub emitted: Vec<u64>,
    /// N(x, y) indexed by (x, slot of y in x's neighbor list).
    pub edge_counts: Vec<[u64; 4]>,
    /// Particles settled so far.
    pub particles: u64,
}

impl RotorState {
    pub fn new(g: &GasketLevel, init: RotorInit) -> RotorState {
        let v = g.vertex_count();
        let rotors = match init {
            RotorInit::Zero => vec![0u8; v],
            RotorInit::Random { seed } => {
                let mut rng = ChaCha12Rng::seed_from_u64(seed);
                (0..v).map(|_| rng.gen_range(0..4u8)).collect()
            }
        };
        RotorState {
            n: g.n(),
            domain_log2: g.domain_log2(),
            rotors,
            occupied: vec![false; v],
            emitted: vec![0; v],
            edge_counts: vec![[0; 4]; v],
            particles: 0,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn domain_log2(&self) -> u32 {
        self.domain_log2
    }

    fn check_ctx(&self, g: &GasketLevel) {
        assert!(
            self.n == g.n()
                && self.domain_log2 == g.domain_log2()
                && self.occupied.len() == g.vertex_count(),
            "state does not belong to this graph"
        );
    }

    /// Advance the rotor at p one slot and emit a particle along it.
    /// Returns the target vertex.
    pub fn rotor_step(&mut self, g: &GasketLevel, p: u32) -> Result<u32> {
        if g.is_boundary(p) {
            return Err(Error::BoundaryContact { vertex: g.vertex(p) });
        }
        let x = p as usize;
        let slot = (self.rotors[x] + 1) % 4;
        self.rotors[x] = slot;
        self.edge_counts[x][slot as usize] += 1;
        self.emitted[x] += 1;
        Ok(g.neighbors(p)[slot as usize])
    }

    /// Walk one particle from its source to the first unoccupied site and
    /// occupy it. Any contact with the domain boundary is an error: the
    /// aggregation would differ from the untruncated one.
    pub fn settle_particle(&mut self, g: &GasketLevel, source: u32) -> Result<u32> {
        self.check_ctx(g);
        let mut p = source;
        loop {
            if g.is_boundary(p) {
                return Err(Error::BoundaryContact { vertex: g.vertex(p) });
            }
            if !self.occupied[p as usize] {
                self.occupied[p as usize] = true;
                self.particles += 1;
                return Ok(p);
            }
            p = self.rotor_step(g, p)?;
        }
    }

    /// Rescaled odometer u_n = 5^{-n} * emitted.
    pub fn odometer(&self) -> Vec<f64> {
        let s = beta_scale(self.n);
        self.emitted.iter().map(|&e| s * e as f64).collect()
    }

    /// Occupied indices (the cluster R_n).
    pub fn cluster(&self) -> Vec<u32> {
        (0..self.occupied.len() as u32)
            .filter(|&i| self.occupied[i as usize])
            .collect()
    }
}

/// Release sigma(x) particles from each source x in the given enumeration
/// order, particles of one source consecutively.
pub fn aggregate(
    g: &GasketLevel,
    sigma: &ParticleField,
    init: RotorInit,
    order: SweepOrder,
) -> Result<RotorState> {
    assert!(sigma.n == g.n() && sigma.domain_log2 == g.domain_log2());
    let mut state = RotorState::new(g, init);
    let v = g.vertex_count() as u32;
    let release = |state: &mut RotorState, i: u32| -> Result<()> {
        for _ in 0..sigma.counts[i as usize] {
            state.settle_particle(g, i)?;
        }
        Ok(())
    };
    match order {
        SweepOrder::Lex => {
            for i in 0..v {
                release(&mut state, i)?;
            }
        }
        SweepOrder::ReverseLex => {
            for i in (0..v).rev() {
                release(&mut state, i)?;
            }
        }
    }
    Ok(state)
}

/// Aggregate, growing the domain by one dyadic step (up to three) whenever
/// the aggregation reaches the boundary. The density is re-floored on the
/// grown graph; returns the graph and field actually used.
pub fn aggregate_auto(
    density: &Density,
    n: u32,
    init: RotorInit,
    order: SweepOrder,
) -> Result<(GasketLevel, ParticleField, RotorState)> {
    let start = density.bound_log2;
    for growth in 0..=3 {
        let g = GasketLevel::new(n, start + growth);
        let sigma = discretize_floor(density, &g)?;
        match aggregate(&g, &sigma, init, order) {
            Err(Error::BoundaryContact { vertex }) => {
                if growth == 3 {
                    return Err(Error::BoundaryContact { vertex });
                }
            }
            other => return other.map(|s| (g, sigma, s)),
        }
    }
    unreachable!()
}

/// theta(x, y) = N(x, y) - N(y, x), indexed like edge_counts.
pub fn flux_theta(g: &GasketLevel, state: &RotorState) -> Vec<[i64; 4]> {
    let v = g.vertex_count() as u32;
    let mut theta = vec![[0i64; 4]; v as usize];
    for x in 0..v {
        for (slot, &y) in g.neighbors(x).iter().enumerate() {
            let back = g
                .neighbors(y)
                .iter()
                .position(|&z| z == x)
                .expect("adjacency is symmetric");
            theta[x as usize][slot] =
                state.edge_counts[x as usize][slot] as i64 - state.edge_counts[y as usize][back] as i64;
        }
    }
    theta
}

/// rho(x, y) = emitted(y) - emitted(x) + 4 theta(x, y): the defect of the
/// odometer gradient from the rotor flux. Bounded by 6 in absolute value.
pub fn flux_rho(g: &GasketLevel, state: &RotorState) -> Vec<[i64; 4]> {
    let theta = flux_theta(g, state);
    let v = g.vertex_count() as u32;
    let mut rho = vec![[0i64; 4]; v as usize];
    for x in 0..v {
        for (slot, &y) in g.neighbors(x).iter().enumerate() {
            rho[x as usize][slot] = state.emitted[y as usize] as i64
                - state.emitted[x as usize] as i64
                + 4 * theta[x as usize][slot];
        }
    }
    rho
}

/// div theta(x) = sum_y theta(x, y); equals sigma(x) - 1_{cluster}(x) for a
/// completed aggregation.
pub fn divergence_theta(g: &GasketLevel, state: &RotorState) -> Vec<i64> {
    let theta = flux_theta(g, state);
    (0..g.vertex_count())
        .map(|x| theta[x][..g.degree(x as u32)].iter().sum())
        .collect()
}
