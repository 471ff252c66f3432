//! Internal aggregation models on rescaled Sierpinski gasket graphs.
//!
//! The crate provides the doubly-infinite gasket geometry truncated to a
//! double triangle B(0, 2^L), exact-measure density discretization, discrete
//! potential theory (graph Laplacian, Dirichlet energy, harmonic splines,
//! stopped Green functions, heat-kernel smoothing), three aggregation models
//! (divisible sandpile, rotor-router, internal DLA), the discrete obstacle
//! problem with its closed-form reference solution for single-ball densities,
//! and a convergence harness for scaling-limit experiments.

pub mod closed_form;
pub mod fields;
pub mod gasket;
pub mod green;
pub mod harmonic;
pub mod idla;
pub mod io;
pub mod limits;
pub mod obstacle;
pub mod render;
pub mod rotor;
pub mod sandpile;
pub mod scalar;
pub mod smooth;
pub mod solve;

pub use gasket::{Cell, GasketLevel, Half, Vertex};

/// Mesh size 2^{-n}.
pub fn mesh(n: u32) -> f64 {
    (0.5f64).powi(n as i32)
}

/// delta_n^alpha = 3^{-n}, the volume rescaling at level n.
pub fn alpha_scale(n: u32) -> f64 {
    (3.0f64).powi(-(n as i32))
}

/// delta_n^beta = 5^{-n}, the time rescaling at level n.
pub fn beta_scale(n: u32) -> f64 {
    (5.0f64).powi(-(n as i32))
}

/// log 3 / log 2, the volume growth exponent.
pub const ALPHA: f64 = 1.584962500721156;

/// log 5 / log 2, the walk dimension.
pub const BETA: f64 = 2.321928094887362;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not a gasket vertex: {half:?} a={a} b={b} at level {n}, domain B(0,2^{domain_log2})")]
    NotAVertex {
        half: Half,
        a: u64,
        b: u64,
        n: u32,
        domain_log2: u32,
    },

    #[error("cell scale finer than vertex level required (vertex level {vertex_level}, requested scale {scale})")]
    CellScale { vertex_level: u32, scale: i32 },

    #[error("domain boundary contact at {vertex:?}; enlarge domain")]
    BoundaryContact { vertex: Vertex },

    #[error("invalid density spec: {0}")]
    Density(String),

    #[error("solver did not converge: {0}")]
    Solver(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("step cap of {cap} exceeded during walk")]
    StepCap { cap: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("bad json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
