//! Lazy-walk smoothing semigroup.
//!
//! One step holds with probability 1/2 and moves to each neighbor with
//! probability 1/8; a truncated corner keeps the missing 2/8 on its own
//! diagonal, which makes the kernel symmetric and doubly stochastic. With
//! that convention S = I + (1/2) * quarter-mean increment as an exact matrix
//! identity, so smoothing commutes with the Laplacian and the rescaled
//! operator identity holds on every row, corners included.

use crate::scalar::Scalar;
use crate::GasketLevel;

/// One lazy step applied to a mass or function vector.
pub fn lazy_step<S: Scalar>(g: &GasketLevel, f: &[S]) -> Vec<S> {
    assert_eq!(f.len(), g.vertex_count());
    let eighth = S::from_ratio(1, 8);
    (0..g.vertex_count() as u32)
        .map(|i| {
            let deg = g.degree(i) as i64;
            let mut acc = S::from_ratio(8 - deg, 8) * f[i as usize].clone();
            for &j in g.neighbors(i) {
                acc = acc + eighth.clone() * f[j as usize].clone();
            }
            acc
        })
        .collect()
}

/// k lazy steps: S_k f.
pub fn smooth<S: Scalar>(g: &GasketLevel, f: &[S], k: u32) -> Vec<S> {
    let mut cur = f.to_vec();
    for _ in 0..k {
        cur = lazy_step(g, &cur);
    }
    cur
}

/// Distribution of the lazy walk after t steps from a point mass at x;
/// entry y is the t-step transition probability x -> y.
pub fn lazy_step_distribution(g: &GasketLevel, x: u32, t: u32) -> Vec<f64> {
    let mut f = vec![0.0f64; g.vertex_count()];
    f[x as usize] = 1.0;
    smooth(g, &f, t)
}

/// On-diagonal transition probabilities P^t(x,x) for t = 1..=t_max,
/// computed by iterating the kernel once per step.
pub fn on_diagonal_decay(g: &GasketLevel, x: u32, t_max: u32) -> Vec<f64> {
    let mut f = vec![0.0f64; g.vertex_count()];
    f[x as usize] = 1.0;
    let mut out = Vec::with_capacity(t_max as usize);
    for _ in 0..t_max {
        f = lazy_step(g, &f);
        out.push(f[x as usize]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harmonic::{laplacian, spow};
    use crate::scalar::Scalar;
    use crate::{ALPHA, BETA};
    use num_rational::BigRational;

    fn rational_field(g: &GasketLevel) -> Vec<BigRational> {
        (0..g.vertex_count())
            .map(|i| BigRational::from_ratio(((i * 23 + 5) % 17) as i64 - 8, 3))
            .collect()
    }

    #[test]
    fn zero_steps_is_identity() {
        let g = GasketLevel::new(1, 1);
        let f = rational_field(&g);
        assert_eq!(smooth(&g, &f, 0), f);
    }

    #[test]
    fn operator_identity_with_laplacian_is_exact() {
        // Delta_n f = 2 * 5^n (S_1 f - f) on every row.
        let g = GasketLevel::new(2, 1);
        let f = rational_field(&g);
        let lap = laplacian(&g, g.n() as i32, &f);
        let sf = lazy_step(&g, &f);
        let two = BigRational::from_ratio(2, 1);
        let w = spow::<BigRational>(5, g.n() as i32);
        for i in 0..g.vertex_count() {
            let rhs = two.clone() * w.clone() * (sf[i].clone() - f[i].clone());
            assert_eq!(lap[i], rhs, "row {i}");
        }
    }

    #[test]
    fn mass_is_preserved_exactly() {
        let g = GasketLevel::new(2, 0);
        // Mass on a corner exercises the truncated diagonal.
        let mut f = rational_field(&g);
        let c = g.corner_indices()[0];
        f[c as usize] = BigRational::from_ratio(7, 2);
        let total = |v: &[BigRational]| v.iter().cloned().fold(BigRational::zero(), |a, b| a + b);
        let before = total(&f);
        let after = total(&smooth(&g, &f, 9));
        assert_eq!(before, after);
    }

    #[test]
    fn steps_compose_as_a_semigroup() {
        let g = GasketLevel::new(1, 1);
        let f = rational_field(&g);
        let a = smooth(&g, &smooth(&g, &f, 3), 5);
        let b = smooth(&g, &f, 8);
        assert_eq!(a, b);
    }

    #[test]
    fn smoothing_commutes_with_laplacian() {
        let g = GasketLevel::new(2, 1);
        let f = rational_field(&g);
        let a = laplacian(&g, g.n() as i32, &smooth(&g, &f, 4));
        let b = smooth(&g, &laplacian(&g, g.n() as i32, &f), 4);
        assert_eq!(a, b);
    }

    #[test]
    fn on_diagonal_decay_has_stable_exponent() {
        // P^t(0,0) * t^{alpha/beta} stays in a narrow band over dyadic t.
        let g = GasketLevel::new(5, 1);
        let o = g.index_of(crate::Vertex::origin()).unwrap();
        let diag = on_diagonal_decay(&g, o, 1 << 10);
        let ratio = ALPHA / BETA;
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for j in 1..=10 {
            let t = 1u32 << j;
            let q = diag[t as usize - 1] * (t as f64).powf(ratio);
            lo = lo.min(q);
            hi = hi.max(q);
        }
        assert!(hi / lo < 4.0, "band [{lo}, {hi}] too wide");
        assert!(lo > 0.05 && hi < 10.0, "band [{lo}, {hi}] out of range");
    }
}
