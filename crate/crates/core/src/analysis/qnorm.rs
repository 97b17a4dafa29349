//! Discrete `L^q` norm of `G(y) = Σ_j ω_j B^α(z_j, y) - 1` on a
//! quasi-uniform grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{BesselKernel, DEFAULT_MAX_TERMS};
use crate::manifold::{perfect_root, ManifoldSpec, Point};
use crate::pointsets::{fibonacci_nodes, generate, Family, PointSet};
use crate::scalar::{pairwise_sum, Real};

/// Smallest grid accepted by [`qnorm_energy`].
pub const MIN_QNORM_GRID: usize = 16;

/// Equal-weight grid of `n` points: the lattice on the torus (`n` must be a
/// perfect d-th power), the Fibonacci spiral on the sphere.
pub fn quasi_uniform_grid<T: Real>(m: &ManifoldSpec, n: usize) -> Result<Vec<Point<T>>> {
    if m.is_sphere() {
        if n == 0 {
            return invalid("grid size must be at least 1");
        }
        return Ok(fibonacci_nodes(n));
    }
    let Some(side) = perfect_root(n, m.dim) else {
        return invalid(format!("grid size must be a perfect d-th power (n = {n}, d = {})", m.dim));
    };
    Ok(generate::<T>(m, &Family::Lattice { n: side }, 0)?.nodes)
}

/// Output of [`qnorm_energy`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QnormReport<T> {
    pub alpha: T,
    /// `None` stands for `q = ∞`.
    pub q: Option<T>,
    pub value: T,
    pub grid_points: usize,
    /// The same norm on the grid with a quarter of the points (a half per
    /// axis on `T^2`, and so on), when that grid is still above the floor.
    pub coarse_value: Option<T>,
    /// `|value - coarse_value|`, the reported grid error estimate.
    pub refinement_delta: Option<T>,
    /// Bound on the kernel truncation in each `G(y)`.
    pub kernel_bound: T,
}

/// `{∫ |G(y)|^q dy}^{1/q}` by the equal-weight rule on the grid (the max
/// for `q = ∞`). Requires `α > d(1 - 1/q)`, and on the torus `α > d` so the
/// kernel is finite everywhere.
pub fn qnorm_energy<T: Real>(ps: &PointSet<T>, alpha: T, q: T, grid: usize, tol: T) -> Result<QnormReport<T>> {
    let m = ps.manifold;
    ps.check()?;
    let d = T::from_usize_(m.dim);
    if !(q >= T::one()) {
        return invalid(format!("q must lie in [1, ∞], got {q}"));
    }
    let need = if q.is_infinite() { d } else { d * (T::one() - q.recip()) };
    if !(alpha > need) {
        return invalid(format!("alpha must exceed d(1 - 1/q) = {need}, got {alpha}"));
    }
    if m.is_torus() && !(alpha > d) {
        return invalid(format!("on the torus the kernel of order alpha = {alpha} needs alpha > d = {d}"));
    }
    if grid < MIN_QNORM_GRID {
        return invalid(format!("grid must have at least {MIN_QNORM_GRID} points, got {grid}"));
    }
    let kernel = BesselKernel::new(&m, alpha, tol, DEFAULT_MAX_TERMS)?;
    let (value, kernel_bound) = norm_on(&kernel, ps, q, &quasi_uniform_grid(&m, grid)?)?;
    let coarse = coarser(&m, grid)
        .filter(|&c| c >= MIN_QNORM_GRID)
        .map(|c| quasi_uniform_grid(&m, c).and_then(|g| norm_on(&kernel, ps, q, &g)).map(|r| r.0))
        .transpose()?;
    Ok(QnormReport {
        alpha,
        q: if q.is_infinite() { None } else { Some(q) },
        value,
        grid_points: grid,
        coarse_value: coarse,
        refinement_delta: coarse.map(|c| (c - value).abs()),
        kernel_bound,
    })
}

/// Grid size with a quarter of the points (sphere) or half the side (torus).
fn coarser(m: &ManifoldSpec, n: usize) -> Option<usize> {
    if m.is_sphere() {
        return Some(n / 4);
    }
    let side = perfect_root(n, m.dim)?;
    (side % 2 == 0).then(|| (side / 2).pow(m.dim as u32))
}

fn norm_on<T: Real>(k: &BesselKernel<T>, ps: &PointSet<T>, q: T, grid: &[Point<T>]) -> Result<(T, T)> {
    let vals: Vec<(T, T)> = grid
        .par_iter()
        .map(|y| {
            let mut terms = Vec::with_capacity(ps.len());
            let mut bound = T::zero();
            for (z, &w) in ps.nodes.iter().zip(&ps.weights) {
                let v = k.eval(z, y)?;
                terms.push(w * v.value);
                bound = bound + w * v.tail_bound;
            }
            Ok((pairwise_sum(&terms) - T::one(), bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = vals.iter().fold(T::zero(), |a, v| a.max(v.1));
    if q.is_infinite() {
        return Ok((vals.iter().fold(T::zero(), |a, v| a.max(v.0.abs())), bound));
    }
    let powers: Vec<T> = vals.iter().map(|v| v.0.abs().powf(q)).collect();
    let mean = pairwise_sum(&powers) / T::from_usize_(grid.len());
    Ok((mean.powf(q.recip()), bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{wce, WceMethod};
    use crate::quadrature::build_exact_rule;
    use std::f64::consts::TAU;

    #[test]
    fn q_two_matches_the_worst_case_error() {
        let t1 = ManifoldSpec::torus(1).unwrap();
        let ps: PointSet<f64> = generate(&t1, &Family::Random { n: 6 }, 2).unwrap();
        let r = qnorm_energy(&ps, 1.5, 2.0, 4096, 1e-12).unwrap();
        let w = wce(&ps, 1.5, WceMethod::Kernel, 1e-12).unwrap();
        assert!((r.value * r.value - w.value_squared).abs() < 1e-4, "{r:?} vs {w:?}");
        assert!(r.refinement_delta.unwrap() < 1e-3);
    }

    #[test]
    fn refinement_shrinks_the_grid_error() {
        let t1 = ManifoldSpec::torus(1).unwrap();
        let ps: PointSet<f64> = generate(&t1, &Family::Random { n: 5 }, 8).unwrap();
        let exact = wce(&ps, 1.5, WceMethod::Kernel, 1e-13).unwrap().value_squared;
        let err = |g: usize| (qnorm_energy(&ps, 1.5, 2.0, g, 1e-13).unwrap().value.powi(2) - exact).abs();
        let (a, b) = (err(256), err(1024));
        assert!(b <= a * 0.5, "{a} {b}");
    }

    #[test]
    fn near_perfect_rules_have_tiny_energy() {
        let t1 = ManifoldSpec::torus(1).unwrap();
        let ps: PointSet<f64> = build_exact_rule(&t1, TAU * 40.5, 400, 1e-12, 0).unwrap();
        let r = qnorm_energy(&ps, 3.0, f64::INFINITY, 1024, 1e-12).unwrap();
        assert!(r.value < 1e-5, "{r:?}");
        assert!(r.q.is_none());
    }

    #[test]
    fn preconditions() {
        let t1 = ManifoldSpec::torus(1).unwrap();
        let ps: PointSet<f64> = generate(&t1, &Family::Random { n: 3 }, 0).unwrap();
        assert!(qnorm_energy(&ps, 1.5, 0.5, 64, 1e-10).is_err());
        assert!(qnorm_energy(&ps, 1.5, 2.0, 8, 1e-10).is_err());
        assert!(qnorm_energy(&ps, 0.9, 2.0, 64, 1e-10).is_err());
        let t2 = ManifoldSpec::torus(2).unwrap();
        let ps2: PointSet<f64> = generate(&t2, &Family::Random { n: 3 }, 0).unwrap();
        assert!(qnorm_energy(&ps2, 2.5, 2.0, 60, 1e-10).is_err());
        let s2: PointSet<f64> = generate(&ManifoldSpec::sphere(), &Family::Random { n: 3 }, 0).unwrap();
        let e = qnorm_energy(&s2, 1.9, f64::INFINITY, 64, 1e-10).unwrap_err();
        assert!(e.to_string().contains("d(1 - 1/q) = 2"), "{e}");
        assert!(qnorm_energy(&s2, 1.5, 2.0, 64, 1e-10).is_ok());
    }
}
