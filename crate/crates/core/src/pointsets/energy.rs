//! Projected gradient descent on `E(z) = Σ_i Σ_j ω_i ω_j B^{2α}(z_i, z_j)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{BesselKernel, DEFAULT_MAX_TERMS};
use crate::manifold::{wrap_unit, Point};
use crate::pointsets::PointSet;
use crate::scalar::{pairwise_sum, Real};

/// Kernel truncation used for energies and gradients.
const ENERGY_TOL: f64 = 1e-10;

/// Backtracking line search parameters. Steps are measured as the largest
/// node displacement, in units of the typical spacing `N^{-1/d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    pub initial: f64,
    pub shrink: f64,
    pub grow: f64,
    /// Stop once the trial displacement falls below this.
    pub min_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self { initial: 0.1, shrink: 0.5, grow: 1.5, min_step: 1e-7 }
    }
}

/// Result of [`minimize_energy`].
#[derive(Debug, Clone)]
pub struct EnergyTrace<T> {
    /// Best iterate, which is also the last accepted one.
    pub points: PointSet<T>,
    /// `E - 1` after each accepted step, starting with the input.
    pub energies: Vec<T>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Locally minimizes the discrete energy with weights held fixed.
pub fn minimize_energy<T: Real>(
    ps: &PointSet<T>,
    alpha: T,
    steps: usize,
    policy: StepPolicy,
) -> Result<EnergyTrace<T>> {
    let m = ps.manifold;
    let d = T::from_usize_(m.dim);
    if !(alpha + alpha > d) {
        return invalid(format!("energy minimization needs 2α > d, got α = {alpha}, d = {}", m.dim));
    }
    if !(policy.initial > 0.0 && policy.shrink > 0.0 && policy.shrink < 1.0 && policy.grow >= 1.0) {
        return invalid("step policy needs initial > 0, 0 < shrink < 1 and grow ≥ 1");
    }
    ps.check()?;
    let order = alpha + alpha;
    let tol = T::lit(ENERGY_TOL);
    let kernel = BesselKernel::for_batch(&m, order, ps.len(), tol, DEFAULT_MAX_TERMS)?;
    let pointwise = BesselKernel::new(&m, order, tol, DEFAULT_MAX_TERMS)?;
    let spacing = T::from_usize_(ps.len()).powf(-T::one() / d);

    let mut current = ps.clone();
    let mut energy = kernel.energy(&current.nodes, &current.weights)?.0;
    let mut energies = vec![energy];
    let mut step = T::lit(policy.initial) * spacing;
    let min_step = T::lit(policy.min_step) * spacing;
    let (mut accepted, mut rejected) = (0, 0);

    'outer: for _ in 0..steps {
        let grad = gradient(&pointwise, &current);
        let gmax = grad
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
            .fold(T::zero(), T::max);
        if gmax == T::zero() {
            break;
        }
        loop {
            let scale = step / gmax;
            let nodes: Vec<Point<T>> = current
                .nodes
                .iter()
                .zip(&grad)
                .map(|(p, g)| retract(&m, p, g, scale))
                .collect();
            let trial = kernel.energy(&nodes, &current.weights)?.0;
            if trial < energy {
                current.nodes = nodes;
                energy = trial;
                energies.push(energy);
                accepted += 1;
                step = step * T::lit(policy.grow);
                break;
            }
            rejected += 1;
            step = step * T::lit(policy.shrink);
            if step < min_step {
                break 'outer;
            }
        }
    }
    current.provenance = current
        .provenance
        .clone()
        .with("minimized_alpha", alpha.f64())
        .with("minimized_steps", accepted);
    Ok(EnergyTrace { points: current, energies, accepted, rejected })
}

/// `∂E/∂z_i = 2 ω_i Σ_{j≠i} ω_j ∇_x B(z_i, z_j)`, rows in parallel, each
/// row summed in index order.
fn gradient<T: Real>(kernel: &BesselKernel<T>, ps: &PointSet<T>) -> Vec<[T; 3]> {
    let n = ps.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut parts: [Vec<T>; 3] = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let g = kernel.gradient(&ps.nodes[i], &ps.nodes[j]);
                for k in 0..3 {
                    parts[k].push(ps.weights[j] * g[k]);
                }
            }
            let w = ps.weights[i] + ps.weights[i];
            [w * pairwise_sum(&parts[0]), w * pairwise_sum(&parts[1]), w * pairwise_sum(&parts[2])]
        })
        .collect()
}

/// Moves `p` against `g` by `scale · g` and maps back onto the manifold.
fn retract<T: Real>(m: &crate::manifold::ManifoldSpec, p: &Point<T>, g: &[T; 3], scale: T) -> Point<T> {
    let mut c = [T::zero(); 3];
    if m.is_torus() {
        for i in 0..m.dim {
            c[i] = wrap_unit(p.c[i] - scale * g[i]);
        }
    } else {
        for i in 0..3 {
            c[i] = p.c[i] - scale * g[i];
        }
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        for v in c.iter_mut() {
            *v = *v / n;
        }
    }
    Point { c }
}
