//! Discrete Fourier data `Fν(λ) = Σ_j ω_j φ_λ(z_j)` of a point set.

use rayon::prelude::*;

use crate::manifold::{eval_basis_into, SpectrumSlice};
use crate::pointsets::PointSet;
use crate::scalar::{pairwise_sum, Real};

/// Nodes per parallel chunk. Fixed so the reduction order never depends on
/// the thread count.
const CHUNK: usize = 256;

/// One entry per basis function of `s`: `Σ_j ω_j φ(z_j)`. Entry 0 is `Σ ω_j`.
pub fn moment_vector<T: Real>(ps: &PointSet<T>, s: &SpectrumSlice<T>) -> Vec<T> {
    let m = ps.manifold;
    let b = s.basis_size;
    let partials: Vec<Vec<T>> = ps
        .nodes
        .par_chunks(CHUNK)
        .zip(ps.weights.par_chunks(CHUNK))
        .map(|(nodes, weights)| {
            let mut acc = vec![T::zero(); b];
            let mut row = Vec::with_capacity(b);
            for (p, &w) in nodes.iter().zip(weights) {
                eval_basis_into(&m, s, p, &mut row);
                for (a, v) in acc.iter_mut().zip(&row) {
                    *a = *a + w * *v;
                }
            }
            acc
        })
        .collect();
    let mut col = Vec::with_capacity(partials.len());
    (0..b)
        .map(|i| {
            col.clear();
            col.extend(partials.iter().map(|p| p[i]));
            pairwise_sum(&col)
        })
        .collect()
}

/// `max_i |moment_i - δ_{i,0}|` for a moment vector.
pub(crate) fn moment_residual<T: Real>(moments: &[T]) -> T {
    moments
        .iter()
        .enumerate()
        .map(|(i, &v)| if i == 0 { (v - T::one()).abs() } else { v.abs() })
        .fold(T::zero(), T::max)
}
