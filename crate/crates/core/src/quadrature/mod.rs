//! Exact quadrature below a band limit: positive weights on a candidate mesh
//! found by nonnegative least squares on the moment equations, then pruned
//! to at most `basisSize + 1` atoms.

mod nnls;
mod prune;

pub use prune::{caratheodory_prune, Pruned};

use rayon::prelude::*;

use crate::analysis::{moment_residual, moment_vector};
use crate::error::{invalid, Error, Result};
use crate::manifold::{eval_basis, random_point, rng_for, spectrum_below, ManifoldSpec, Point, SpectrumSlice};
use crate::pointsets::{fibonacci_nodes, generate, Family, PointSet, Provenance};
use crate::scalar::{pairwise_sum, Real};

/// Default moment tolerance.
pub const DEFAULT_RULE_TOL: f64 = 1e-10;
/// How many times an infeasible build doubles its candidate budget.
pub const MAX_RETRIES: usize = 3;
/// Largest design matrix (rows × candidates) assembled.
pub const MAX_DESIGN_ENTRIES: usize = 1 << 25;

const TAG_CANDIDATES: u64 = 0x6361_6e64;

/// Dense column-major matrix with one column per node.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> MomentMatrix<T> {
    /// `data` holds the columns back to back.
    pub fn from_columns(rows: usize, data: Vec<T>) -> Self {
        assert!(rows > 0 && data.len() % rows == 0, "ragged moment matrix");
        Self { rows, cols: data.len() / rows, data }
    }

    /// Basis values of `s` at every node.
    pub fn assemble(m: &ManifoldSpec, s: &SpectrumSlice<T>, nodes: &[Point<T>]) -> Self {
        let data: Vec<T> = nodes.par_iter().flat_map_iter(|p| eval_basis(m, s, p)).collect();
        Self::from_columns(s.basis_size, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `Σ_{j ∈ idx} ω_j Φ_{·j}`, each row summed pairwise in `idx` order.
    pub fn apply_subset(&self, idx: &[usize], weights: &[T]) -> Vec<T> {
        let mut terms = Vec::with_capacity(idx.len());
        (0..self.rows)
            .map(|i| {
                terms.clear();
                terms.extend(idx.iter().map(|&j| weights[j] * self.data[j * self.rows + i]));
                pairwise_sum(&terms)
            })
            .collect()
    }
}

/// Moment equations `Σ_j ω_j φ(c_j) = δ_{φ,1}` over a candidate set.
#[derive(Debug, Clone)]
pub struct MomentSystem<T> {
    pub slice: SpectrumSlice<T>,
    /// 1 in the constant slot, 0 elsewhere.
    pub target: Vec<T>,
    pub candidates: Vec<Point<T>>,
    /// `basisSize × candidateCount`.
    pub matrix: MomentMatrix<T>,
}

impl<T: Real> MomentSystem<T> {
    pub fn new(slice: SpectrumSlice<T>, candidates: Vec<Point<T>>) -> Result<Self> {
        let b = slice.basis_size;
        if candidates.len() < b {
            return invalid(format!("{} candidates for {b} moments", candidates.len()));
        }
        let matrix = MomentMatrix::assemble(&slice.manifold, &slice, &candidates);
        let mut target = vec![T::zero(); b];
        target[0] = T::one();
        Ok(Self { slice, target, candidates, matrix })
    }

    /// Max-norm moment error of candidate weights.
    pub fn residual(&self, weights: &[T]) -> T {
        let idx: Vec<usize> = (0..weights.len()).filter(|&j| weights[j] != T::zero()).collect();
        moment_residual(&self.matrix.apply_subset(&idx, weights))
    }
}

/// `max_{λ < r} |Σ_j ω_j φ_λ(z_j) - δ_{λ,0}|`.
pub fn exactness_residual<T: Real>(ps: &PointSet<T>, r: T) -> Result<T> {
    let s = spectrum_below(&ps.manifold, r)?;
    Ok(moment_residual(&moment_vector(ps, &s)))
}

/// Mesh of about `max(2·basis, budget/2)` points (torus lattice, sphere
/// Fibonacci spiral) filled up to `budget` with uniform random points.
pub fn candidate_nodes<T: Real>(m: &ManifoldSpec, basis: usize, budget: usize, seed: u64) -> Result<Vec<Point<T>>> {
    let mesh = (2 * basis).max(budget / 2).min(budget);
    let mut nodes = if m.is_torus() {
        let mut side = (mesh as f64).powf(1.0 / m.dim as f64).round() as usize + 1;
        while side > 1 && side.pow(m.dim as u32) > mesh {
            side -= 1;
        }
        generate::<T>(m, &Family::Lattice { n: side }, seed)?.nodes
    } else {
        fibonacci_nodes(mesh)
    };
    let mut rng = rng_for(seed, TAG_CANDIDATES);
    while nodes.len() < budget {
        nodes.push(random_point(m, &mut rng));
    }
    Ok(nodes)
}

/// Builds a positive-weight rule exact for every eigenfunction with
/// `λ < r`, with at most `basisSize + 1` nodes. Infeasible systems are
/// retried with a doubled budget up to [`MAX_RETRIES`] times.
pub fn build_exact_rule<T: Real>(
    m: &ManifoldSpec,
    r: T,
    candidate_budget: usize,
    tol: T,
    seed: u64,
) -> Result<PointSet<T>> {
    if !(tol > T::zero()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    let slice = spectrum_below(m, r)?;
    let basis = slice.basis_size;
    if candidate_budget < 4 * basis {
        return invalid(format!(
            "candidate budget {candidate_budget} is below 4 × basisSize = {}",
            4 * basis
        ));
    }
    let mut budget = candidate_budget;
    let mut last = T::infinity();
    let mut tried = Vec::new();
    for attempt in 0..=MAX_RETRIES {
        if basis.saturating_mul(budget) > MAX_DESIGN_ENTRIES {
            return Err(Error::Resource {
                what: format!("design matrix {basis} × {budget} exceeds {MAX_DESIGN_ENTRIES} entries"),
                achieved: last.f64(),
            });
        }
        tried.push(budget);
        let cands = candidate_nodes(m, basis, budget, seed)?;
        let sys = MomentSystem::new(slice.clone(), cands)?;
        let out = nnls::nnls(&sys.matrix, &sys.target, tol * T::lit(1e-3), 4 * budget);
        let support: Vec<usize> = (0..budget).filter(|&j| out.x[j] > T::zero()).collect();
        let nodes: Vec<Point<T>> = support.iter().map(|&j| sys.candidates[j]).collect();
        let weights: Vec<T> = support.iter().map(|&j| out.x[j]).collect();
        let cols: Vec<T> = support.iter().flat_map(|&j| sys.matrix.column(j).iter().copied()).collect();
        if nodes.is_empty() {
            budget *= 2;
            continue;
        }
        let phi = MomentMatrix::from_columns(basis, cols);
        let pruned = caratheodory_prune(&nodes, &weights, &phi, tol)?;
        // the constant moment is matched only to tol; make Σω = 1 exact
        let total = pairwise_sum(&pruned.weights);
        let weights: Vec<T> = pruned.weights.iter().map(|&w| w / total).collect();
        let prov = Provenance::new("exact_rule")
            .with("r", r.f64())
            .with("tol", tol.f64())
            .with("seed", seed)
            .with("candidate_budget", budget)
            .with("attempts", attempt + 1)
            .with("nnls_iterations", out.iterations)
            .with("nnls_residual", out.residual.f64())
            .with("degenerate", pruned.degenerate);
        let ps = PointSet::new(*m, pruned.nodes, weights, prov)?;
        let residual = moment_residual(&moment_vector(&ps, &slice));
        last = residual;
        if residual <= tol && ps.len() <= basis + 1 {
            let mut ps = ps;
            ps.provenance = ps.provenance.with("residual", residual.f64());
            return Ok(ps);
        }
        budget *= 2;
    }
    Err(Error::Infeasible {
        residual: last.f64(),
        tol: tol.f64(),
        advice: format!("candidate budgets {tried:?} were not enough; try a larger candidateBudget"),
    })
}
