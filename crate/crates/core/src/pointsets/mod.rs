//! Atomic probability measures `ν = Σ ω_j δ_{z_j}` on a manifold: the point
//! families studied here, file formats, and discrete energy minimization.

mod energy;
mod io;
mod lps;

pub use energy::{minimize_energy, EnergyTrace, StepPolicy};
pub use io::{format_f64, read_csv, read_json, to_json_string, write_csv, write_json, JsonNumberFormatter};
pub use lps::{lps_generators, lps_orbit_size, lps_words};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Result};
use crate::manifold::{equal_measure_partition, perfect_root, rng_for, uniform_sample, ManifoldSpec, Point};
use crate::scalar::{pairwise_sum, Real};

/// Tolerance on `Σ ω_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

const TAG_JITTER: u64 = 0x6a69_7474;

/// Where a point set came from: a family tag plus free-form parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub family: String,
    #[serde(flatten)]
    pub params: BTreeMap<String, Value>,
}

impl Provenance {
    pub fn new(family: impl Into<String>) -> Self {
        Self { family: family.into(), params: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// Nodes with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    pub manifold: ManifoldSpec,
    pub nodes: Vec<Point<T>>,
    pub weights: Vec<T>,
    pub provenance: Provenance,
}

impl<T: Real> PointSet<T> {
    /// Validating constructor.
    pub fn new(manifold: ManifoldSpec, nodes: Vec<Point<T>>, weights: Vec<T>, provenance: Provenance) -> Result<Self> {
        let ps = Self { manifold, nodes, weights, provenance };
        ps.check()?;
        Ok(ps)
    }

    /// Equal weights `1/N`.
    pub fn equal_weights(manifold: ManifoldSpec, nodes: Vec<Point<T>>, provenance: Provenance) -> Result<Self> {
        if nodes.is_empty() {
            return invalid("a point set needs at least one node");
        }
        let w = T::one() / T::from_usize_(nodes.len());
        let weights = vec![w; nodes.len()];
        Self::new(manifold, nodes, weights, provenance)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Checks the measure invariants.
    pub fn check(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return invalid("a point set needs at least one node");
        }
        if self.nodes.len() != self.weights.len() {
            return invalid(format!(
                "{} nodes but {} weights",
                self.nodes.len(),
                self.weights.len()
            ));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w >= T::zero()) || !w.is_finite()) {
            return invalid(format!("weights must be finite and nonnegative, found {w}"));
        }
        let s = pairwise_sum(&self.weights);
        if (s - T::one()).abs() > T::lit(WEIGHT_SUM_TOL) {
            return invalid(format!("weights sum to {s}, not 1"));
        }
        for p in &self.nodes {
            self.manifold.check_point(p)?;
        }
        Ok(())
    }
}

/// Point families with their parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "family")]
pub enum Family {
    /// `n` points per axis of the torus grid `(n^{-1} Z^d) ∩ T^d`.
    Lattice { n: usize },
    Random { n: usize },
    /// One uniform point in each cell of the equal-measure partition.
    Jittered { n: usize },
    /// Golden-angle spiral on the sphere.
    Fibonacci { n: usize },
    /// Orbit of `base` under all reduced words of length at most
    /// `word_length` in the rotations by `arccos(-3/5)` about the axes.
    LpsOrbit { base: [f64; 3], word_length: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Lattice { .. } => "lattice",
            Family::Random { .. } => "random",
            Family::Jittered { .. } => "jittered",
            Family::Fibonacci { .. } => "fibonacci",
            Family::LpsOrbit { .. } => "lps_orbit",
        }
    }
}

/// Generates a member of `family` on `m`; deterministic in `seed`.
pub fn generate<T: Real>(m: &ManifoldSpec, family: &Family, seed: u64) -> Result<PointSet<T>> {
    let prov = Provenance::new(family.name()).with("seed", seed);
    match *family {
        Family::Lattice { n } => {
            if !m.is_torus() {
                return invalid("the lattice family lives on the torus only");
            }
            if n == 0 {
                return invalid("lattice side must be at least 1");
            }
            let total = n.checked_pow(m.dim as u32).filter(|t| *t <= 1 << 26);
            let Some(total) = total else {
                return invalid(format!("lattice with side {n} in dimension {} is too large", m.dim));
            };
            let nf = T::from_usize_(n);
            let nodes = (0..total)
                .map(|mut idx| {
                    let mut c = [T::zero(); 3];
                    for i in (0..m.dim).rev() {
                        c[i] = T::from_usize_(idx % n) / nf;
                        idx /= n;
                    }
                    Point { c }
                })
                .collect();
            PointSet::equal_weights(*m, nodes, prov.with("n", n))
        }
        Family::Random { n } => {
            let nodes = uniform_sample(m, n, seed)?;
            PointSet::equal_weights(*m, nodes, prov.with("n", n))
        }
        Family::Jittered { n } => {
            if m.is_torus() && perfect_root(n, m.dim).is_none() {
                return invalid(format!("N must be a perfect d-th power (N = {n}, d = {})", m.dim));
            }
            let part = equal_measure_partition::<T>(m, n)?;
            let mut rng = rng_for(seed, TAG_JITTER);
            let nodes = (0..part.cells.len()).map(|j| part.sample_cell(j, &mut rng)).collect();
            let weights = part.cells.iter().map(|c| c.measure).collect();
            PointSet::new(*m, nodes, weights, prov.with("n", n))
        }
        Family::Fibonacci { n } => {
            if !m.is_sphere() {
                return invalid("the fibonacci family lives on the sphere only");
            }
            if n == 0 {
                return invalid("fibonacci size must be at least 1");
            }
            PointSet::equal_weights(*m, fibonacci_nodes(n), prov.with("n", n))
        }
        Family::LpsOrbit { base, word_length } => {
            if !m.is_sphere() {
                return invalid("the lps_orbit family lives on the sphere only");
            }
            let b = m.point(&[T::lit(base[0]), T::lit(base[1]), T::lit(base[2])])?;
            let nodes = lps::orbit(&b, word_length)?;
            let prov = prov.with("base", base.to_vec()).with("word_length", word_length);
            PointSet::equal_weights(*m, nodes, prov)
        }
    }
}

/// Golden-angle spiral: `z_i = 1 - (2i+1)/N`, longitude `i·π(3-√5)`.
pub fn fibonacci_nodes<T: Real>(n: usize) -> Vec<Point<T>> {
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let nf = T::from_usize_(n);
    (0..n)
        .map(|i| {
            let z = T::one() - T::from_usize_(2 * i + 1) / nf;
            let s = (T::one() - z * z).max(T::zero()).sqrt();
            let phi = golden * T::from_usize_(i);
            let phi = phi - T::TAU() * (phi / T::TAU()).floor();
            let c = [s * phi.cos(), s * phi.sin(), z];
            let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            Point { c: [c[0] / norm, c[1] / norm, c[2] / norm] }
        })
        .collect()
}

#[cfg(test)]
mod tests;
