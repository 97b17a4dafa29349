//! Geometry of the flat torus `T^d` (d = 1, 2, 3) and the sphere `S^2`:
//! points, distances, sampling, spectral data and equal-measure partitions.
//!
//! Both manifolds carry their Riemannian measure normalized to total mass 1.

mod partition;
mod spectrum;

pub use partition::{equal_measure_partition, perfect_root, Cell, Partition, Region};
pub use spectrum::{eval_basis, spectrum_below, spectrum_below_with_budget, Shell, ShellIndex, SpectrumSlice};
pub(crate) use spectrum::eval_basis_into;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::special::legendre;

/// Which manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Torus,
    Sphere,
}

/// A manifold together with its intrinsic dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub dim: usize,
}

impl ManifoldSpec {
    pub fn torus(dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return invalid(format!("torus dimension must be 1, 2 or 3, got {dim}"));
        }
        Ok(Self { kind: ManifoldKind::Torus, dim })
    }

    pub fn sphere() -> Self {
        Self { kind: ManifoldKind::Sphere, dim: 2 }
    }

    /// Validates a spec coming from untrusted input (files, CLI).
    pub fn checked(kind: ManifoldKind, dim: usize) -> Result<Self> {
        match kind {
            ManifoldKind::Torus => Self::torus(dim),
            ManifoldKind::Sphere if dim == 2 => Ok(Self::sphere()),
            ManifoldKind::Sphere => invalid(format!("only the 2-sphere is supported, got dim {dim}")),
        }
    }

    pub fn is_torus(&self) -> bool {
        self.kind == ManifoldKind::Torus
    }

    pub fn is_sphere(&self) -> bool {
        self.kind == ManifoldKind::Sphere
    }

    /// Number of stored coordinates per point.
    pub fn ambient_dim(&self) -> usize {
        match self.kind {
            ManifoldKind::Torus => self.dim,
            ManifoldKind::Sphere => 3,
        }
    }

    /// Builds a point, reducing torus coordinates mod 1 and renormalizing
    /// sphere vectors that are within `1e-9` of unit length (vectors already
    /// unit to rounding are kept as given).
    pub fn point<T: Real>(&self, coords: &[T]) -> Result<Point<T>> {
        if coords.len() != self.ambient_dim() {
            return invalid(format!(
                "expected {} coordinates, got {}",
                self.ambient_dim(),
                coords.len()
            ));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("non-finite coordinate");
        }
        let mut c = [T::zero(); 3];
        match self.kind {
            ManifoldKind::Torus => {
                for (dst, &x) in c.iter_mut().zip(coords) {
                    *dst = wrap_unit(x);
                }
            }
            ManifoldKind::Sphere => {
                let norm = coords.iter().map(|&x| x * x).sum::<T>().sqrt();
                if (norm - T::one()).abs() > T::lit(1e-9) {
                    return invalid(format!("sphere point has norm {norm}, not 1"));
                }
                // already-unit input is kept verbatim so files round trip
                let exact = (norm - T::one()).abs() <= T::lit(4.0 * f64::EPSILON);
                for (dst, &x) in c.iter_mut().zip(coords) {
                    *dst = if exact { x } else { x / norm };
                }
            }
        }
        Ok(Point { c })
    }

    /// Checks that an existing point is valid for this manifold.
    pub fn check_point<T: Real>(&self, p: &Point<T>) -> Result<()> {
        match self.kind {
            ManifoldKind::Torus => {
                if p.c[..self.dim].iter().any(|&x| !(x >= T::zero() && x < T::one())) {
                    return invalid("torus point outside [0,1)^d");
                }
            }
            ManifoldKind::Sphere => {
                if (p.norm() - T::one()).abs() > T::lit(1e-12) {
                    return invalid(format!("sphere point has norm {}, not 1", p.norm()));
                }
            }
        }
        Ok(())
    }

    /// The base point used for "north pole"/origin style defaults.
    pub fn origin<T: Real>(&self) -> Point<T> {
        match self.kind {
            ManifoldKind::Torus => Point { c: [T::zero(); 3] },
            ManifoldKind::Sphere => Point { c: [T::zero(), T::zero(), T::one()] },
        }
    }
}

impl std::fmt::Display for ManifoldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ManifoldKind::Torus => write!(f, "torus:{}", self.dim),
            ManifoldKind::Sphere => write!(f, "sphere:{}", self.dim),
        }
    }
}

/// A point on a manifold. Unused trailing coordinates are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub c: [T; 3],
}

impl<T: Real> Point<T> {
    pub fn coords(&self, m: &ManifoldSpec) -> &[T] {
        &self.c[..m.ambient_dim()]
    }

    fn norm(&self) -> T {
        (self.c[0] * self.c[0] + self.c[1] * self.c[1] + self.c[2] * self.c[2]).sqrt()
    }

    pub fn dot(&self, o: &Self) -> T {
        self.c[0] * o.c[0] + self.c[1] * o.c[1] + self.c[2] * o.c[2]
    }
}

/// Reduces a real number into `[0, 1)`.
pub fn wrap_unit<T: Real>(x: T) -> T {
    let y = x - x.floor();
    if y >= T::one() {
        T::zero()
    } else {
        y
    }
}

/// Minimal-image difference `x - y` on the torus, each axis in `[-1/2, 1/2]`.
pub fn torus_delta<T: Real>(dim: usize, x: &Point<T>, y: &Point<T>) -> [T; 3] {
    let mut d = [T::zero(); 3];
    let half = T::lit(0.5);
    for i in 0..dim {
        let mut v = x.c[i] - y.c[i];
        v = v - v.round();
        if v < -half {
            v = v + T::one();
        } else if v > half {
            v = v - T::one();
        }
        d[i] = v;
    }
    d
}

/// Chord-based quantities for a sphere pair: `(cos θ, 1 - cos θ)` with the
/// second entry computed from the chord length to avoid cancellation.
pub fn sphere_cos_pair<T: Real>(x: &Point<T>, y: &Point<T>) -> (T, T) {
    let mut chord2 = T::zero();
    for i in 0..3 {
        let d = x.c[i] - y.c[i];
        chord2 = chord2 + d * d;
    }
    let one_minus = (chord2 * T::lit(0.5)).min(T::lit(2.0));
    (T::one() - one_minus, one_minus)
}

/// Riemannian distance between two points.
pub fn geodesic_distance<T: Real>(m: &ManifoldSpec, x: &Point<T>, y: &Point<T>) -> Result<T> {
    m.check_point(x)?;
    m.check_point(y)?;
    Ok(distance_unchecked(m, x, y))
}

/// [`geodesic_distance`] without validation, for inner loops.
pub fn distance_unchecked<T: Real>(m: &ManifoldSpec, x: &Point<T>, y: &Point<T>) -> T {
    match m.kind {
        ManifoldKind::Torus => {
            let d = torus_delta(m.dim, x, y);
            d.iter().map(|&v| v * v).sum::<T>().sqrt()
        }
        ManifoldKind::Sphere => {
            let cross = [
                x.c[1] * y.c[2] - x.c[2] * y.c[1],
                x.c[2] * y.c[0] - x.c[0] * y.c[2],
                x.c[0] * y.c[1] - x.c[1] * y.c[0],
            ];
            let s = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            s.atan2(x.dot(y))
        }
    }
}

/// Deterministic RNG for a `(seed, tag)` pair; distinct tags give
/// independent streams.
pub fn rng_for(seed: u64, tag: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag);
    rng
}

pub(crate) const TAG_UNIFORM: u64 = 0x756e_6966;

/// Draws a uniform point on `m`.
pub fn random_point<T: Real, R: Rng>(m: &ManifoldSpec, rng: &mut R) -> Point<T> {
    let mut c = [T::zero(); 3];
    match m.kind {
        ManifoldKind::Torus => {
            for v in c.iter_mut().take(m.dim) {
                *v = wrap_unit(T::lit(rng.gen::<f64>()));
            }
        }
        ManifoldKind::Sphere => {
            let z: f64 = rng.gen_range(-1.0..=1.0);
            let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - z * z).max(0.0).sqrt();
            c = [T::lit(s * phi.cos()), T::lit(s * phi.sin()), T::lit(z)];
            let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            for v in c.iter_mut() {
                *v = *v / n;
            }
        }
    }
    Point { c }
}

/// `n` i.i.d. uniform points, deterministic in `seed`.
pub fn uniform_sample<T: Real>(m: &ManifoldSpec, n: usize, seed: u64) -> Result<Vec<Point<T>>> {
    if n == 0 {
        return invalid("sample size must be at least 1");
    }
    let mut rng = rng_for(seed, TAG_UNIFORM);
    Ok((0..n).map(|_| random_point(m, &mut rng)).collect())
}

/// Zonal function of degree `n` on `S^2` under the normalized measure:
/// `(2n+1) P_n(t)`, so that `Σ_m Y_nm(x) Y_nm(y) = zonal_eval(n, x·y)`.
pub fn zonal_eval<T: Real>(n: usize, t: T) -> Result<T> {
    let tol = T::lit(1e-12);
    if !(t >= -T::one() - tol && t <= T::one() + tol) {
        return invalid(format!("zonal argument {t} outside [-1, 1]"));
    }
    let t = t.max(-T::one()).min(T::one());
    Ok(T::from_usize_(2 * n + 1) * legendre(n, t))
}
