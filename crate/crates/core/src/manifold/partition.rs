use rand::Rng;

use crate::error::{invalid, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::scalar::Real;

/// Geometric description of a cell, used for membership and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum Region<T> {
    /// Axis-aligned box `[lo, hi)` in torus coordinates.
    Box { lo: [T; 3], hi: [T; 3] },
    /// Spherical zone sector: colatitude in `[theta_lo, theta_hi)` and
    /// longitude in `[phi_lo, phi_hi)` (longitudes in `[0, 2π)`).
    Zone { theta_lo: T, theta_hi: T, phi_lo: T, phi_hi: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell<T> {
    pub representative: Point<T>,
    pub measure: T,
    /// Upper bound on the cell diameter.
    pub diameter: T,
    pub region: Region<T>,
}

/// Disjoint cover of the manifold by cells of known measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<T> {
    pub manifold: ManifoldSpec,
    pub cells: Vec<Cell<T>>,
}

impl<T: Real> Partition<T> {
    /// Construction constant `c` in `max diameter <= c N^{-1/d}`.
    pub fn diameter_constant(&self) -> T {
        let n = T::from_usize_(self.cells.len());
        let dmax = self.cells.iter().map(|c| c.diameter).fold(T::zero(), T::max);
        dmax * n.powf(T::one() / T::from_usize_(self.manifold.dim))
    }

    /// Index of the cell containing `x`.
    pub fn locate(&self, x: &Point<T>) -> Option<usize> {
        self.cells.iter().position(|c| c.region.contains(&self.manifold, x))
    }

    /// Uniform point inside cell `j`.
    pub fn sample_cell<R: Rng>(&self, j: usize, rng: &mut R) -> Point<T> {
        self.cells[j].region.sample(&self.manifold, rng)
    }
}

impl<T: Real> Region<T> {
    pub fn contains(&self, m: &ManifoldSpec, x: &Point<T>) -> bool {
        match self {
            Region::Box { lo, hi } => (0..m.dim).all(|i| x.c[i] >= lo[i] && x.c[i] < hi[i]),
            Region::Zone { theta_lo, theta_hi, phi_lo, phi_hi } => {
                let (theta, phi) = polar(x);
                let top_ok = theta >= *theta_lo || *theta_lo == T::zero();
                let bottom_ok = theta < *theta_hi || *theta_hi >= T::PI();
                top_ok && bottom_ok && phi >= *phi_lo && phi < *phi_hi
            }
        }
    }

    pub fn sample<R: Rng>(&self, m: &ManifoldSpec, rng: &mut R) -> Point<T> {
        match self {
            Region::Box { lo, hi } => {
                let mut c = [T::zero(); 3];
                for i in 0..m.dim {
                    let u = T::lit(rng.gen::<f64>());
                    let v = lo[i] + (hi[i] - lo[i]) * u;
                    c[i] = if v >= hi[i] { lo[i] } else { v };
                }
                Point { c }
            }
            Region::Zone { theta_lo, theta_hi, phi_lo, phi_hi } => {
                let (z_hi, z_lo) = (theta_lo.cos(), theta_hi.cos());
                let z = z_lo + (z_hi - z_lo) * T::lit(rng.gen::<f64>());
                let phi = *phi_lo + (*phi_hi - *phi_lo) * T::lit(rng.gen::<f64>());
                let s = (T::one() - z * z).max(T::zero()).sqrt();
                Point { c: [s * phi.cos(), s * phi.sin(), z] }
            }
        }
    }
}

/// Colatitude in `[0, π]` and longitude in `[0, 2π)`.
fn polar<T: Real>(x: &Point<T>) -> (T, T) {
    let rho = (x.c[0] * x.c[0] + x.c[1] * x.c[1]).sqrt();
    let theta = rho.atan2(x.c[2]);
    let mut phi = x.c[1].atan2(x.c[0]);
    if phi < T::zero() {
        phi = phi + T::TAU();
    }
    if phi >= T::TAU() {
        phi = T::zero();
    }
    (theta, phi)
}

/// Partition into `n` cells of measure `1/n`: cubes on the torus (requires
/// `n` to be a perfect d-th power), recursive zonal equal-area cells on the
/// sphere.
pub fn equal_measure_partition<T: Real>(m: &ManifoldSpec, n: usize) -> Result<Partition<T>> {
    if n == 0 {
        return invalid("partition size must be at least 1");
    }
    match m.kind {
        ManifoldKind::Torus => torus_cubes(m, n),
        ManifoldKind::Sphere => Ok(sphere_zones(m, n)),
    }
}

/// Integer `side` with `side^d == n`, if any.
pub fn perfect_root(n: usize, d: usize) -> Option<usize> {
    let guess = (n as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&s| s.checked_pow(d as u32) == Some(n))
}

fn torus_cubes<T: Real>(m: &ManifoldSpec, n: usize) -> Result<Partition<T>> {
    let d = m.dim;
    let Some(side) = perfect_root(n, d) else {
        return invalid(format!("N must be a perfect d-th power (N = {n}, d = {d})"));
    };
    let h = T::one() / T::from_usize_(side);
    let measure = T::one() / T::from_usize_(n);
    let diameter = h * T::from_usize_(d).sqrt();
    let mut cells = Vec::with_capacity(n);
    for flat in 0..n {
        let mut lo = [T::zero(); 3];
        let mut hi = [T::zero(); 3];
        let mut rep = [T::zero(); 3];
        let mut rest = flat;
        for i in (0..d).rev() {
            let k = rest % side;
            rest /= side;
            lo[i] = T::from_usize_(k) * h;
            hi[i] = if k + 1 == side { T::one() } else { T::from_usize_(k + 1) * h };
            rep[i] = lo[i] + h * T::lit(0.5);
        }
        cells.push(Cell {
            representative: Point { c: rep },
            measure,
            diameter,
            region: Region::Box { lo, hi },
        });
    }
    Ok(Partition { manifold: *m, cells })
}

/// Colatitude of the polar cap with normalized area `a`.
fn cap_colatitude(a: f64) -> f64 {
    // (1 - cos θ)/2 = a
    2.0 * a.clamp(0.0, 1.0).sqrt().asin()
}

fn sphere_zones<T: Real>(m: &ManifoldSpec, n: usize) -> Partition<T> {
    let pi = std::f64::consts::PI;
    let measure = T::one() / T::from_usize_(n);
    if n == 1 {
        return Partition {
            manifold: *m,
            cells: vec![Cell {
                representative: Point { c: [T::zero(), T::zero(), T::one()] },
                measure,
                diameter: T::PI(),
                region: Region::Zone {
                    theta_lo: T::zero(),
                    theta_hi: T::PI(),
                    phi_lo: T::zero(),
                    phi_hi: T::TAU(),
                },
            }],
        };
    }
    let nf = n as f64;
    let theta_cap = cap_colatitude(1.0 / nf);
    // counts per collar between the polar caps
    let mut counts: Vec<usize> = Vec::new();
    if n > 2 {
        let ideal_angle = (4.0 * pi / nf).sqrt();
        let n_collars = (((pi - 2.0 * theta_cap) / ideal_angle).round() as usize).max(1);
        let fit_angle = (pi - 2.0 * theta_cap) / n_collars as f64;
        let mut carry = 0.0;
        for i in 0..n_collars {
            let t0 = theta_cap + i as f64 * fit_angle;
            let t1 = t0 + fit_angle;
            let area = ((t0.cos() - t1.cos()) / 2.0) * nf;
            let want = area + carry;
            let k = want.round().max(1.0);
            carry = want - k;
            counts.push(k as usize);
        }
        // fix rounding so the total is exact
        let total: usize = counts.iter().sum::<usize>() + 2;
        if total != n {
            let last = counts.len() - 1;
            counts[last] = (counts[last] as i64 + n as i64 - total as i64).max(1) as usize;
        }
    }
    let mut cells = Vec::with_capacity(n);
    let cap = |theta_lo: f64, theta_hi: f64, rep_z: f64| Cell {
        representative: Point { c: [T::zero(), T::zero(), T::lit(rep_z)] },
        measure,
        diameter: T::lit(2.0 * theta_cap.min(pi / 2.0)).max(T::lit(theta_hi - theta_lo)),
        region: Region::Zone {
            theta_lo: T::lit(theta_lo),
            theta_hi: T::lit(theta_hi),
            phi_lo: T::zero(),
            phi_hi: T::TAU(),
        },
    };
    cells.push(cap(0.0, theta_cap, 1.0));
    let mut done = 1usize;
    let mut theta_top = theta_cap;
    for &k in &counts {
        done += k;
        let theta_bot = cap_colatitude(done as f64 / nf);
        let dphi = 2.0 * pi / k as f64;
        let sin_max = if theta_top <= pi / 2.0 && theta_bot >= pi / 2.0 {
            1.0
        } else {
            theta_top.sin().max(theta_bot.sin())
        };
        // meridian leg plus the longest parallel leg, capped by π
        let diam = if k == 1 {
            pi.min(theta_bot - theta_top + pi * sin_max)
        } else {
            pi.min((theta_bot - theta_top) + sin_max * dphi.min(pi))
        };
        let theta_mid = 0.5 * (theta_top + theta_bot);
        for j in 0..k {
            let phi_lo = j as f64 * dphi;
            let phi_hi = if j + 1 == k { 2.0 * pi } else { (j + 1) as f64 * dphi };
            let phi_mid = 0.5 * (phi_lo + phi_hi);
            cells.push(Cell {
                representative: Point {
                    c: [
                        T::lit(theta_mid.sin() * phi_mid.cos()),
                        T::lit(theta_mid.sin() * phi_mid.sin()),
                        T::lit(theta_mid.cos()),
                    ],
                },
                measure,
                diameter: T::lit(diam),
                region: Region::Zone {
                    theta_lo: T::lit(theta_top),
                    theta_hi: T::lit(theta_bot),
                    phi_lo: T::lit(phi_lo),
                    phi_hi: T::lit(phi_hi),
                },
            });
        }
        theta_top = theta_bot;
    }
    cells.push(cap(pi - theta_cap, pi, -1.0));
    Partition { manifold: *m, cells }
}
