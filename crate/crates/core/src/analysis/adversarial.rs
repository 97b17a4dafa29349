//! Lower bound for the worst-case error on the torus: a sum of bumps that
//! vanishes at every node but integrates to one.

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::wce::check_alpha;
use crate::error::{invalid, Error, Result};
use crate::manifold::{rng_for, torus_delta, Point};
use crate::pointsets::PointSet;
use crate::scalar::{pairwise_sum, Real};
use crate::special::{bump, gauss_legendre};

/// Ball radius in units of `N^{-1/d}`.
pub const ADVERSARIAL_EPS: f64 = 0.25;
/// Relative change between two grid doublings accepted as converged.
pub const ADVERSARIAL_GRID_TOL: f64 = 1e-7;
/// Largest FFT grid (total points).
pub const MAX_FFT_POINTS: usize = 1 << 24;

const SHIFT_ATTEMPTS: usize = 8;
const TAG_SHIFT: u64 = 0x7368_6966;

/// Output of [`adversarial_bound`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialReport<T> {
    pub alpha: T,
    pub n: usize,
    /// Half-width of each bump.
    pub radius: T,
    /// Candidate cubes and the bumps kept (exactly `n`).
    pub candidates: usize,
    pub bumps: usize,
    /// `Σ ω_j f(z_j)`, zero because every bump avoids the nodes.
    pub node_sum: T,
    /// `∫ f`, one by construction.
    pub integral: T,
    /// `|Σ ω_j f(z_j) - ∫ f|`.
    pub error: T,
    pub sobolev_norm: T,
    /// `error / sobolev_norm`, a lower bound for the worst-case error.
    pub ratio: T,
    /// FFT points per axis of the accepted grid.
    pub grid: usize,
    /// Relative change of the norm from the previous grid.
    pub grid_delta: T,
    pub shift_attempts: usize,
}

/// `f = Σ_j ψ_j` with `ψ_j(x) = Π_i b((x_i - c_ji)/ρ) / (N (ρ I_b)^d)`, where
/// `b` is the standard bump and `I_b = ∫ b`. The centers are `N` of the `2N`
/// or more cells of a shifted lattice whose open cubes of half-width `ρ`
/// contain no node. The `W^{α,2}` norm comes from FFT coefficients on a grid
/// doubled until it settles.
pub fn adversarial_bound<T: Real>(ps: &PointSet<T>, alpha: T, seed: u64) -> Result<AdversarialReport<T>> {
    ps.check()?;
    let m = ps.manifold;
    if !m.is_torus() {
        return invalid("the adversarial construction is implemented on the torus only");
    }
    check_alpha(&m, alpha)?;
    let d = m.dim;
    let n = ps.len();
    let side = ((2 * n) as f64).powf(1.0 / d as f64).ceil() as usize;
    let side = (side.saturating_sub(1)..=side + 1).find(|s| s.pow(d as u32) >= 2 * n).unwrap_or(side);
    let h = T::one() / T::from_usize_(side);
    let radius = (T::lit(ADVERSARIAL_EPS) * T::from_usize_(n).powf(-T::from_usize_(d).recip())).min(h * T::lit(0.5));

    let mut rng = rng_for(seed, TAG_SHIFT);
    let mut shift = [T::lit(0.5); 3];
    let mut centers = Vec::new();
    let mut attempts = 0;
    while attempts < SHIFT_ATTEMPTS {
        attempts += 1;
        centers = empty_cells(ps, side, &shift, radius, n);
        if centers.len() == n {
            break;
        }
        for s in shift.iter_mut().take(d) {
            *s = T::lit(rng.gen::<f64>());
        }
    }
    if centers.len() < n {
        return Err(Error::Resource {
            what: format!(
                "only {} of {n} empty cubes of half-width {radius} after {attempts} lattice shifts",
                centers.len()
            ),
            achieved: centers.len() as f64,
        });
    }

    let ib = T::lit(bump_integral());
    let height = (T::from_usize_(n) * (radius * ib).powi(d as i32)).recip();
    let eval = |x: &Point<T>| -> T {
        let terms: Vec<T> = centers
            .iter()
            .map(|c| {
                let delta = torus_delta(d, x, c);
                (0..d).map(|i| bump(delta[i] / radius)).fold(T::one(), |a, b| a * b)
            })
            .collect();
        height * pairwise_sum(&terms)
    };
    let vals: Vec<T> = ps.nodes.iter().zip(&ps.weights).map(|(z, &w)| w * eval(z)).collect();
    let node_sum = pairwise_sum(&vals);
    let integral = T::one();
    let error = (node_sum - integral).abs();

    // about 40 samples across each bump to start
    let mut grid = (T::lit(20.0) / radius).to_usize().unwrap_or(16).next_power_of_two().max(16);
    let mut prev = sobolev_norm_fft(&centers, d, radius, height, alpha, grid)?;
    loop {
        let next = grid * 2;
        if next.checked_pow(d as u32).is_none_or(|t| t > MAX_FFT_POINTS) {
            return Err(Error::Resource {
                what: format!("FFT grid {next}^{d} for the bump norm"),
                achieved: prev.f64(),
            });
        }
        let v = sobolev_norm_fft(&centers, d, radius, height, alpha, next)?;
        let delta = (v - prev).abs() / v;
        grid = next;
        if delta <= T::lit(ADVERSARIAL_GRID_TOL) {
            return Ok(AdversarialReport {
                alpha,
                n,
                radius,
                candidates: side.pow(d as u32),
                bumps: centers.len(),
                node_sum,
                integral,
                error,
                sobolev_norm: v,
                ratio: error / v,
                grid,
                grid_delta: delta,
                shift_attempts: attempts,
            });
        }
        prev = v;
    }
}

/// Centers of the first `want` lattice cells (row-major) whose open cube of
/// half-width `radius` holds no node.
fn empty_cells<T: Real>(ps: &PointSet<T>, side: usize, shift: &[T; 3], radius: T, want: usize) -> Vec<Point<T>> {
    let d = ps.manifold.dim;
    let total = side.pow(d as u32);
    let mut occupied = vec![false; total];
    let sf = T::from_usize_(side);
    for z in &ps.nodes {
        // the cubes are disjoint, so a node can sit in at most one of them
        let mut idx = 0;
        let mut inside = true;
        for i in 0..d {
            let u = z.c[i] * sf - shift[i];
            let k = u.round();
            if ((u - k) / sf).abs() >= radius {
                inside = false;
            }
            let k = k.to_i64().unwrap_or(0).rem_euclid(side as i64) as usize;
            idx = idx * side + k;
        }
        if inside {
            occupied[idx] = true;
        }
    }
    (0..total)
        .filter(|&i| !occupied[i])
        .take(want)
        .map(|mut i| {
            let mut c = [T::zero(); 3];
            for a in (0..d).rev() {
                let k = T::from_usize_(i % side);
                c[a] = ((k + shift[a]) / sf).fract();
                i /= side;
            }
            Point { c }
        })
        .collect()
}

/// `∫_{-1}^{1} b(u) du` by composite Gauss–Legendre.
fn bump_integral() -> f64 {
    let (xs, ws) = gauss_legendre(20);
    let panels = 64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = -1.0 + 2.0 * p as f64 / panels as f64;
        let half = 1.0 / panels as f64;
        for (x, w) in xs.iter().zip(&ws) {
            acc += w * half * bump(a + half + half * x);
        }
    }
    acc
}

fn sobolev_norm_fft<T: Real>(centers: &[Point<T>], d: usize, radius: T, height: T, alpha: T, grid: usize) -> Result<T> {
    let total = grid.pow(d as u32);
    let mut data = vec![Complex::new(T::zero(), T::zero()); total];
    let g = T::from_usize_(grid);
    let reach = (radius * g).ceil().to_i64().unwrap_or(0) + 1;
    let strides: Vec<usize> = (0..d).map(|i| grid.pow((d - 1 - i) as u32)).collect();
    for c in centers {
        // per-axis bump samples around the center
        let axes: Vec<Vec<(usize, T)>> = (0..d)
            .map(|i| {
                let base = (c.c[i] * g).floor().to_i64().unwrap_or(0);
                (base - reach..=base + reach + 1)
                    .filter_map(|k| {
                        let x = T::lit(k as f64) / g;
                        let v = bump((x - c.c[i]) / radius);
                        (v > T::zero()).then(|| (k.rem_euclid(grid as i64) as usize, v))
                    })
                    .collect()
            })
            .collect();
        let mut stack = vec![(0usize, 0usize, height)];
        while let Some((axis, idx, v)) = stack.pop() {
            if axis == d {
                data[idx].re = data[idx].re + v;
                continue;
            }
            for &(k, b) in &axes[axis] {
                stack.push((axis + 1, idx + k * strides[axis], v * b));
            }
        }
    }
    fft_nd(&mut data, grid, d);
    let scale = T::from_usize_(total).recip();
    let four_pi2 = T::lit(4.0) * T::PI() * T::PI();
    let half = grid / 2;
    let terms: Vec<T> = data
        .iter()
        .enumerate()
        .map(|(mut i, c)| {
            let mut k2 = 0i64;
            for _ in 0..d {
                let k = (i % grid) as i64;
                let k = if k as usize >= half { k - grid as i64 } else { k };
                k2 += k * k;
                i /= grid;
            }
            let w = (T::one() + four_pi2 * T::lit(k2 as f64)).powf(alpha);
            w * c.norm_sqr() * scale * scale
        })
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// In-place forward FFT along every axis of a row-major `grid^d` array.
fn fft_nd<T: Real>(data: &mut [Complex<T>], grid: usize, d: usize) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(grid);
    let total = data.len();
    let mut line = vec![Complex::new(T::zero(), T::zero()); grid];
    for axis in 0..d {
        let stride = grid.pow((d - 1 - axis) as u32);
        for start in 0..total {
            // first element of each line along this axis
            if (start / stride) % grid != 0 {
                continue;
            }
            for k in 0..grid {
                line[k] = data[start + k * stride];
            }
            fft.process(&mut line);
            for k in 0..grid {
                data[start + k * stride] = line[k];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::ManifoldSpec;
    use crate::pointsets::{generate, Family};

    #[test]
    fn bump_integral_matches_the_known_constant() {
        assert!((bump_integral() - 1.206_900_322_437_876).abs() < 1e-10, "{}", bump_integral());
    }

    #[test]
    fn the_error_is_exactly_one() {
        let t1 = ManifoldSpec::torus(1).unwrap();
        for (fam, seed) in [(Family::Random { n: 16 }, 1), (Family::Lattice { n: 16 }, 0), (Family::Jittered { n: 32 }, 3)] {
            let ps: PointSet<f64> = generate(&t1, &fam, seed).unwrap();
            let r = adversarial_bound(&ps, 1.5, 0).unwrap();
            assert_eq!(r.error, 1.0);
            assert_eq!(r.node_sum, 0.0);
            assert_eq!(r.bumps, ps.len());
            assert!(r.grid_delta <= ADVERSARIAL_GRID_TOL);
        }
        let t2 = ManifoldSpec::torus(2).unwrap();
        let ps: PointSet<f64> = generate(&t2, &Family::Random { n: 9 }, 2).unwrap();
        let r = adversarial_bound(&ps, 1.2, 0).unwrap();
        assert_eq!(r.error, 1.0);
        assert!(r.ratio > 0.0 && r.ratio < 1.0);
    }

    #[test]
    fn one_bump_norm_against_direct_coefficients() {
        // a single bump on T^1: its coefficients are ∫ψ e^{-2πikx}, done here
        // by brute-force quadrature
        let t1 = ManifoldSpec::torus(1).unwrap();
        let ps: PointSet<f64> = generate(&t1, &Family::Lattice { n: 1 }, 0).unwrap();
        let r = adversarial_bound(&ps, 1.0, 0).unwrap();
        let rho = r.radius;
        let c = 0.0;
        let ib = bump_integral();
        let (xs, ws) = gauss_legendre(20);
        let panels = 256;
        let mut norm2 = 1.0;
        for k in 1..1500 {
            let mut re = 0.0;
            for p in 0..panels {
                let half = 1.0 / panels as f64;
                let mid = -1.0 + (2 * p + 1) as f64 * half;
                for (x, w) in xs.iter().zip(&ws) {
                    let u = mid + half * x;
                    re += w * half * rho * bump(u) * (std::f64::consts::TAU * k as f64 * (c + rho * u)).cos();
                }
            }
            let coef = re / (rho * ib);
            norm2 += 2.0 * (1.0 + 4.0 * std::f64::consts::PI.powi(2) * (k * k) as f64) * coef * coef;
        }
        assert!((norm2.sqrt() - r.sobolev_norm).abs() < 1e-6 * r.sobolev_norm, "{} {}", norm2.sqrt(), r.sobolev_norm);
    }

    #[test]
    fn rejects_the_sphere_and_small_alpha() {
        let s2: PointSet<f64> = generate(&ManifoldSpec::sphere(), &Family::Random { n: 4 }, 0).unwrap();
        assert!(adversarial_bound(&s2, 1.5, 0).is_err());
        let t1: PointSet<f64> = generate(&ManifoldSpec::torus(1).unwrap(), &Family::Random { n: 4 }, 0).unwrap();
        assert!(adversarial_bound(&t1, 0.5, 0).is_err());
    }
}
