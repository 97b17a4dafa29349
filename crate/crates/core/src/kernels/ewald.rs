//! Bessel kernel on the flat torus by Ewald splitting of the subordination
//! integral `(1+λ²)^{-s/2} = Γ(s/2)^{-1} ∫ t^{s/2-1} e^{-t(1+λ²)} dt` at a
//! time `T`: the part `t > T` is a rapidly converging lattice cosine sum, the
//! part `t < T` is a rapidly converging sum of Gaussian images.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::manifold::Point;
use crate::scalar::{pairwise_sum, Real};
use crate::special::{gamma_p, gamma_q, gauss_legendre, integrate_half_line, lower_gamma, rgamma};

const GL_ORDER: usize = 12;
/// Relative accuracy credited to the Gauss–Legendre panels.
const QUAD_REL: f64 = 1e-13;
/// Splitting time for single evaluations; both halves are cheap here.
pub(crate) const POINTWISE_SPLIT: f64 = 0.079_577_471_545_947_67; // 1/(4π)
const BATCH_SPLITS: [f64; 5] = [POINTWISE_SPLIT, 1e-2, 1e-3, 1e-4, 1e-5];

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GL_ORDER))
}

/// Composite Gauss–Legendre on `[lo, hi]`: unit panels below `fine_until`,
/// panels of width 3 above it.
fn gl_panels<T: Real>(lo: T, hi: T, fine_until: T, g: impl Fn(T) -> T) -> T {
    let (xs, ws) = gl_nodes();
    let mut acc = T::zero();
    let mut a = lo;
    while a < hi {
        let width = if a < fine_until { T::one() } else { T::lit(3.0) };
        let b = (a + width).min(hi);
        let half = (b - a) * T::lit(0.5);
        let mid = a + half;
        let mut panel = T::zero();
        for (x, w) in xs.iter().zip(ws) {
            panel = panel + T::lit(*w) * g(mid + half * T::lit(*x));
        }
        acc = acc + panel * half;
        a = b;
    }
    acc
}

/// `∫_0^split t^{a-1} e^{-t} e^{-c/t} dt` for `c > 0` (any real `a`).
pub(crate) fn near_integral<T: Real>(a: T, split: T, c: T) -> T {
    let lo = (c / T::lit(45.0)).ln();
    let hi = split.ln();
    if lo >= hi {
        return T::zero();
    }
    gl_panels(lo, hi, c.ln() + T::lit(3.0), |v| (a * v - v.exp() - c * (-v).exp()).exp())
}

/// `∫_0^split t^{a-1} e^{-t} (1 - e^{-c/t}) dt` without cancellation, `a > 0`.
pub(crate) fn near_gap_integral<T: Real>(a: T, split: T, c: T) -> T {
    if c <= T::zero() {
        return T::zero();
    }
    let t_lo = c / T::lit(45.0);
    if t_lo >= split {
        return lower_gamma(a, split) - near_integral(a, split, c);
    }
    // below t_lo the factor (1 - e^{-c/t}) is 1 to working precision
    let head = lower_gamma(a, t_lo);
    let body = gl_panels(t_lo.ln(), split.ln(), c.ln() + T::lit(3.0), |v| {
        let ex = -(-c * (-v).exp()).exp_m1();
        (a * v - v.exp()).exp() * ex
    });
    head + body
}

/// Surface measure of the unit sphere in `R^d`.
fn sphere_area<T: Real>(d: usize) -> T {
    match d {
        1 => T::lit(2.0),
        2 => T::TAU(),
        _ => T::lit(4.0) * T::PI(),
    }
}

/// Bound on `Σ_{p ∈ L, |p| > radius} g(|p|)` for a shifted unit lattice `L`
/// in `R^d` and nonincreasing `g`, by comparison with a radial integral.
fn lattice_tail<T: Real>(d: usize, radius: T, g: impl Fn(T) -> T) -> T {
    let h = T::from_usize_(d).sqrt() * T::lit(0.5);
    let lo = (radius - h).max(T::zero());
    let area = sphere_area::<T>(d);
    let dm1 = (d - 1) as i32;
    integrate_half_line(lo, |rho| area * rho.powi(dm1) * g((rho - h).max(T::zero())))
}

/// Smallest value on a geometric-then-bisected grid with `bound(x) <= target`.
fn search_radius<T: Real>(start: T, target: T, cap: T, bound: impl Fn(T) -> T) -> (T, T) {
    let mut hi = start;
    let mut bh = bound(hi);
    while bh > target {
        if hi >= cap {
            return (hi, bh);
        }
        hi = (hi * T::lit(2.0)).min(cap);
        bh = bound(hi);
    }
    let mut lo = hi * T::lit(0.5);
    if lo < start {
        return (hi, bh);
    }
    for _ in 0..12 {
        let mid = (lo + hi) * T::lit(0.5);
        let bm = bound(mid);
        if bm <= target {
            hi = mid;
            bh = bm;
        } else {
            lo = mid;
        }
    }
    (hi, bh)
}

/// Ewald plan for the kernel of order `s > d` on `T^d`.
#[derive(Debug, Clone)]
pub(crate) struct Ewald<T> {
    pub dim: usize,
    pub order: T,
    a: T,
    split: T,
    pref: T,
    lg: T,
    c0: T,
    far: Vec<([i64; 3], T)>,
    pub far_tail: T,
    radius: T,
    pub near_tail: T,
    diag_images: T,
    diag: T,
}

impl<T: Real> Ewald<T> {
    pub fn new(dim: usize, order: T, split: T, tol: T, max_terms: usize) -> Result<Self> {
        let d = T::from_usize_(dim);
        if order <= d {
            return Err(Error::InvalidInput(format!(
                "Bessel order {order} must exceed the dimension {dim}"
            )));
        }
        let half = order * T::lit(0.5);
        let a = (order - d) * T::lit(0.5);
        let four_pi_sq = T::lit(4.0) * T::PI() * T::PI();
        let pref = rgamma(half) * (T::lit(4.0) * T::PI()).powf(-d * T::lit(0.5));
        let lg = lower_gamma(a, split);
        let coeff = |rho2: T| {
            let mu = T::one() + four_pi_sq * rho2;
            mu.powf(-half) * gamma_q(half, split * mu)
        };
        let budget_tol = tol * T::lit(0.5);

        let far_bound = |k: T| lattice_tail(dim, k, |rho| coeff(rho * rho));
        let cap_k = T::from_usize_(max_terms).powf(T::one() / d) + T::one();
        let (k_cut, far_tail) = search_radius(T::one(), budget_tol, cap_k, far_bound);
        if far_tail > budget_tol {
            return Err(Error::Resource {
                what: format!("lattice sum for Bessel order {order} on T^{dim}"),
                achieved: far_tail.f64(),
            });
        }
        let kmax = k_cut.floor().to_i64().unwrap_or(0);
        let k2max = k_cut * k_cut;
        let mut far = Vec::new();
        let mut cache: Vec<Option<T>> = vec![None; (kmax * kmax) as usize * dim + 1];
        let span = |i: usize| if i < dim { -kmax..=kmax } else { 0..=0 };
        for k0 in span(0) {
            for k1 in span(1) {
                for k2 in span(2) {
                    let k = [k0, k1, k2];
                    let first = k.iter().copied().find(|&v| v != 0);
                    if first.is_none_or(|v| v < 0) {
                        continue;
                    }
                    let n2 = k0 * k0 + k1 * k1 + k2 * k2;
                    if T::from_usize_(n2 as usize) > k2max {
                        continue;
                    }
                    let c = *cache[n2 as usize].get_or_insert_with(|| coeff(T::from_usize_(n2 as usize)));
                    far.push((k, c));
                }
            }
        }
        if far.len() > max_terms {
            return Err(Error::Resource {
                what: format!("lattice sum for Bessel order {order} on T^{dim}"),
                achieved: far_tail.f64(),
            });
        }
        let four_t = T::lit(4.0) * split;
        let near_bound = |r: T| pref * lg * lattice_tail(dim, r, |rho| (-rho * rho / four_t).exp());
        let (radius, near_tail) = search_radius(split.sqrt(), budget_tol, T::lit(64.0), near_bound);
        let mut plan = Ewald {
            dim,
            order,
            a,
            split,
            pref,
            lg,
            c0: gamma_q(half, split),
            far,
            far_tail,
            radius,
            near_tail,
            diag_images: T::zero(),
            diag: T::zero(),
        };
        plan.diag_images = plan.image_sum(&[T::zero(); 3], true, |a, c| near_integral(a, split, c));
        plan.diag = plan.value(&[T::zero(); 3]);
        Ok(plan)
    }

    /// Plan for the energy of `n` points: picks the split minimizing the
    /// estimated cost of the moment sum plus the near-pair sum.
    pub fn for_batch(dim: usize, order: T, n: usize, tol: T, max_terms: usize) -> Result<Self> {
        let nf = n as f64;
        let vol = [2.0, std::f64::consts::PI, 4.0 / 3.0 * std::f64::consts::PI][dim - 1];
        let mut best = (f64::INFINITY, POINTWISE_SPLIT);
        for &t in &BATCH_SPLITS {
            let kcut = (45.0 / (4.0 * std::f64::consts::PI.powi(2) * t)).sqrt();
            let far = vol * kcut.powi(dim as i32) * 0.5;
            let r = (180.0 * t).sqrt();
            let frac = (vol * r.powi(dim as i32)).min(1.0) * if r >= 0.5 { 5f64.powi(dim as i32) } else { 1.0 };
            let cost = nf * far + nf * nf * frac * 60.0;
            if cost < best.0 && far < max_terms as f64 {
                best = (cost, t);
            }
        }
        Self::new(dim, order, T::lit(best.1), tol, max_terms)
    }

    pub fn terms(&self) -> usize {
        self.far.len()
    }

    pub fn tail(&self) -> T {
        self.far_tail + self.near_tail
    }

    pub fn diagonal(&self) -> T {
        self.diag
    }

    /// `Σ_n f(a, |δ-n|²/4)` over images inside the cutoff radius, the zero
    /// distance image handled separately.
    fn image_sum(&self, delta: &[T; 3], skip_primary: bool, f: impl Fn(T, T) -> T) -> T {
        let r = self.radius;
        let r2 = r * r;
        let quarter = T::lit(0.25);
        let mut acc = T::zero();
        let span = |i: usize| -> (i64, i64) {
            if i < self.dim {
                ((delta[i] - r).floor().to_i64().unwrap(), (delta[i] + r).ceil().to_i64().unwrap())
            } else {
                (0, 0)
            }
        };
        let (s0, s1, s2) = (span(0), span(1), span(2));
        for n0 in s0.0..=s0.1 {
            for n1 in s1.0..=s1.1 {
                for n2 in s2.0..=s2.1 {
                    let n = [n0, n1, n2];
                    if skip_primary && n == [0, 0, 0] {
                        continue;
                    }
                    let mut rho2 = T::zero();
                    for i in 0..self.dim {
                        let e = delta[i] - T::lit(n[i] as f64);
                        rho2 = rho2 + e * e;
                    }
                    if rho2 > r2 {
                        continue;
                    }
                    acc = acc + if rho2 == T::zero() { self.lg } else { f(self.a, rho2 * quarter) };
                }
            }
        }
        acc
    }

    fn far_cos(&self, delta: &[T; 3]) -> T {
        let mut acc = self.c0;
        for (k, c) in &self.far {
            acc = acc + (*c + *c) * (T::TAU() * phase(k, delta)).cos();
        }
        acc
    }

    /// Kernel value at displacement `delta` (components in `[0, 1/2]`).
    pub fn value(&self, delta: &[T; 3]) -> T {
        let split = self.split;
        let near = self.pref * self.image_sum(delta, false, |a, c| near_integral(a, split, c));
        near + self.far_cos(delta)
    }

    /// Error bound attached to [`Ewald::value`].
    pub fn value_bound(&self, value: T) -> T {
        self.tail() + T::lit(QUAD_REL) * value.abs()
    }

    /// `B(0) - B(delta)` as a sum of nonnegative-dominated pieces.
    pub fn gap(&self, delta: &[T; 3]) -> T {
        if delta.iter().all(|v| *v == T::zero()) {
            return T::zero();
        }
        let split = self.split;
        let quarter = T::lit(0.25);
        let mut rho2 = T::zero();
        for v in delta.iter().take(self.dim) {
            rho2 = rho2 + *v * *v;
        }
        let primary = near_gap_integral(self.a, split, rho2 * quarter);
        let others = self.diag_images - self.image_sum(delta, true, |a, c| near_integral(a, split, c));
        let mut far = T::zero();
        for (k, c) in &self.far {
            let s = (T::PI() * phase(k, delta)).sin();
            far = far + T::lit(4.0) * *c * s * s;
        }
        self.pref * (primary + others) + far
    }

    /// Gradient of `B` with respect to the displacement.
    pub fn gradient(&self, delta: &[T; 3]) -> [T; 3] {
        let mut g = [T::zero(); 3];
        let r2 = self.radius * self.radius;
        let span = |i: usize| -> (i64, i64) {
            if i < self.dim {
                (
                    (delta[i] - self.radius).floor().to_i64().unwrap(),
                    (delta[i] + self.radius).ceil().to_i64().unwrap(),
                )
            } else {
                (0, 0)
            }
        };
        let (s0, s1, s2) = (span(0), span(1), span(2));
        let am1 = self.a - T::one();
        for n0 in s0.0..=s0.1 {
            for n1 in s1.0..=s1.1 {
                for n2 in s2.0..=s2.1 {
                    let n = [n0, n1, n2];
                    let mut e = [T::zero(); 3];
                    let mut rho2 = T::zero();
                    for i in 0..self.dim {
                        e[i] = delta[i] - T::lit(n[i] as f64);
                        rho2 = rho2 + e[i] * e[i];
                    }
                    if rho2 == T::zero() || rho2 > r2 {
                        continue;
                    }
                    let w = self.pref * near_integral(am1, self.split, rho2 * T::lit(0.25)) * T::lit(0.5);
                    for i in 0..self.dim {
                        g[i] = g[i] - e[i] * w;
                    }
                }
            }
        }
        for (k, c) in &self.far {
            let s = (T::TAU() * phase(k, delta)).sin();
            let w = (*c + *c) * T::TAU() * s;
            for i in 0..self.dim {
                g[i] = g[i] - w * T::lit(k[i] as f64);
            }
        }
        g
    }

    /// `Σ_i Σ_j ω_i ω_j B(z_i - z_j) - 1` with its error bound.
    pub fn energy(&self, nodes: &[Point<T>], weights: &[T]) -> (T, T) {
        let d = self.dim;
        let kmax = self.far.iter().map(|(k, _)| k.iter().map(|v| v.abs()).max().unwrap()).max().unwrap_or(0);
        // per-node, per-axis tables of e^{2πi k z}
        let width = (kmax + 1) as usize;
        let tables: Vec<Vec<(T, T)>> = nodes
            .par_iter()
            .map(|p| {
                let mut t = Vec::with_capacity(d * width);
                for i in 0..d {
                    for k in 0..width {
                        let ph = wrap(T::from_usize_(k) * p.c[i]);
                        let (s, c) = (T::TAU() * ph).sin_cos();
                        t.push((c, s));
                    }
                }
                t
            })
            .collect();
        let far_terms: Vec<T> = self
            .far
            .par_iter()
            .map(|(k, c)| {
                let (mut re, mut im) = (T::zero(), T::zero());
                for (tab, w) in tables.iter().zip(weights) {
                    let (mut pr, mut pi) = (T::one(), T::zero());
                    for i in 0..d {
                        let (cr, mut ci) = tab[i * width + k[i].unsigned_abs() as usize];
                        if k[i] < 0 {
                            ci = -ci;
                        }
                        let nr = pr * cr - pi * ci;
                        pi = pr * ci + pi * cr;
                        pr = nr;
                    }
                    re = re + *w * pr;
                    im = im + *w * pi;
                }
                (*c + *c) * (re * re + im * im)
            })
            .collect();
        let far = pairwise_sum(&far_terms);

        let n = nodes.len();
        let r2 = self.radius * self.radius;
        let single_image = self.radius < T::lit(0.5);
        let rows: Vec<T> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = weights[i] * weights[i] * self.near_diag();
                for j in (i + 1)..n {
                    let delta = abs_delta(d, &nodes[i], &nodes[j]);
                    let rho2: T = delta.iter().take(d).map(|v| *v * *v).sum();
                    if single_image && rho2 > r2 {
                        continue;
                    }
                    let split = self.split;
                    let near = self.pref * self.image_sum(&delta, false, |a, c| near_integral(a, split, c));
                    row = row + T::lit(2.0) * weights[i] * weights[j] * near;
                }
                row
            })
            .collect();
        let near = pairwise_sum(&rows);
        let p0 = gamma_p(self.order * T::lit(0.5), self.split);
        let value = (near - p0) + far;
        let bound = self.tail() + T::lit(QUAD_REL) * (near + far + p0);
        (value, bound)
    }

    fn near_diag(&self) -> T {
        self.pref * (self.lg + self.diag_images)
    }
}

fn phase<T: Real>(k: &[i64; 3], delta: &[T; 3]) -> T {
    let mut p = T::zero();
    for i in 0..3 {
        if k[i] != 0 {
            p = p + wrap(T::lit(k[i] as f64) * delta[i]);
        }
    }
    wrap(p)
}

fn wrap<T: Real>(x: T) -> T {
    x - x.round()
}

/// Per-axis absolute minimal-image displacement; the kernel is even in each
/// coordinate, so this makes evaluation exactly symmetric in its arguments.
pub(crate) fn abs_delta<T: Real>(dim: usize, x: &Point<T>, y: &Point<T>) -> [T; 3] {
    let mut d = [T::zero(); 3];
    for i in 0..dim {
        let v = (x.c[i] - y.c[i]).abs();
        d[i] = if v > T::lit(0.5) { T::one() - v } else { v };
    }
    d
}

/// Signs of the minimal-image displacement `x - y` per axis.
pub(crate) fn delta_signs<T: Real>(dim: usize, x: &Point<T>, y: &Point<T>) -> [T; 3] {
    let mut s = [T::zero(); 3];
    for i in 0..dim {
        let v = x.c[i] - y.c[i];
        let w = v - v.round();
        s[i] = if w > T::zero() {
            T::one()
        } else if w < T::zero() {
            -T::one()
        } else {
            T::zero()
        };
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_integral_matches_reference_values() {
        // references from 30-digit adaptive quadrature
        let cases = [
            (0.5, POINTWISE_SPLIT, 0.01, 0.268_098_049_966_473_1),
            (0.3, 1e-4, 2e-4, 0.002_834_058_425_918_735),
            (1.5, 1e-3, 1e-9, 2.106_914_332_374_095e-5),
            (-0.3, 1e-2, 3e-3, 4.644_454_439_070_089),
        ];
        for (a, split, c, want) in cases {
            let got = near_integral(a, split, c);
            assert!((got - want).abs() <= 1e-13 * want, "{a} {split} {c}: {got} {want}");
        }
    }

    #[test]
    fn gap_integral_is_complement() {
        for &(a, split, c) in &[(0.5, POINTWISE_SPLIT, 0.01), (0.25, 1e-3, 1e-6), (0.75, 1e-2, 0.5)] {
            let lhs = near_gap_integral(a, split, c) + near_integral(a, split, c);
            let rhs = lower_gamma(a, split);
            assert!((lhs - rhs).abs() < 1e-13 * rhs, "{lhs} {rhs}");
        }
    }

    #[test]
    fn coth_identity_and_split_independence() {
        let want = 0.5 / 0.5f64.tanh();
        for split in BATCH_SPLITS {
            let e = Ewald::<f64>::new(1, 2.0, split, 1e-13, 1 << 22).unwrap();
            assert!((e.diagonal() - want).abs() < 1e-12, "split {split}: {}", e.diagonal());
        }
        let e1 = Ewald::<f64>::new(2, 3.0, POINTWISE_SPLIT, 1e-13, 1 << 22).unwrap();
        let e2 = Ewald::<f64>::new(2, 3.0, 1e-3, 1e-13, 1 << 22).unwrap();
        let d = [0.13, 0.41, 0.0];
        assert!((e1.value(&d) - e2.value(&d)).abs() < 1e-12);
        assert!((e1.gap(&d) - (e1.diagonal() - e1.value(&d))).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let e = Ewald::<f64>::new(2, 2.6, POINTWISE_SPLIT, 1e-13, 1 << 22).unwrap();
        let d = [0.21, 0.07, 0.0];
        let g = e.gradient(&d);
        for i in 0..2 {
            let h = 1e-6;
            let (mut p, mut m) = (d, d);
            p[i] += h;
            m[i] -= h;
            let fd = (e.value(&p) - e.value(&m)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "axis {i}: {fd} vs {}", g[i]);
        }
    }

    #[test]
    fn resource_error_when_budget_is_tiny() {
        let err = Ewald::<f64>::new(2, 2.1, 1e-5, 1e-14, 10).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }
}
