//! Certified evaluation of the Bessel kernel `B^α`, the heat kernel
//! `W(t, x, y)` and the Littlewood–Paley pieces `P^α(r, x, y)` on the
//! supported manifolds.
//!
//! Every evaluation reports an absolute error bound next to its value.

pub(crate) mod ewald;
pub(crate) mod zonal;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::manifold::{sphere_cos_pair, torus_delta, ManifoldKind, ManifoldSpec, Point};
use crate::scalar::{pairwise_sum, Real};
use crate::special::{gauss_legendre, legendre_all, lp_cutoff, rgamma};

use ewald::{abs_delta, delta_signs, Ewald, POINTWISE_SPLIT};
use zonal::Zonal;

/// Default term budget for kernel series.
pub const DEFAULT_MAX_TERMS: usize = 1 << 22;
/// Below this time the torus heat kernel is summed over Gaussian images.
pub const HEAT_SWITCH: f64 = POINTWISE_SPLIT;
/// Sphere heat evaluations below this time are refused.
pub const SPHERE_HEAT_FLOOR: f64 = 1e-7;
/// Default degree cap for the sphere heat series.
pub const SPHERE_HEAT_DEGREE_CAP: usize = 600;

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum KernelKind<T> {
    Bessel { order: T },
    Heat { time: T },
    LpPiece { order: T, scale: T },
}

/// A kernel together with its truncation policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelJob<T> {
    pub kind: KernelKind<T>,
    /// Absolute truncation error budget.
    pub tolerance: T,
    pub max_terms: usize,
}

impl<T: Real> KernelJob<T> {
    pub fn new(kind: KernelKind<T>, tolerance: T) -> Result<Self> {
        if !(tolerance > T::zero()) {
            return invalid(format!("tolerance must be positive, got {tolerance}"));
        }
        Ok(Self { kind, tolerance, max_terms: DEFAULT_MAX_TERMS })
    }

    pub fn with_max_terms(mut self, max_terms: usize) -> Self {
        self.max_terms = max_terms;
        self
    }

    /// Evaluates the kernel at one pair of points.
    pub fn eval(&self, m: &ManifoldSpec, x: &Point<T>, y: &Point<T>) -> Result<KernelValue<T>> {
        m.check_point(x)?;
        m.check_point(y)?;
        match self.kind {
            KernelKind::Bessel { order } => {
                check_bessel_order(m, order)?;
                BesselKernel::new(m, order, self.tolerance, self.max_terms)?.eval(x, y)
            }
            KernelKind::Heat { time } => heat_value(m, time, x, y, self.tolerance, self.max_terms),
            KernelKind::LpPiece { order, scale } => lp_value(m, order, scale, x, y, self.max_terms),
        }
    }
}

/// A kernel value with its certified absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelValue<T> {
    pub value: T,
    pub tail_bound: T,
    /// Series terms kept (lattice vectors or degrees).
    pub terms: usize,
}

fn check_bessel_order<T: Real>(m: &ManifoldSpec, order: T) -> Result<()> {
    if !(order > T::from_usize_(m.dim)) {
        return invalid(format!(
            "Bessel order {order} must exceed d = {} for pointwise evaluation",
            m.dim
        ));
    }
    Ok(())
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    Ok(())
}

/// `B^α(x, y)` within `tol`; requires `α > d`.
pub fn bessel_eval<T: Real>(m: &ManifoldSpec, alpha: T, x: &Point<T>, y: &Point<T>, tol: T) -> Result<T> {
    KernelJob::new(KernelKind::Bessel { order: alpha }, tol)?.eval(m, x, y).map(|v| v.value)
}

/// `W(t, x, y)` within `tol`.
pub fn heat_eval<T: Real>(m: &ManifoldSpec, t: T, x: &Point<T>, y: &Point<T>, tol: T) -> Result<T> {
    KernelJob::new(KernelKind::Heat { time: t }, tol)?.eval(m, x, y).map(|v| v.value)
}

/// `P^α(r, x, y)`, an exact finite sum.
pub fn lp_piece_eval<T: Real>(m: &ManifoldSpec, alpha: T, r: T, x: &Point<T>, y: &Point<T>) -> Result<T> {
    m.check_point(x)?;
    m.check_point(y)?;
    lp_value(m, alpha, r, x, y, DEFAULT_MAX_TERMS).map(|v| v.value)
}

/// `B^α(x, x) - B^α(x, y)` for `d < α < d + 2`, evaluated without
/// subtracting two large kernel values.
pub fn bessel_gap<T: Real>(m: &ManifoldSpec, alpha: T, x: &Point<T>, y: &Point<T>, tol: T) -> Result<T> {
    let d = T::from_usize_(m.dim);
    if !(alpha > d && alpha < d + T::lit(2.0)) {
        return invalid(format!("gap order {alpha} must lie in (d, d+2) = ({d}, {})", d + T::lit(2.0)));
    }
    m.check_point(x)?;
    m.check_point(y)?;
    check_tol(tol)?;
    Ok(BesselKernel::new(m, alpha, tol, DEFAULT_MAX_TERMS)?.gap(x, y).value)
}

#[derive(Debug, Clone)]
enum Plan<T> {
    Torus(Ewald<T>),
    Sphere(Zonal<T>),
}

/// A reusable evaluation plan for `B^s` on one manifold.
///
/// On the torus the order must exceed `d`; on the sphere any positive order
/// is accepted off the diagonal, and the diagonal is infinite for `s ≤ 2`.
#[derive(Debug, Clone)]
pub struct BesselKernel<T> {
    manifold: ManifoldSpec,
    order: T,
    plan: Plan<T>,
}

impl<T: Real> BesselKernel<T> {
    pub fn new(m: &ManifoldSpec, order: T, tol: T, max_terms: usize) -> Result<Self> {
        check_tol(tol)?;
        let plan = match m.kind {
            ManifoldKind::Torus => Plan::Torus(Ewald::new(m.dim, order, T::lit(POINTWISE_SPLIT), tol, max_terms)?),
            ManifoldKind::Sphere => Plan::Sphere(Zonal::new(order, tol, max_terms)?),
        };
        Ok(Self { manifold: *m, order, plan })
    }

    /// Plan tuned for the energy of `n` points.
    pub fn for_batch(m: &ManifoldSpec, order: T, n: usize, tol: T, max_terms: usize) -> Result<Self> {
        check_tol(tol)?;
        let plan = match m.kind {
            ManifoldKind::Torus => Plan::Torus(Ewald::for_batch(m.dim, order, n, tol, max_terms)?),
            ManifoldKind::Sphere => Plan::Sphere(Zonal::new(order, tol, max_terms)?),
        };
        Ok(Self { manifold: *m, order, plan })
    }

    pub fn order(&self) -> T {
        self.order
    }

    pub fn manifold(&self) -> &ManifoldSpec {
        &self.manifold
    }

    pub fn terms(&self) -> usize {
        match &self.plan {
            Plan::Torus(e) => e.terms(),
            Plan::Sphere(z) => z.terms(),
        }
    }

    /// `B(x, x)`, the same for every `x`.
    pub fn diagonal(&self) -> T {
        match &self.plan {
            Plan::Torus(e) => e.diagonal(),
            Plan::Sphere(z) => z.diagonal(),
        }
    }

    pub fn eval(&self, x: &Point<T>, y: &Point<T>) -> Result<KernelValue<T>> {
        let v = self.eval_unchecked(x, y);
        if !v.value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Bessel kernel of order {} is infinite on the diagonal",
                self.order
            )));
        }
        Ok(v)
    }

    pub(crate) fn eval_unchecked(&self, x: &Point<T>, y: &Point<T>) -> KernelValue<T> {
        let terms = self.terms();
        match &self.plan {
            Plan::Torus(e) => {
                let v = e.value(&abs_delta(self.manifold.dim, x, y));
                KernelValue { value: v, tail_bound: e.value_bound(v), terms }
            }
            Plan::Sphere(z) => {
                let (t, omt) = sphere_cos_pair(x, y);
                let (value, tail_bound) = z.value(t, omt);
                KernelValue { value, tail_bound, terms }
            }
        }
    }

    /// Radial profile on the sphere: `B` at geodesic distance `theta`.
    pub fn profile(&self, theta: T) -> Result<KernelValue<T>> {
        match &self.plan {
            Plan::Sphere(z) => {
                let h = (theta * T::lit(0.5)).sin();
                let omt = h * h * T::lit(2.0);
                let (value, tail_bound) = z.value(T::one() - omt, omt);
                Ok(KernelValue { value, tail_bound, terms: z.terms() })
            }
            Plan::Torus(_) => invalid("the torus kernel is not radial; use eval"),
        }
    }

    /// `B(x, x) - B(x, y)`.
    pub fn gap(&self, x: &Point<T>, y: &Point<T>) -> KernelValue<T> {
        let terms = self.terms();
        match &self.plan {
            Plan::Torus(e) => {
                let g = e.gap(&abs_delta(self.manifold.dim, x, y));
                KernelValue { value: g, tail_bound: e.value_bound(e.diagonal()) * T::lit(2.0), terms }
            }
            Plan::Sphere(z) => {
                let (t, omt) = sphere_cos_pair(x, y);
                let (value, tail_bound) = z.gap(t, omt);
                KernelValue { value, tail_bound, terms }
            }
        }
    }

    /// Gradient of `B(x, y)` in `x`: a coordinate vector on the torus, a
    /// tangent vector at `x` on the sphere.
    pub fn gradient(&self, x: &Point<T>, y: &Point<T>) -> [T; 3] {
        let dim = self.manifold.dim;
        match &self.plan {
            Plan::Torus(e) => {
                let g = e.gradient(&abs_delta(dim, x, y));
                let s = delta_signs(dim, x, y);
                [g[0] * s[0], g[1] * s[1], g[2] * s[2]]
            }
            Plan::Sphere(z) => {
                let (t, omt) = sphere_cos_pair(x, y);
                if omt <= T::zero() {
                    return [T::zero(); 3];
                }
                let (b1, _) = z.slope(t, omt);
                let mut g = [T::zero(); 3];
                for i in 0..3 {
                    g[i] = b1 * (y.c[i] - t * x.c[i]);
                }
                g
            }
        }
    }

    /// `Σ_i Σ_j ω_i ω_j B(z_i, z_j) - 1` and its error bound. The sum order
    /// is fixed, so the result does not depend on the thread count.
    pub fn energy(&self, nodes: &[Point<T>], weights: &[T]) -> Result<(T, T)> {
        if nodes.len() != weights.len() {
            return invalid("nodes and weights differ in length");
        }
        match &self.plan {
            Plan::Torus(e) => Ok(e.energy(nodes, weights)),
            Plan::Sphere(z) => {
                if !z.diagonal().is_finite() {
                    return invalid(format!("energy needs a Bessel order above 2, got {}", self.order));
                }
                let n = nodes.len();
                let rows: Vec<(T, T)> = (0..n)
                    .into_par_iter()
                    .map(|i| {
                        let (mut v, mut b) = (weights[i] * weights[i] * z.diagonal(), T::zero());
                        for j in (i + 1)..n {
                            let (t, omt) = sphere_cos_pair(&nodes[i], &nodes[j]);
                            let (kv, kb) = z.value(t, omt);
                            let w = T::lit(2.0) * weights[i] * weights[j];
                            v = v + w * kv;
                            b = b + w * kb;
                        }
                        (v, b)
                    })
                    .collect();
                let vals: Vec<T> = rows.iter().map(|r| r.0).collect();
                let bounds: Vec<T> = rows.iter().map(|r| r.1).collect();
                let total = pairwise_sum(&vals);
                let bound = pairwise_sum(&bounds) + z.diagonal() * T::lit(1e-15) * T::from_usize_(n.max(1));
                Ok((total - T::one(), bound))
            }
        }
    }
}

/// Per-axis periodized heat kernel on `T^1` at `|δ| ≤ 1/2` with a bound on
/// the neglected terms.
fn heat_axis<T: Real>(t: T, delta: T, tol: T, max_terms: usize) -> Result<(T, T, usize)> {
    let delta = delta.abs();
    if t <= T::lit(HEAT_SWITCH) {
        let pref = (T::lit(4.0) * T::PI() * t).sqrt().recip();
        let four_t = T::lit(4.0) * t;
        let mut acc = (-(delta * delta) / four_t).exp();
        let mut k = 0usize;
        loop {
            // images beyond |n| = k sit at distance ≥ k + 1/2
            let far = T::from_usize_(k) + T::lit(0.5);
            let head = (-(far * far) / four_t).exp();
            let ratio = (-far / (t + t)).exp();
            let tail = T::lit(2.0) * pref * head / (T::one() - ratio);
            if tail <= tol || k >= max_terms {
                if tail > tol {
                    return Err(Error::Resource { what: "heat image sum".into(), achieved: tail.f64() });
                }
                return Ok((pref * acc, tail, 2 * k + 1));
            }
            k += 1;
            let kf = T::from_usize_(k);
            let (a, b) = (delta - kf, delta + kf);
            acc = acc + (-(a * a) / four_t).exp() + (-(b * b) / four_t).exp();
        }
    } else {
        let c = T::lit(4.0) * T::PI() * T::PI() * t;
        let mut acc = T::one();
        let mut k = 0usize;
        loop {
            let k1 = T::from_usize_(k + 1);
            let head = (-c * k1 * k1).exp();
            let ratio = (-c * (k1 + k1 + T::one())).exp();
            let tail = T::lit(2.0) * head / (T::one() - ratio);
            if tail <= tol || k >= max_terms {
                if tail > tol {
                    return Err(Error::Resource { what: "heat spectral sum".into(), achieved: tail.f64() });
                }
                return Ok((acc, tail, k + 1));
            }
            k += 1;
            let kf = T::from_usize_(k);
            acc = acc + T::lit(2.0) * (-c * kf * kf).exp() * (T::TAU() * kf * delta).cos();
        }
    }
}

/// Degree `L` with `Σ_{n>L} (2n+1) e^{-n(n+1)t} ≤ tol`, and that bound.
pub(crate) fn sphere_heat_degree<T: Real>(t: T, tol: T, cap: usize) -> (usize, T) {
    // the terms decrease once (2n+1)² t > 2, after which the tail is at
    // most ∫_L^∞ (2n+1) e^{-n(n+1)t} dn = e^{-L(L+1)t} / t
    let start = ((T::lit(2.0) / t).sqrt() * T::lit(0.5)).ceil().to_usize().unwrap_or(0);
    let bound = |l: usize| {
        let lf = T::from_usize_(l);
        (-lf * (lf + T::one()) * t).exp() / t
    };
    let mut l = start;
    while bound(l) > tol && l < cap {
        l += 1;
    }
    (l, bound(l))
}

fn heat_value<T: Real>(
    m: &ManifoldSpec,
    t: T,
    x: &Point<T>,
    y: &Point<T>,
    tol: T,
    max_terms: usize,
) -> Result<KernelValue<T>> {
    if !(t > T::zero()) {
        return invalid(format!("heat time must be positive, got {t}"));
    }
    match m.kind {
        ManifoldKind::Torus => {
            let delta = torus_delta(m.dim, x, y);
            let axis_tol = tol * T::lit(1e-3) / T::from_usize_(m.dim);
            let mut lo = T::one();
            let mut hi = T::one();
            let mut terms = 1;
            for d in delta.iter().take(m.dim) {
                let (v, e, k) = heat_axis(t, *d, axis_tol, max_terms)?;
                lo = lo * v;
                hi = hi * (v + e);
                terms *= k;
            }
            let bound = hi - lo;
            if bound > tol {
                return Err(Error::Resource { what: "heat kernel product".into(), achieved: bound.f64() });
            }
            Ok(KernelValue { value: lo, tail_bound: bound, terms })
        }
        ManifoldKind::Sphere => {
            if t < T::lit(SPHERE_HEAT_FLOOR) {
                return Err(Error::Resource {
                    what: format!("sphere heat kernel below the time floor {SPHERE_HEAT_FLOOR} (t = {t})"),
                    achieved: f64::INFINITY,
                });
            }
            let (c, omt) = sphere_cos_pair(x, y);
            if t <= T::lit(HEAT_SWITCH) {
                let h = (omt * T::lit(0.5)).sqrt().min(T::one());
                let theta = T::lit(2.0) * h.asin();
                let (value, images) = sphere_heat_small_time(t, theta);
                if images > tol {
                    return Err(Error::Resource { what: "sphere heat image integral".into(), achieved: images.f64() });
                }
                let tail_bound = images + T::lit(1e-13) * value.abs();
                return Ok(KernelValue { value, tail_bound, terms: 0 });
            }
            let cap = max_terms.min(SPHERE_HEAT_DEGREE_CAP);
            let (l, tail) = sphere_heat_degree(t, tol, cap);
            if tail > tol {
                return Err(Error::Resource {
                    what: format!("sphere heat series at t = {t} (degree cap {cap})"),
                    achieved: tail.f64(),
                });
            }
            let p = legendre_all(l, c);
            let terms: Vec<T> = p
                .iter()
                .enumerate()
                .map(|(n, pn)| {
                    let nf = T::from_usize_(n);
                    (-nf * (nf + T::one()) * t).exp() * (nf + nf + T::one()) * *pn
                })
                .collect();
            Ok(KernelValue { value: pairwise_sum(&terms), tail_bound: tail, terms: l + 1 })
        }
    }
}

/// Sphere heat kernel at small time and geodesic distance `theta`, with a
/// bound on the neglected images.
///
/// Writing `P_n(cos θ)` by the Mehler–Dirichlet integral and summing the
/// half-integer theta series by Poisson summation gives
/// `W = e^{t/4} (√2/π) √(π/t) (2t)^{-1} ∫_θ^π g(φ) (cos θ - cos φ)^{-1/2} dφ`
/// with `g(φ) = Σ_m (-1)^m (φ - 2πm) e^{-(φ-2πm)²/4t}`. For `φ ∈ [0, π]` the
/// terms `m = 0, 1` are positive and dominate, so the result is accurate
/// relative to its own size rather than to `1`.
fn sphere_heat_small_time<T: Real>(t: T, theta: T) -> (T, T) {
    let pi = T::PI();
    let four_t = T::lit(4.0) * t;
    let theta2 = theta * theta;
    if theta2 / four_t > T::lit(800.0) {
        // below every representable positive value once multiplied out
        return finish_small_time(t, theta2, T::zero());
    }
    // g(θ + τ) e^{θ²/4t}
    let g = |tau: T| {
        let phi = theta + tau;
        let mut acc = phi * (-(tau * (theta + theta + tau)) / four_t).exp();
        for m in [-2i32, -1, 1, 2] {
            let s = phi - T::TAU() * T::lit(m as f64);
            let sign = if m % 2 == 0 { T::one() } else { -T::one() };
            acc = acc + sign * s * (-(s * s - theta2) / four_t).exp();
        }
        acc
    };
    let span = pi - theta;
    if span <= T::zero() {
        // antipodal limit of the arcsine-type integral
        let w = T::lit(std::f64::consts::FRAC_1_SQRT_2) * pi * g(T::zero());
        return finish_small_time(t, theta2, w);
    }
    let mut tau_hi = span;
    if pi * pi - theta2 >= T::lit(160.0) * t {
        tau_hi = tau_hi.min((T::lit(160.0) * t).sqrt());
        if theta > T::zero() {
            tau_hi = tau_hi.min(T::lit(80.0) * t / theta);
        }
    }
    let w_hi = tau_hi.sqrt();
    // the factor (cos θ - cos φ)^{-1/2} varies on the scale w ~ √θ
    let w_min = (T::lit(0.1) * theta.sqrt()).max(w_hi * T::lit(1e-6)).min(w_hi);
    let mut breaks = vec![T::zero()];
    let mut w = w_min;
    while w < w_hi {
        breaks.push(w);
        w = w * T::lit(1.5);
    }
    breaks.push(w_hi);
    let max_width = w_hi / T::lit(8.0);
    let (xs, ws) = gauss_legendre(16);
    let mut acc = T::zero();
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let pieces = ((b - a) / max_width).ceil().to_usize().unwrap_or(1).max(1);
        let step = (b - a) / T::from_usize_(pieces);
        for k in 0..pieces {
            let lo = a + step * T::from_usize_(k);
            let half = step * T::lit(0.5);
            for (x, wt) in xs.iter().zip(&ws) {
                let w = lo + half + half * T::lit(*x);
                let tau = w * w;
                let den = (T::lit(2.0) * (theta + tau * T::lit(0.5)).sin() * (tau * T::lit(0.5)).sin()).sqrt();
                acc = acc + T::lit(*wt) * half * (w + w) * g(tau) / den;
            }
        }
    }
    finish_small_time(t, theta2, acc)
}

fn finish_small_time<T: Real>(t: T, theta2: T, integral: T) -> (T, T) {
    let pref = (t * T::lit(0.25)).exp() * T::lit(std::f64::consts::SQRT_2) / T::PI() * (T::PI() / t).sqrt()
        / (t + t);
    let value = pref * (-theta2 / (T::lit(4.0) * t)).exp() * integral;
    // images |m| ≥ 3 sit at distance ≥ 5π
    let images = pref * T::lit(200.0) * (-T::lit(25.0) * T::PI() * T::PI() / (T::lit(4.0) * t)).exp();
    (value, images)
}

fn lp_value<T: Real>(
    m: &ManifoldSpec,
    alpha: T,
    r: T,
    x: &Point<T>,
    y: &Point<T>,
    max_terms: usize,
) -> Result<KernelValue<T>> {
    if !(r > T::zero()) {
        return invalid(format!("scale must be positive, got {r}"));
    }
    let half = alpha * T::lit(0.5);
    let (lo, hi) = (r * T::lit(0.5), r * T::lit(2.0));
    match m.kind {
        ManifoldKind::Torus => {
            let delta = torus_delta(m.dim, x, y);
            let kmax = (hi / T::TAU()).floor().to_i64().unwrap_or(0);
            let count = (2 * kmax + 1).pow(m.dim as u32) as usize;
            if count > max_terms {
                return Err(Error::Resource {
                    what: format!("Littlewood–Paley piece at scale {r}"),
                    achieved: f64::INFINITY,
                });
            }
            let span = |i: usize| if i < m.dim { -kmax..=kmax } else { 0..=0 };
            let mut terms = Vec::new();
            for k0 in span(0) {
                for k1 in span(1) {
                    for k2 in span(2) {
                        let k = [k0, k1, k2];
                        let k2n = (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                        let lam = T::TAU() * T::lit(k2n.sqrt());
                        if lam <= lo || lam >= hi {
                            continue;
                        }
                        let mut ph = T::zero();
                        for i in 0..m.dim {
                            ph = ph + T::lit(k[i] as f64) * delta[i];
                        }
                        let w = lp_cutoff(lam / r) * (T::one() + lam * lam).powf(-half);
                        terms.push(w * (T::TAU() * ph).cos());
                    }
                }
            }
            Ok(KernelValue { value: pairwise_sum(&terms), tail_bound: T::zero(), terms: terms.len() })
        }
        ManifoldKind::Sphere => {
            // λ² = n(n+1) < 4r² bounds the degree
            let nmax = (hi + T::one()).to_usize().unwrap_or(0);
            if nmax > max_terms {
                return Err(Error::Resource {
                    what: format!("Littlewood–Paley piece at scale {r}"),
                    achieved: f64::INFINITY,
                });
            }
            let (c, _) = sphere_cos_pair(x, y);
            let p = legendre_all(nmax, c);
            let mut terms = Vec::new();
            for (n, pn) in p.iter().enumerate() {
                let nf = T::from_usize_(n);
                let l2 = nf * (nf + T::one());
                let lam = l2.sqrt();
                if lam <= lo || lam >= hi {
                    continue;
                }
                terms.push(lp_cutoff(lam / r) * (T::one() + l2).powf(-half) * (nf + nf + T::one()) * *pn);
            }
            Ok(KernelValue { value: pairwise_sum(&terms), tail_bound: T::zero(), terms: terms.len() })
        }
    }
}

/// Largest time for which [`heat_diagonal_model`] is valid.
pub const HEAT_MODEL_MAX_TIME: f64 = 1e-3;

/// Small-time model of `W(t, x, x)` and a bound on its error, for
/// `t ≤ HEAT_MODEL_MAX_TIME`: `(4πt)^{-d/2}` on the torus (the other images
/// are below `e^{-1/4t}`), `1/t + 1/3 + t/15` on the sphere (error below
/// `t²`).
pub fn heat_diagonal_model<T: Real>(m: &ManifoldSpec, t: T) -> Result<(T, T)> {
    if !(t > T::zero() && t <= T::lit(HEAT_MODEL_MAX_TIME)) {
        return invalid(format!("diagonal model needs 0 < t ≤ {HEAT_MODEL_MAX_TIME}, got {t}"));
    }
    Ok(match m.kind {
        ManifoldKind::Torus => {
            let v = (T::lit(4.0) * T::PI() * t).powf(-T::from_usize_(m.dim) * T::lit(0.5));
            let axis = T::lit(2.01) * (-(T::lit(0.25) / t)).exp();
            (v, v * ((T::one() + axis).powi(m.dim as i32) - T::one()))
        }
        ManifoldKind::Sphere => (t.recip() + T::one() / T::lit(3.0) + t / T::lit(15.0), t * t),
    })
}

/// `Γ(s/2)^{-1} ∫_lo^hi t^{s/2-1} e^{-t} f(t) dt` by Gauss–Legendre panels of
/// width 1/2 in `ln t`. This is the subordination integral that turns the
/// heat kernel into the Bessel kernel when `lo → 0` and `hi → ∞`.
pub fn subordinate<T: Real>(order: T, lo: T, hi: T, mut f: impl FnMut(T) -> T) -> T {
    let (xs, ws) = gauss_legendre(16);
    let half_order = order * T::lit(0.5);
    let (a, b) = (lo.ln(), hi.ln());
    let panels = ((b - a) * T::lit(2.0)).ceil().to_usize().unwrap_or(1).max(1);
    let width = (b - a) / T::from_usize_(panels);
    let mut acc = T::zero();
    for p in 0..panels {
        let mid = a + width * (T::from_usize_(p) + T::lit(0.5));
        for (x, w) in xs.iter().zip(&ws) {
            let v = mid + width * T::lit(0.5 * x);
            let t = v.exp();
            acc = acc + T::lit(*w) * (half_order * v - t).exp() * f(t);
        }
    }
    acc * width * T::lit(0.5) * rgamma(half_order)
}
