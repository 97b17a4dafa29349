//! Worst-case error of a point set in `W^{α,2}`,
//! `WCE² = Σ_{λ>0} (1+λ²)^{-α} |Fν(λ)|²`, by three independent routes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::moments::moment_vector;
use crate::error::{invalid, Error, Result};
use crate::kernels::{heat_diagonal_model, heat_eval, BesselKernel, DEFAULT_MAX_TERMS, HEAT_MODEL_MAX_TIME, SPHERE_HEAT_FLOOR};
use crate::manifold::{distance_unchecked, spectrum_below_with_budget, ManifoldKind, ManifoldSpec, SpectrumSlice};
use crate::pointsets::PointSet;
use crate::scalar::{pairwise_sum, Real};
use crate::special::{gamma_p, gamma_q, lower_gamma, rgamma};

/// Largest basis the spectral route enumerates unless told otherwise.
pub const DEFAULT_SPECTRAL_BUDGET: usize = 1 << 16;
/// Smallest time the torus heat route integrates numerically.
pub const TORUS_HEAT_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WceMethod {
    Spectral,
    Kernel,
    Heat,
}

impl WceMethod {
    pub const ALL: [WceMethod; 3] = [WceMethod::Spectral, WceMethod::Kernel, WceMethod::Heat];

    pub fn name(self) -> &'static str {
        match self {
            WceMethod::Spectral => "spectral",
            WceMethod::Kernel => "kernel",
            WceMethod::Heat => "heat",
        }
    }
}

impl std::str::FromStr for WceMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(WceMethod::Spectral),
            "kernel" => Ok(WceMethod::Kernel),
            "heat" => Ok(WceMethod::Heat),
            _ => invalid(format!("unknown method {s:?} (spectral, kernel, heat)")),
        }
    }
}

/// Result of [`wce`]. The tail bound refers to `value_squared`: the exact
/// `WCE²` lies within `tail_bound` of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WceReport<T> {
    pub alpha: T,
    pub method: WceMethod,
    pub value: T,
    pub value_squared: T,
    pub tail_bound: T,
    /// Spectral: the cutoff `Λ`. Kernel: lattice vectors or degrees summed.
    /// Heat: the smallest time integrated numerically.
    pub cutoff: T,
    pub n: usize,
    pub tolerance: T,
    /// Whether `tail_bound ≤ tolerance`.
    pub converged: bool,
}

impl<T: Real> WceReport<T> {
    fn new(ps: &PointSet<T>, alpha: T, method: WceMethod, sq: T, bound: T, cutoff: T, tol: T) -> Self {
        Self {
            alpha,
            method,
            value: sq.max(T::zero()).sqrt(),
            value_squared: sq,
            tail_bound: bound,
            cutoff,
            n: ps.len(),
            tolerance: tol,
            converged: bound <= tol,
        }
    }
}

/// Worst-case error of `ps` in `W^{α,2}` by the chosen route.
pub fn wce<T: Real>(ps: &PointSet<T>, alpha: T, method: WceMethod, tol: T) -> Result<WceReport<T>> {
    check_alpha(&ps.manifold, alpha)?;
    if !(tol > T::zero()) {
        return invalid(format!("tolerance must be positive, got {tol}"));
    }
    ps.check()?;
    match method {
        WceMethod::Spectral => wce_spectral(ps, alpha, tol, DEFAULT_SPECTRAL_BUDGET),
        WceMethod::Kernel => wce_kernel(ps, alpha, tol),
        WceMethod::Heat => wce_heat(ps, alpha, tol),
    }
}

pub(crate) fn check_alpha<T: Real>(m: &ManifoldSpec, alpha: T) -> Result<()> {
    let half = T::from_usize_(m.dim) * T::lit(0.5);
    if !(alpha > half) || !alpha.is_finite() {
        return invalid(format!("alpha must exceed d/2 = {half}, got {alpha}"));
    }
    Ok(())
}

/// Weight `(1+λ²)^{-α}` of an eigenvalue root.
fn sobolev_weight<T: Real>(lambda: T, alpha: T) -> T {
    (T::one() + lambda * lambda).powf(-alpha)
}

/// Spectral slice holding at most `budget` basis functions.
fn largest_slice<T: Real>(m: &ManifoldSpec, budget: usize) -> Result<SpectrumSlice<T>> {
    let b = budget as f64;
    let mut r = match m.kind {
        ManifoldKind::Torus => {
            let unit = [2.0, std::f64::consts::PI, 4.0 / 3.0 * std::f64::consts::PI][m.dim - 1];
            std::f64::consts::TAU * (b / unit).powf(1.0 / m.dim as f64)
        }
        ManifoldKind::Sphere => b.sqrt(),
    };
    loop {
        match spectrum_below_with_budget(m, T::lit(r), budget) {
            Ok(s) => return Ok(s),
            Err(Error::Resource { .. }) if r > 1.0 => r *= 0.95,
            Err(e) => return Err(e),
        }
    }
}

/// Spectral route with an explicit basis budget.
pub fn wce_spectral<T: Real>(ps: &PointSet<T>, alpha: T, tol: T, budget: usize) -> Result<WceReport<T>> {
    check_alpha(&ps.manifold, alpha)?;
    let m = ps.manifold;
    let full = largest_slice::<T>(&m, budget)?;
    // Σ_{λ>0} mult·(1+λ²)^{-α} = B^{2α}(x, x) - 1
    let kernel = BesselKernel::new(&m, alpha + alpha, T::lit(1e-14), DEFAULT_MAX_TERMS)?;
    let total = kernel.diagonal() - T::one();
    let margin = T::lit(1e-14) + T::lit(1e-13) * kernel.diagonal();
    let shell_mass: Vec<T> = full
        .shells
        .iter()
        .map(|s| T::from_usize_(s.multiplicity) * sobolev_weight(s.lambda, alpha))
        .collect();
    // smallest prefix whose certified tail meets tol; a running sum is
    // enough to choose it, the reported tail is summed pairwise below
    let mut used = full.shells.len();
    let mut acc = T::zero();
    for (k, w) in shell_mass.iter().enumerate().skip(1) {
        acc = acc + *w;
        if (total - acc).max(T::zero()) + margin <= tol {
            used = k + 1;
            break;
        }
    }
    let cutoff = if used < full.shells.len() { full.shells[used].lambda } else { full.cutoff };
    let shells = full.shells[..used].to_vec();
    let basis_size = shells.iter().map(|s| s.multiplicity).sum();
    let slice = SpectrumSlice { manifold: m, cutoff, shells, basis_size };
    let tail = (total - pairwise_sum(&shell_mass[1..used])).max(T::zero()) + margin;

    let f = moment_vector(ps, &slice);
    let lambdas = slice.basis_lambdas();
    let terms: Vec<T> = f
        .iter()
        .zip(&lambdas)
        .skip(1)
        .map(|(v, &l)| sobolev_weight(l, alpha) * *v * *v)
        .collect();
    let sq = pairwise_sum(&terms);
    let rounding = T::lit(1e-14) * (sq + T::one());
    Ok(WceReport::new(ps, alpha, WceMethod::Spectral, sq, tail + rounding, cutoff, tol))
}

/// `Σ_{0<λ<Λ} (1+λ²)^{-α} |Fν(λ)|²` for each `α` in `alphas`, all on the
/// largest slice within `budget` basis functions. Terms are summed in the
/// same order for every `α`, so termwise comparisons carry over exactly.
pub fn spectral_partial_sums<T: Real>(ps: &PointSet<T>, alphas: &[T], budget: usize) -> Result<(T, Vec<T>)> {
    ps.check()?;
    let slice = largest_slice::<T>(&ps.manifold, budget)?;
    let f = moment_vector(ps, &slice);
    let lambdas = slice.basis_lambdas();
    let sums = alphas
        .iter()
        .map(|&a| {
            let terms: Vec<T> =
                f.iter().zip(&lambdas).skip(1).map(|(v, &l)| sobolev_weight(l, a) * *v * *v).collect();
            pairwise_sum(&terms)
        })
        .collect();
    Ok((slice.cutoff, sums))
}

fn wce_kernel<T: Real>(ps: &PointSet<T>, alpha: T, tol: T) -> Result<WceReport<T>> {
    let k = BesselKernel::for_batch(&ps.manifold, alpha + alpha, ps.len(), tol, DEFAULT_MAX_TERMS)?;
    let (sq, bound) = k.energy(&ps.nodes, &ps.weights)?;
    Ok(WceReport::new(ps, alpha, WceMethod::Kernel, sq, bound, T::from_usize_(k.terms()), tol))
}

/// Heat-kernel energy `E(t) = Σ_i Σ_j ω_i ω_j W(t, z_i, z_j) - 1`, split
/// into the diagonal (coincident pairs) and separated pairs.
struct HeatEnergy<'a, T> {
    ps: &'a PointSet<T>,
    /// `Σ ω_i ω_j` over pairs closer than [`COINCIDENT`], including `i = j`.
    diag_weight: T,
    pair_tol: T,
}

/// Pairs closer than this count as coincident.
const COINCIDENT: f64 = 1e-9;

struct Sample<T> {
    e: T,
    /// Separated-pair part alone.
    off: T,
    bound: T,
}

impl<T: Real> HeatEnergy<'_, T> {
    fn at(&self, t: T) -> Result<Sample<T>> {
        let ps = self.ps;
        let m = ps.manifold;
        let x0 = ps.nodes[0];
        let wd = heat_eval(&m, t, &x0, &x0, self.pair_tol)?;
        let n = ps.len();
        let rows: Vec<T> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut off = Vec::with_capacity(n - i);
                for j in i + 1..n {
                    let a = &ps.nodes[i];
                    let b = &ps.nodes[j];
                    if distance_unchecked(&m, a, b) <= T::lit(COINCIDENT) {
                        continue;
                    }
                    let w = heat_eval(&m, t, a, b, self.pair_tol)?;
                    off.push(T::lit(2.0) * ps.weights[i] * ps.weights[j] * w);
                }
                Ok(pairwise_sum(&off))
            })
            .collect::<Result<Vec<_>>>()?;
        let off = pairwise_sum(&rows);
        let diag = self.diag_weight * wd;
        let e = diag + off - T::one();
        // every kernel value is within pair_tol; the weights sum to one
        let bound = self.pair_tol + T::lit(1e-13) * (diag + off + T::one());
        Ok(Sample { e, off, bound })
    }
}

/// 7-point Gauss and 15-point Kronrod nodes on `[-1, 1]` (nonnegative half).
const KRONROD_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod estimate and `|K - G|` of `f` over `[a, b]`.
fn kronrod<T: Real>(a: T, b: T, f: &mut impl FnMut(T) -> Result<T>) -> Result<(T, T)> {
    let c = (a + b) * T::lit(0.5);
    let h = (b - a) * T::lit(0.5);
    let fc = f(c)?;
    let mut k = T::lit(KRONROD_W[7]) * fc;
    let mut g = T::lit(GAUSS7_W[3]) * fc;
    for i in 0..7 {
        let dx = h * T::lit(KRONROD_X[i]);
        let s = f(c - dx)? + f(c + dx)?;
        k = k + T::lit(KRONROD_W[i]) * s;
        if i % 2 == 1 {
            g = g + T::lit(GAUSS7_W[i / 2]) * s;
        }
    }
    Ok((k * h, ((k - g) * h).abs()))
}

/// Heat route: `Γ(α)^{-1} ∫_0^∞ t^{α-1} e^{-t} E(t) dt`.
///
/// Below `t_min` the diagonal follows [`heat_diagonal_model`] and separated
/// pairs, which only grow while `t` is small against their squared
/// distance, are bounded by their value at `t_min`. Above `t_max` the
/// monotone decay of `E` bounds the rest by `E(t_max) Q(α, t_max)`.
fn wce_heat<T: Real>(ps: &PointSet<T>, alpha: T, tol: T) -> Result<WceReport<T>> {
    let m = ps.manifold;
    let n = ps.len();
    let mut diag_weight = ps.weights.iter().map(|&w| w * w).sum::<T>();
    let mut min_sep = T::infinity();
    for i in 0..n {
        for j in i + 1..n {
            let d = distance_unchecked(&m, &ps.nodes[i], &ps.nodes[j]);
            if d <= T::lit(COINCIDENT) {
                diag_weight = diag_weight + T::lit(2.0) * ps.weights[i] * ps.weights[j];
            } else {
                min_sep = min_sep.min(d);
            }
        }
    }
    let floor = T::lit(if m.is_sphere() { SPHERE_HEAT_FLOOR } else { TORUS_HEAT_FLOOR });
    let he = HeatEnergy { ps, diag_weight, pair_tol: tol * T::lit(1e-2) };
    let rg = rgamma(alpha);

    // low segment, (0, t_min]: separated pairs are nondecreasing in t up to
    // θ²/40, so t_min is halved until their share there is negligible
    let monotone_to = min_sep * min_sep / T::lit(40.0);
    let mut t_min = monotone_to.max(floor).min(T::lit(HEAT_MODEL_MAX_TIME));
    let mut s_min = he.at(t_min)?;
    while monotone_to >= t_min
        && t_min * T::lit(0.5) >= floor
        && s_min.off.max(T::zero()) * gamma_p(alpha, t_min) > tol * T::lit(1e-2)
    {
        t_min = t_min * T::lit(0.5);
        s_min = he.at(t_min)?;
    }
    let d = T::from_usize_(m.dim);
    let (model_int, model_err) = match m.kind {
        ManifoldKind::Torus => {
            let a = alpha - d * T::lit(0.5);
            let v = (T::lit(4.0) * T::PI()).powf(-d * T::lit(0.5)) * lower_gamma(a, t_min) * rg;
            // the relative model error grows with t
            let (mv, me) = heat_diagonal_model(&m, t_min)?;
            (v, v * me / mv)
        }
        ManifoldKind::Sphere => {
            let v = lower_gamma(alpha - T::one(), t_min)
                + lower_gamma(alpha, t_min) / T::lit(3.0)
                + lower_gamma(alpha + T::one(), t_min) / T::lit(15.0);
            let err = t_min.powf(alpha + T::lit(2.0)) / (alpha + T::lit(2.0));
            (v * rg, err * rg)
        }
    };
    let p_min = gamma_p(alpha, t_min);
    // otherwise separated pairs are bounded by the diagonal
    let off_hi = if monotone_to >= t_min {
        s_min.off.max(T::zero()) * p_min
    } else {
        (T::one() - diag_weight) * (model_int + model_err)
    };
    let low = diag_weight * model_int - p_min + off_hi * T::lit(0.5);
    let low_bound = diag_weight * model_err + off_hi * T::lit(0.5) + he.pair_tol * p_min;

    // high segment, [t_max, ∞)
    let mut t_max = T::lit(20.0);
    let mut s_max = he.at(t_max)?;
    while s_max.e.max(T::zero()) * gamma_q(alpha, t_max) > tol * T::lit(1e-2) && t_max < T::lit(1e4) {
        t_max = t_max + t_max;
        s_max = he.at(t_max)?;
    }
    let hi_part = (s_max.e + s_max.bound).max(T::zero()) * gamma_q(alpha, t_max);
    let high = hi_part * T::lit(0.5);

    // middle, adaptive Gauss–Kronrod in u = ln t
    let mut samples: Vec<(T, T, T)> = vec![(t_min, s_min.e, s_min.bound), (t_max, s_max.e, s_max.bound)];
    let mut f = |u: T| -> Result<T> {
        let t = u.exp();
        let s = he.at(t)?;
        samples.push((t, s.e, s.bound));
        Ok((alpha * u - t).exp() * s.e * rg)
    };
    let (a, b) = (t_min.ln(), t_max.ln());
    let panels = (b - a).ceil().to_usize().unwrap_or(1).max(1);
    let width = (b - a) / T::from_usize_(panels);
    let mut stack: Vec<(T, T, usize)> =
        (0..panels).rev().map(|p| (a + width * T::from_usize_(p), a + width * T::from_usize_(p + 1), 0)).collect();
    let budget = tol * T::lit(0.1);
    let (mut mid, mut mid_err) = (Vec::new(), Vec::new());
    while let Some((lo, hi, depth)) = stack.pop() {
        let (v, e) = kronrod(lo, hi, &mut f)?;
        let share = budget * (hi - lo) / (b - a);
        if e <= share || depth >= 12 {
            mid.push(v);
            mid_err.push(e);
        } else {
            let c = (lo + hi) * T::lit(0.5);
            stack.push((c, hi, depth + 1));
            stack.push((lo, c, depth + 1));
        }
    }
    let mid_sum = pairwise_sum(&mid);
    let mid_bound = pairwise_sum(&mid_err) + he.pair_tol;

    // the diagnostic itself: E ≥ 0 and nonincreasing at every node
    samples.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    for s in &samples {
        if s.1 < -s.2 {
            return Err(Error::Internal(format!("heat energy negative at t = {}: {}", s.0, s.1)));
        }
    }
    for w in samples.windows(2) {
        if w[1].1 > w[0].1 + w[0].2 + w[1].2 {
            return Err(Error::Internal(format!(
                "heat energy increases between t = {} and {}: {} → {}",
                w[0].0, w[1].0, w[0].1, w[1].1
            )));
        }
    }

    let sq = low + mid_sum + high;
    let bound = low_bound + mid_bound + hi_part * T::lit(0.5);
    Ok(WceReport::new(ps, alpha, WceMethod::Heat, sq, bound, t_min, tol))
}
