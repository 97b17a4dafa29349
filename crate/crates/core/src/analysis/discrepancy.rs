//! Discrepancy of a point set against balls (torus), caps (sphere) and the
//! level sets of the sphere Bessel kernel, which are caps as well.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::qnorm::quasi_uniform_grid;
use crate::error::{invalid, Result};
use crate::kernels::{BesselKernel, DEFAULT_MAX_TERMS};
use crate::manifold::{distance_unchecked, ManifoldKind, ManifoldSpec, Point};
use crate::pointsets::PointSet;
use crate::scalar::{pairwise_sum, Real};
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscrepancyFamily {
    CapsOrBalls,
    BesselLevelSets,
}

/// Three regimes of the level-set estimate, by the kernel order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevelRegime {
    /// `α < 1`: rate `r^{-α}`.
    Fractional,
    /// `α = 1`: rate `r^{-1} log(1+r)`.
    Critical,
    /// `α > 1`: rate `r^{-1}`.
    Smooth,
}

impl LevelRegime {
    pub fn of<T: Real>(alpha: T) -> Self {
        if alpha < T::one() {
            LevelRegime::Fractional
        } else if alpha == T::one() {
            LevelRegime::Critical
        } else {
            LevelRegime::Smooth
        }
    }

    /// Predicted decay at band `r`, up to a constant.
    pub fn rate<T: Real>(self, alpha: T, r: T) -> T {
        match self {
            LevelRegime::Fractional => r.powf(-alpha),
            LevelRegime::Critical => (T::one() + r).ln() / r,
            LevelRegime::Smooth => r.recip(),
        }
    }
}

/// Extra fields of a level-set report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSummary<T> {
    pub alpha: T,
    /// Kernel levels `t`, one per radius.
    pub levels: Vec<T>,
    /// Mean over the quasi-uniform centers of `|ν(cap) - vol(cap)|`.
    pub mean_discrepancy: Vec<T>,
    /// Trapezoid integral of the mean discrepancy over the levels, plus the
    /// closed-form contribution of the caps inside the smallest radius.
    pub integrated: T,
    pub regime: LevelRegime,
}

/// Output of [`cap_discrepancy`] and [`levelset_discrepancy`].
///
/// The sup runs over a finite set of centers, so every entry is a lower
/// estimate of the true sup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport<T> {
    pub family: DiscrepancyFamily,
    /// Quasi-uniform centers; the nodes are added on top of these.
    pub grid_centers: usize,
    pub centers: usize,
    pub radii: Vec<T>,
    /// `sup_y |ν(B(y, s)) - vol(B(y, s))|` per radius.
    pub sup: Vec<T>,
    pub lower_estimate: bool,
    /// Band `r` the shape constant refers to.
    pub band: Option<T>,
    /// Smallest `C` with `sup(s) ≤ C max(r^{-d}, r^{-1} s^{d-1})` on every radius.
    pub shape_constant: Option<T>,
    pub levels: Option<LevelSetSummary<T>>,
}

impl<T: Real> DiscrepancyReport<T> {
    /// Fills in the shape constant for band `r`.
    pub fn with_band(mut self, m: &ManifoldSpec, r: T) -> Self {
        self.band = Some(r);
        self.shape_constant = Some(shape_constant(m, r, &self.radii, &self.sup));
        self
    }
}

/// `max_s disc(s) / max(r^{-d}, r^{-1} s^{d-1})`.
pub fn shape_constant<T: Real>(m: &ManifoldSpec, r: T, radii: &[T], sup: &[T]) -> T {
    let d = m.dim as i32;
    radii
        .iter()
        .zip(sup)
        .map(|(&s, &v)| v / r.powi(-d).max(s.powi(d - 1) / r))
        .fold(T::zero(), T::max)
}

/// Volume of the ball or cap of radius `s`.
pub fn ball_volume<T: Real>(m: &ManifoldSpec, s: T) -> T {
    match m.kind {
        ManifoldKind::Torus => match m.dim {
            1 => s + s,
            2 => T::PI() * s * s,
            _ => T::lit(4.0 / 3.0) * T::PI() * s * s * s,
        },
        ManifoldKind::Sphere => (T::one() - s.cos()) * T::lit(0.5),
    }
}

fn check_radii<T: Real>(m: &ManifoldSpec, radii: &[T]) -> Result<()> {
    if radii.is_empty() {
        return invalid("at least one radius is needed");
    }
    for &s in radii {
        let ok = match m.kind {
            ManifoldKind::Torus => s > T::zero() && s <= T::lit(0.5),
            ManifoldKind::Sphere => s > T::zero() && s < T::PI(),
        };
        if !ok {
            let range = if m.is_torus() { "(0, 1/2]" } else { "(0, π)" };
            return invalid(format!("radius {s} outside {range}"));
        }
    }
    Ok(())
}

/// Node distances from `y`, sorted, with prefix sums of the weights.
fn profile<T: Real>(ps: &PointSet<T>, y: &Point<T>) -> (Vec<T>, Vec<T>) {
    let mut pairs: Vec<(T, T)> =
        ps.nodes.iter().zip(&ps.weights).map(|(z, &w)| (distance_unchecked(&ps.manifold, z, y), w)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    let mut acc = T::zero();
    let cum = pairs
        .iter()
        .map(|p| {
            acc = acc + p.1;
            acc
        })
        .collect();
    (pairs.into_iter().map(|p| p.0).collect(), cum)
}

/// `|ν(B(y, s)) - vol(B(y, s))|` for each radius, closed balls.
fn local<T: Real>(m: &ManifoldSpec, dist: &[T], cum: &[T], radii: &[T]) -> Vec<T> {
    radii
        .iter()
        .map(|&s| {
            let k = dist.partition_point(|&d| d <= s);
            let mass = if k == 0 { T::zero() } else { cum[k - 1] };
            (mass - ball_volume(m, s)).abs()
        })
        .collect()
}

/// Sup over `centers` quasi-uniform points and the nodes themselves of the
/// local discrepancy, per radius. Torus radii must lie in `(0, 1/2]`, sphere
/// radii in `(0, π)`; on the torus `centers` is rounded down to a perfect
/// d-th power.
pub fn cap_discrepancy<T: Real>(ps: &PointSet<T>, centers: usize, radii: &[T]) -> Result<DiscrepancyReport<T>> {
    ps.check()?;
    let m = ps.manifold;
    check_radii(&m, radii)?;
    let grid = center_grid(&m, centers)?;
    let grid_centers = grid.len();
    let all: Vec<Point<T>> = grid.into_iter().chain(ps.nodes.iter().copied()).collect();
    let sup = sup_over(ps, &all, radii);
    Ok(DiscrepancyReport {
        family: DiscrepancyFamily::CapsOrBalls,
        grid_centers,
        centers: all.len(),
        radii: radii.to_vec(),
        sup,
        lower_estimate: true,
        band: None,
        shape_constant: None,
        levels: None,
    })
}

fn center_grid<T: Real>(m: &ManifoldSpec, centers: usize) -> Result<Vec<Point<T>>> {
    if centers == 0 {
        return invalid("at least one center is needed");
    }
    let n = if m.is_torus() {
        let mut side = (centers as f64).powf(1.0 / m.dim as f64).round() as usize + 1;
        while side > 1 && side.pow(m.dim as u32) > centers {
            side -= 1;
        }
        side.pow(m.dim as u32)
    } else {
        centers
    };
    quasi_uniform_grid(m, n)
}

fn sup_over<T: Real>(ps: &PointSet<T>, centers: &[Point<T>], radii: &[T]) -> Vec<T> {
    let m = ps.manifold;
    centers
        .par_iter()
        .map(|y| {
            let (dist, cum) = profile(ps, y);
            local(&m, &dist, &cum, radii)
        })
        .reduce(
            || vec![T::zero(); radii.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        )
}

/// Geodesic radius `ρ` with `B(ρ) = t` for a decreasing radial profile,
/// by bisection until `|B(ρ) - t| ≤ 1e-8 max(1, t)` or the bracket closes.
pub fn invert_profile<T: Real>(kernel: &BesselKernel<T>, t: T) -> Result<Option<T>> {
    let at = |rho: T| kernel.profile(rho).map(|v| v.value);
    let top = kernel.diagonal();
    if t >= top {
        return Ok(None);
    }
    let (mut lo, mut hi) = (T::zero(), T::PI());
    if at(hi)? >= t {
        return Ok(Some(T::PI()));
    }
    let target = T::lit(1e-8) * t.abs().max(T::one());
    for _ in 0..200 {
        let mid = (lo + hi) * T::lit(0.5);
        let v = at(mid)?;
        if (v - t).abs() <= target || hi - lo <= T::epsilon() * T::lit(4.0) {
            return Ok(Some(mid));
        }
        if v > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some((lo + hi) * T::lit(0.5)))
}

/// Discrepancy against the superlevel sets `{x : B^α(x, y) > t}` on the
/// sphere, which are caps centered at `y`. Each level is turned into a cap
/// radius by inverting the radial profile.
///
/// The integral over levels is the quantity that controls the error of
/// functions in `W^{α,∞}`; it is reported with the regime that predicts
/// its decay.
pub fn levelset_discrepancy<T: Real>(
    ps: &PointSet<T>,
    alpha: T,
    levels: &[T],
    centers: usize,
    tol: T,
) -> Result<DiscrepancyReport<T>> {
    ps.check()?;
    let m = ps.manifold;
    if !m.is_sphere() {
        return invalid(
            "level sets of the torus kernel are not geodesic balls; use cap_discrepancy on the torus",
        );
    }
    if !(alpha > T::zero()) {
        return invalid(format!("alpha must be positive, got {alpha}"));
    }
    if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) || !(levels[0] > T::zero()) {
        return invalid("levels must be positive and strictly increasing");
    }
    let kernel = BesselKernel::new(&m, alpha, tol, DEFAULT_MAX_TERMS)?;
    let radii = levels.iter().map(|&t| invert_profile(&kernel, t)).collect::<Result<Vec<_>>>()?;
    let grid = center_grid(&m, centers)?;
    let grid_centers = grid.len();
    let all: Vec<Point<T>> = grid.iter().copied().chain(ps.nodes.iter().copied()).collect();

    // empty level sets contribute nothing; the whole sphere is a cap of radius π
    let live: Vec<T> = radii.iter().flatten().copied().collect();
    let pad = |vals: Vec<T>| {
        let mut it = vals.into_iter();
        radii.iter().map(|r| if r.is_some() { it.next().unwrap_or(T::zero()) } else { T::zero() }).collect::<Vec<T>>()
    };
    let (sup, mean) = if live.is_empty() {
        (vec![T::zero(); radii.len()], vec![T::zero(); radii.len()])
    } else {
        let whole = |v: Vec<T>| -> Vec<T> {
            v.into_iter()
                .zip(&live)
                .map(|(x, &r)| if r >= T::PI() { (pairwise_sum(&ps.weights) - T::one()).abs() } else { x })
                .collect()
        };
        let capped: Vec<T> = live.iter().map(|&r| r.min(T::PI() * T::lit(0.999_999_999))).collect();
        let sup = whole(sup_over(ps, &all, &capped));
        let rows: Vec<Vec<T>> = grid
            .par_iter()
            .map(|y| {
                let (dist, cum) = profile(ps, y);
                local(&m, &dist, &cum, &capped)
            })
            .collect();
        let mean: Vec<T> = (0..live.len())
            .map(|k| {
                let col: Vec<T> = rows.iter().map(|r| r[k]).collect();
                pairwise_sum(&col) / T::from_usize_(rows.len())
            })
            .collect();
        (pad(sup), pad(whole(mean)))
    };

    // trapezoid over the levels, then the caps smaller than the last radius
    let mut integrated = T::zero();
    for k in 1..levels.len() {
        integrated = integrated + (levels[k] - levels[k - 1]) * (mean[k] + mean[k - 1]) * T::lit(0.5);
    }
    let last = *levels.last().unwrap_or(&T::zero());
    if let Some(rho) = radii.last().copied().flatten() {
        integrated = integrated + inner_tail(&kernel, alpha, rho, last)?;
    }

    Ok(DiscrepancyReport {
        family: DiscrepancyFamily::BesselLevelSets,
        grid_centers,
        centers: all.len(),
        radii: radii.iter().map(|r| r.unwrap_or(T::zero())).collect(),
        sup,
        lower_estimate: true,
        band: None,
        shape_constant: None,
        levels: Some(LevelSetSummary {
            alpha,
            levels: levels.to_vec(),
            mean_discrepancy: mean,
            integrated,
            regime: LevelRegime::of(alpha),
        }),
    })
}

/// `∫_{t_hi}^∞ 2 vol{B > t} dt = 2 ∫_{cap ρ} (B - t_hi) dx`, the most the
/// mean discrepancy of caps inside radius `ρ` can add. The substitution
/// `θ = ρ u^{1/α}` flattens the `θ^{α-2}` singularity of the integrand.
fn inner_tail<T: Real>(k: &BesselKernel<T>, alpha: T, rho: T, t_hi: T) -> Result<T> {
    let (xs, ws) = gauss_legendre(32);
    let e = alpha.min(T::one()).recip();
    let mut acc = T::zero();
    for (x, w) in xs.iter().zip(&ws) {
        let u = (T::lit(*x) + T::one()) * T::lit(0.5);
        let theta = rho * u.powf(e);
        let dtheta = rho * e * u.powf(e - T::one()) * T::lit(0.5);
        let b = k.profile(theta)?.value;
        acc = acc + T::lit(*w) * (b - t_hi).max(T::zero()) * theta.sin() * T::lit(0.5) * dtheta;
    }
    Ok(acc + acc)
}
