//! How an error bound in one Sobolev space carries over to another: the
//! monotone dependence on `α`, and a one-node perturbation showing that
//! `α`-optimal rules need not be better in smoother spaces.

use serde::{Deserialize, Serialize};

use super::wce::{check_alpha, spectral_partial_sums, wce, WceMethod};
use crate::error::{invalid, Result};
use crate::manifold::{wrap_unit, ManifoldKind, Point};
use crate::pointsets::{PointSet, Provenance};
use crate::quadrature::exactness_residual;
use crate::scalar::Real;

/// Basis functions in the matched truncation of [`alpha_transfer_check`].
pub const MATCHED_BUDGET: usize = 4096;
/// Moment residual below which a point set counts as an exact rule.
pub const RULE_CHECK_TOL: f64 = 1e-8;

/// Output of [`alpha_transfer_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport<T> {
    pub alpha: T,
    pub beta: T,
    /// Kernel-route worst-case errors and the bounds on their squares.
    pub wce_alpha: T,
    pub wce_beta: T,
    pub bound_alpha: T,
    pub bound_beta: T,
    /// Spectral partial sums of `WCE²` below a common cutoff.
    pub matched_cutoff: T,
    pub matched_alpha: T,
    pub matched_beta: T,
    /// `matched_beta ≥ matched_alpha`.
    pub monotone: bool,
    /// `r = WCE(α)^{-1/α}`, the band an optimal rule with this error has.
    pub equivalent_band: T,
    /// `WCE(β) r^β`.
    pub transfer_constant: T,
}

/// Compares the worst-case errors at `α` and `β` for `d/2 < β ≤ α`.
pub fn alpha_transfer_check<T: Real>(ps: &PointSet<T>, alpha: T, beta: T, tol: T) -> Result<TransferReport<T>> {
    check_alpha(&ps.manifold, beta)?;
    if beta > alpha {
        return invalid(format!("beta = {beta} must not exceed alpha = {alpha}"));
    }
    let a = wce(ps, alpha, WceMethod::Kernel, tol)?;
    let b = wce(ps, beta, WceMethod::Kernel, tol)?;
    let (cutoff, sums) = spectral_partial_sums(ps, &[alpha, beta], MATCHED_BUDGET)?;
    let band = a.value.powf(-alpha.recip());
    Ok(TransferReport {
        alpha,
        beta,
        wce_alpha: a.value,
        wce_beta: b.value,
        bound_alpha: a.tail_bound,
        bound_beta: b.tail_bound,
        matched_cutoff: cutoff,
        matched_alpha: sums[0],
        matched_beta: sums[1],
        monotone: sums[1] >= sums[0],
        equivalent_band: band,
        transfer_constant: b.value * band.powf(beta),
    })
}

/// Output of [`perturbation_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport<T> {
    pub alpha: T,
    pub beta: T,
    pub band: T,
    /// The node moved: the heaviest one, lowest index on ties.
    pub index: usize,
    /// `r^{-α} / ω_N` before clamping.
    pub requested_delta: T,
    pub delta: T,
    pub clamped: bool,
    pub wce_alpha: T,
    pub wce_beta: T,
    pub control_alpha: T,
    pub control_beta: T,
    /// `WCE(β) / r^{-α}` of the perturbed rule.
    pub scaled_beta: T,
    /// `WCE(β) / r^{-β}` of the unperturbed rule.
    pub control_scaled_beta: T,
}

/// Largest displacement applied: a quarter period on the torus, a right
/// angle on the sphere.
pub fn safe_displacement<T: Real>(kind: ManifoldKind) -> T {
    match kind {
        ManifoldKind::Torus => T::lit(0.25),
        ManifoldKind::Sphere => T::FRAC_PI_2(),
    }
}

/// Moves node `index` by geodesic distance `delta`: along the first axis on
/// the torus, along a great circle towards the first coordinate axis (the
/// second, near the poles of the first) on the sphere.
pub fn perturb_node<T: Real>(ps: &PointSet<T>, index: usize, delta: T) -> Result<PointSet<T>> {
    if index >= ps.len() {
        return invalid(format!("node {index} out of range for {} nodes", ps.len()));
    }
    let mut out = ps.clone();
    let z = ps.nodes[index];
    out.nodes[index] = match ps.manifold.kind {
        ManifoldKind::Torus => {
            let mut c = z.c;
            c[0] = wrap_unit(c[0] + delta);
            Point { c }
        }
        ManifoldKind::Sphere => {
            let axis = if z.c[0].abs() < T::lit(0.9) { [T::one(), T::zero(), T::zero()] } else { [T::zero(), T::one(), T::zero()] };
            let dot = z.dot(&Point { c: axis });
            let mut t = [T::zero(); 3];
            for i in 0..3 {
                t[i] = axis[i] - dot * z.c[i];
            }
            let tn = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
            let (s, c) = delta.sin_cos();
            let mut p = [T::zero(); 3];
            for i in 0..3 {
                p[i] = c * z.c[i] + s * t[i] / tn;
            }
            ps.manifold.point(&p)?
        }
    };
    out.provenance = Provenance::new("perturbed").with("index", index).with("delta", delta.f64());
    Ok(out)
}

/// Moves the heaviest node `z_N` of an exact rule at band `r` by
/// `r^{-α}/ω_N`, clamped to [`safe_displacement`], and compares worst-case
/// errors at `α` and `β > α` with the unperturbed rule. The heaviest node
/// keeps the displacement below the node spacing; a light node would be
/// pushed to the clamp.
pub fn perturbation_experiment<T: Real>(
    ps: &PointSet<T>,
    alpha: T,
    beta: T,
    r: T,
    tol: T,
) -> Result<PerturbationReport<T>> {
    check_alpha(&ps.manifold, alpha)?;
    if !(beta > alpha) {
        return invalid(format!("beta = {beta} must exceed alpha = {alpha}"));
    }
    let residual = exactness_residual(ps, r)?;
    if residual > T::lit(RULE_CHECK_TOL) {
        return invalid(format!("not an exact rule at band {r}: moment residual {residual}"));
    }
    let last = (0..ps.len()).fold(0, |b, j| if ps.weights[j] > ps.weights[b] { j } else { b });
    let requested = r.powf(-alpha) / ps.weights[last];
    let cap = safe_displacement::<T>(ps.manifold.kind);
    let delta = requested.min(cap);
    let moved = perturb_node(ps, last, delta)?;
    let w = |p: &PointSet<T>, s: T| wce(p, s, WceMethod::Kernel, tol).map(|x| x.value);
    let (wa, wb) = (w(&moved, alpha)?, w(&moved, beta)?);
    let (ca, cb) = (w(ps, alpha)?, w(ps, beta)?);
    Ok(PerturbationReport {
        alpha,
        beta,
        band: r,
        index: last,
        requested_delta: requested,
        delta,
        clamped: requested > cap,
        wce_alpha: wa,
        wce_beta: wb,
        control_alpha: ca,
        control_beta: cb,
        scaled_beta: wb * r.powf(alpha),
        control_scaled_beta: cb * r.powf(beta),
    })
}
