//! Log-log slope fits and the flat tables they are written to.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::discrepancy::DiscrepancyReport;
use crate::error::{invalid, Error, Result};
use crate::pointsets::format_f64;
use crate::scalar::{pairwise_sum, Real};

/// One measured value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample<T> {
    pub abscissa: T,
    pub seed: u64,
    pub value: T,
}

/// Least squares line through `(ln abscissa, ln value)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult<T> {
    pub abscissae: Vec<T>,
    /// Values fitted, the per-abscissa mean when built from samples.
    pub values: Vec<T>,
    pub slope: T,
    /// Standard error of the slope; zero for an exact fit or two points.
    pub slope_se: T,
    pub intercept: T,
    pub seeds: Vec<u64>,
    pub samples: Vec<ScalingSample<T>>,
}

/// Ordinary least squares on the logs of at least three positive points.
pub fn scaling_fit<T: Real>(points: &[(T, T)]) -> Result<ScalingResult<T>> {
    if points.len() < 3 {
        return invalid(format!("a scaling fit needs at least 3 points, got {}", points.len()));
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > T::zero() && p.1 > T::zero() && p.0.is_finite() && p.1.is_finite())) {
        return invalid(format!("scaling points must be positive and finite, got ({}, {})", p.0, p.1));
    }
    let n = T::from_usize_(points.len());
    let xs: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = points.iter().map(|p| p.1.ln()).collect();
    let mx = pairwise_sum(&xs) / n;
    let my = pairwise_sum(&ys) / n;
    let sxx = pairwise_sum(&xs.iter().map(|&x| (x - mx) * (x - mx)).collect::<Vec<_>>());
    if !(sxx > T::zero()) {
        return invalid("scaling abscissae must not all be equal");
    }
    let sxy = pairwise_sum(&xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).collect::<Vec<_>>());
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = pairwise_sum(
        &xs.iter().zip(&ys).map(|(&x, &y)| (y - intercept - slope * x).powi(2)).collect::<Vec<_>>(),
    );
    let dof = T::from_usize_(points.len() - 2);
    let slope_se = (ssr / dof / sxx).sqrt();
    if !slope.is_finite() {
        return Err(Error::Internal(format!("scaling slope is not finite: {slope}")));
    }
    Ok(ScalingResult {
        abscissae: points.iter().map(|p| p.0).collect(),
        values: points.iter().map(|p| p.1).collect(),
        slope,
        slope_se,
        intercept,
        seeds: Vec::new(),
        samples: Vec::new(),
    })
}

/// Averages the samples per abscissa (in order of first appearance) and
/// fits the means.
pub fn scaling_from_samples<T: Real>(samples: &[ScalingSample<T>]) -> Result<ScalingResult<T>> {
    let mut order: Vec<T> = Vec::new();
    for s in samples {
        if !order.contains(&s.abscissa) {
            order.push(s.abscissa);
        }
    }
    let points: Vec<(T, T)> = order
        .iter()
        .map(|&a| {
            let vals: Vec<T> = samples.iter().filter(|s| s.abscissa == a).map(|s| s.value).collect();
            (a, pairwise_sum(&vals) / T::from_usize_(vals.len()))
        })
        .collect();
    let mut fit = scaling_fit(&points)?;
    fit.seeds = samples.iter().map(|s| s.seed).collect::<BTreeSet<_>>().into_iter().collect();
    fit.samples = samples.to_vec();
    Ok(fit)
}

fn comment_block(comments: &[String]) -> String {
    comments.iter().map(|c| format!("# {c}\n")).collect()
}

/// `abscissa,seed,value` rows, one per sample.
pub fn scaling_csv<T: Real>(fit: &ScalingResult<T>, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    out.push_str("abscissa,seed,value\n");
    for s in &fit.samples {
        out.push_str(&format!("{},{},{}\n", format_f64(s.abscissa.f64()), s.seed, format_f64(s.value.f64())));
    }
    out
}

/// `radius,sup_disc` rows.
pub fn discrepancy_csv<T: Real>(report: &DiscrepancyReport<T>, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    out.push_str("radius,sup_disc\n");
    for (r, v) in report.radii.iter().zip(&report.sup) {
        out.push_str(&format!("{},{}\n", format_f64(r.f64()), format_f64(v.f64())));
    }
    out
}
