//! Dispatch of a validated [`Plan`] to the library, and artifact writing.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use sobolev_quad::analysis::{
    adversarial_bound, alpha_transfer_check, cap_discrepancy, discrepancy_csv, levelset_discrepancy, perturbation_experiment,
    qnorm_energy, scaling_csv, scaling_from_samples, wce, ScalingSample, WceMethod, WceReport,
};
use sobolev_quad::kernels::{BesselKernel, DEFAULT_MAX_TERMS};
use sobolev_quad::manifold::spectrum_below;
use sobolev_quad::pointsets::{generate, minimize_energy, to_json_string, write_csv, write_json, StepPolicy};
use sobolev_quad::quadrature::build_exact_rule;
use sobolev_quad::{Error, ManifoldSpec, PointSet64, VERSION};

use crate::config::{make_family, ExperimentConfig, Plan, Sets, Source, Task};

/// Failure of a run: a library diagnostic or an I/O problem.
#[derive(Debug)]
pub enum RunError {
    Library(Error),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Library(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Library(e)
    }
}

type Result<T> = std::result::Result<T, RunError>;

/// JSON report wrapper.
#[derive(Serialize)]
struct Envelope<'a, R> {
    task: &'static str,
    version: &'static str,
    config_hash: &'a str,
    config: &'a ExperimentConfig,
    report: R,
}

fn short(v: f64) -> String {
    format!("{v:.6e}")
}

/// Runs the plan and returns the one-line summary.
pub fn run(plan: &Plan) -> Result<String> {
    match plan.task {
        Task::Gen => gen(plan),
        Task::Wce => wce_task(plan),
        Task::Disc => disc(plan),
        Task::Rule => rule(plan),
        Task::Qnorm => qnorm(plan),
        Task::Bound => bound(plan),
        Task::Transfer => transfer(plan),
        Task::Perturb => perturb(plan),
        Task::Scale => scale(plan),
    }
}

fn comments(plan: &Plan) -> Vec<String> {
    vec![
        format!("task: {}", plan.task.name()),
        format!("version: {VERSION}"),
        format!("config_hash: {}", plan.config_hash),
    ]
}

fn write_file(path: &Path, text: &[u8]) -> Result<()> {
    fs::write(path, text).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))
}

fn write_report<R: Serialize>(plan: &Plan, report: R) -> Result<()> {
    let Some(out) = &plan.out else {
        return Ok(());
    };
    let mut config = plan.config.clone();
    config.input = None;
    config.out = None;
    let env = Envelope { task: plan.task.name(), version: VERSION, config_hash: &plan.config_hash, config: &config, report };
    write_file(out, to_json_string(&env)?.as_bytes())
}

fn write_points(plan: &Plan, ps: &PointSet64) -> Result<()> {
    let Some(out) = &plan.out else {
        return Ok(());
    };
    let mut ps = ps.clone();
    ps.provenance = ps.provenance.with("config_hash", plan.config_hash.as_str()).with("version", VERSION);
    let mut buf = Vec::new();
    if plan.csv {
        write_csv(&ps, &comments(plan), &mut buf)?;
    } else {
        write_json(&ps, &mut buf)?;
    }
    write_file(out, &buf)
}

fn source(plan: &Plan) -> Result<PointSet64> {
    match plan.source.as_ref().expect("validated plans carry a source") {
        Source::File { points, .. } => Ok(points.clone()),
        Source::Generated { manifold, family, seed } => Ok(generate(manifold, family, *seed)?),
    }
}

fn default_budget(m: &ManifoldSpec, r: f64, given: Option<usize>) -> Result<usize> {
    match given {
        Some(b) => Ok(b),
        None => Ok((8 * spectrum_below(m, r)?.basis_size).max(64)),
    }
}

fn gen(plan: &Plan) -> Result<String> {
    let name = plan.family.as_deref().unwrap_or("");
    let n = plan.ns.first().copied().unwrap_or(0);
    let fam = make_family(name, n, &plan.manifold, &plan.config, &plan.base);
    let mut ps = generate(&plan.manifold, &fam, plan.seed)?;
    let mut extra = String::new();
    if plan.steps > 0 {
        let trace = minimize_energy(&ps, plan.alpha, plan.steps, StepPolicy::default())?;
        let (first, last) = (trace.energies[0], *trace.energies.last().unwrap_or(&trace.energies[0]));
        extra = format!(" energy={} start_energy={} accepted={}", short(last), short(first), trace.accepted);
        ps = trace.points;
        ps.provenance = ps.provenance.with("energy_steps", plan.steps).with("alpha", plan.alpha).with("energy", last);
    }
    write_points(plan, &ps)?;
    Ok(format!("task=gen family={name} manifold={} n={}{extra}", plan.manifold, ps.len()))
}

#[derive(Serialize)]
struct WceAll {
    reports: Vec<WceReport<f64>>,
    /// Largest difference between the squared errors of two routes.
    spread_squared: f64,
}

fn wce_task(plan: &Plan) -> Result<String> {
    let ps = source(plan)?;
    let reports =
        plan.methods.iter().map(|&m| wce(&ps, plan.alpha, m, plan.tol)).collect::<std::result::Result<Vec<_>, _>>()?;
    let sq: Vec<f64> = reports.iter().map(|r| r.value_squared).collect();
    let spread = sq.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - sq.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let tail = reports.iter().fold(0.0f64, |a, r| a.max(r.tail_bound));
    let values: Vec<String> = reports.iter().map(|r| format!("{}={}", r.method.name(), short(r.value))).collect();
    let converged = reports.iter().all(|r| r.converged);
    if reports.len() == 1 {
        write_report(plan, &reports[0])?;
    } else {
        write_report(plan, WceAll { reports, spread_squared: spread })?;
    }
    let spread_note = if plan.methods.len() > 1 { format!(" spread2={}", short(spread)) } else { String::new() };
    Ok(format!(
        "task=wce alpha={} n={} {}{spread_note} tail={} converged={converged}",
        plan.alpha,
        ps.len(),
        values.join(" "),
        short(tail)
    ))
}

fn disc(plan: &Plan) -> Result<String> {
    let ps = source(plan)?;
    let m = ps.manifold;
    let k = plan.radii;
    let mut report = match plan.sets {
        Sets::Caps => {
            let radii: Vec<f64> = if m.is_sphere() {
                (1..=k).map(|i| std::f64::consts::PI * i as f64 / (k + 1) as f64).collect()
            } else {
                (1..=k).map(|i| 0.5 * i as f64 / k as f64).collect()
            };
            cap_discrepancy(&ps, plan.centers, &radii)?
        }
        Sets::LevelSets => {
            let kernel = BesselKernel::new(&m, plan.alpha, plan.tol, DEFAULT_MAX_TERMS)?;
            let mut levels = Vec::with_capacity(k);
            for i in 1..=k {
                let v = kernel.profile(std::f64::consts::PI * i as f64 / (k + 1) as f64)?.value;
                if v > 0.0 {
                    levels.push(v);
                }
            }
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            levelset_discrepancy(&ps, plan.alpha, &levels, plan.centers, plan.tol)?
        }
    };
    if let [r] = plan.bands[..] {
        report = report.with_band(&m, r);
    }
    let sup = report.sup.iter().fold(0.0f64, |a, &b| a.max(b));
    let shape = report.shape_constant.map(|c| format!(" shape_constant={}", short(c))).unwrap_or_default();
    let summary = format!("task=disc n={} centers={} max_sup={}{shape} lower_estimate=true", ps.len(), report.centers, short(sup));
    if plan.csv {
        if let Some(out) = &plan.out {
            write_file(out, discrepancy_csv(&report, &comments(plan)).as_bytes())?;
        }
    } else {
        write_report(plan, &report)?;
    }
    Ok(summary)
}

fn rule(plan: &Plan) -> Result<String> {
    let r = plan.bands[0];
    let budget = default_budget(&plan.manifold, r, plan.budget)?;
    let ps = build_exact_rule(&plan.manifold, r, budget, plan.tol, plan.seed)?;
    let residual = ps.provenance.params.get("residual").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    write_points(plan, &ps)?;
    Ok(format!("task=rule manifold={} r={} n={} residual={}", plan.manifold, r, ps.len(), short(residual)))
}

fn qnorm(plan: &Plan) -> Result<String> {
    let ps = source(plan)?;
    let rep = qnorm_energy(&ps, plan.alpha, plan.q, plan.grid, plan.tol)?;
    write_report(plan, &rep)?;
    let delta = rep.refinement_delta.map(short).unwrap_or_else(|| "none".into());
    Ok(format!(
        "task=qnorm alpha={} q={} value={} refinement_delta={delta} tail={}",
        plan.alpha,
        plan.q,
        short(rep.value),
        short(rep.kernel_bound)
    ))
}

fn bound(plan: &Plan) -> Result<String> {
    let ps = source(plan)?;
    let rep = adversarial_bound(&ps, plan.alpha, plan.seed)?;
    write_report(plan, &rep)?;
    Ok(format!(
        "task=bound alpha={} n={} lower_bound={} grid_delta={}",
        plan.alpha,
        rep.n,
        short(rep.ratio),
        short(rep.grid_delta)
    ))
}

fn transfer(plan: &Plan) -> Result<String> {
    let ps = source(plan)?;
    let rep = alpha_transfer_check(&ps, plan.alpha, plan.beta, plan.tol)?;
    write_report(plan, &rep)?;
    Ok(format!(
        "task=transfer alpha={} beta={} wce_alpha={} wce_beta={} transfer_constant={} monotone={} tail={}",
        plan.alpha,
        plan.beta,
        short(rep.wce_alpha),
        short(rep.wce_beta),
        short(rep.transfer_constant),
        rep.monotone,
        short(rep.bound_alpha.max(rep.bound_beta))
    ))
}

fn perturb(plan: &Plan) -> Result<String> {
    let r = plan.bands[0];
    let ps = match &plan.source {
        Some(Source::File { points, .. }) => points.clone(),
        _ => build_exact_rule(&plan.manifold, r, default_budget(&plan.manifold, r, plan.budget)?, plan.tol, plan.seed)?,
    };
    let rep = perturbation_experiment(&ps, plan.alpha, plan.beta, r, plan.tol)?;
    write_report(plan, &rep)?;
    Ok(format!(
        "task=perturb alpha={} beta={} r={} delta={} wce_beta={} scaled_beta={} control_scaled_beta={}",
        plan.alpha,
        plan.beta,
        r,
        short(rep.delta),
        short(rep.wce_beta),
        short(rep.scaled_beta),
        short(rep.control_scaled_beta)
    ))
}

fn scale(plan: &Plan) -> Result<String> {
    let method = plan.methods.first().copied().unwrap_or(WceMethod::Kernel);
    let rules = plan.family.as_deref() == Some("exact_rule");
    let abscissae: Vec<f64> = if rules { plan.bands.clone() } else { plan.ns.iter().map(|&n| n as f64).collect() };
    let jobs: Vec<(usize, u64)> =
        (0..abscissae.len()).flat_map(|i| (plan.seed..plan.seed + plan.seeds).map(move |s| (i, s))).collect();
    let samples = jobs
        .par_iter()
        .map(|&(i, seed)| -> Result<ScalingSample<f64>> {
            let ps = if rules {
                let r = abscissae[i];
                build_exact_rule(&plan.manifold, r, default_budget(&plan.manifold, r, plan.budget)?, plan.tol, seed)?
            } else {
                let fam = make_family(plan.family.as_deref().unwrap_or(""), plan.ns[i], &plan.manifold, &plan.config, &plan.base);
                generate(&plan.manifold, &fam, seed)?
            };
            let value = wce(&ps, plan.alpha, method, plan.tol)?.value;
            Ok(ScalingSample { abscissa: abscissae[i], seed, value })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = scaling_from_samples(&samples)?;
    if plan.csv {
        if let Some(out) = &plan.out {
            let mut c = comments(plan);
            c.push(format!("slope: {}", sobolev_quad::pointsets::format_f64(fit.slope)));
            c.push(format!("slope_se: {}", sobolev_quad::pointsets::format_f64(fit.slope_se)));
            write_file(out, scaling_csv(&fit, &c).as_bytes())?;
        }
    } else {
        write_report(plan, &fit)?;
    }
    Ok(format!(
        "task=scale family={} method={} abscissa={} slope={} slope_se={} samples={}",
        plan.family.as_deref().unwrap_or(""),
        method.name(),
        if rules { "r" } else { "N" },
        short(fit.slope),
        short(fit.slope_se),
        samples.len()
    ))
}
