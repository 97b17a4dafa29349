//! Experiment configuration: flags mirrored by an optional JSON file, flags
//! winning. Validation turns a config into a [`Plan`] or a list of
//! field-level violations.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use sobolev_quad::analysis::WceMethod;
use sobolev_quad::manifold::{perfect_root, spectrum_below, ManifoldKind};
use sobolev_quad::pointsets::{read_json, Family};
use sobolev_quad::{ManifoldSpec, PointSet64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Gen,
    Wce,
    Disc,
    Rule,
    Qnorm,
    Bound,
    Transfer,
    Perturb,
    Scale,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Gen => "gen",
            Task::Wce => "wce",
            Task::Disc => "disc",
            Task::Rule => "rule",
            Task::Qnorm => "qnorm",
            Task::Bound => "bound",
            Task::Transfer => "transfer",
            Task::Perturb => "perturb",
            Task::Scale => "scale",
        }
    }
}

/// Every knob of every task. Unset fields fall back to per-task defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Set from the subcommand; a config file may name it too.
    #[arg(skip)]
    pub task: Option<Task>,
    /// `torus:1`, `torus:2`, `torus:3` or `sphere:2`.
    #[arg(long)]
    pub manifold: Option<String>,
    /// lattice, random, jittered, fibonacci, lps_orbit; `exact_rule` for scale.
    #[arg(long)]
    pub family: Option<String>,
    /// Node counts N.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long)]
    pub word_length: Option<usize>,
    /// Base point of an lps_orbit.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub base: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of seeds, `seed..seed+seeds`.
    #[arg(long)]
    pub seeds: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Norm exponent, `inf` allowed.
    #[arg(long, value_parser = parse_q)]
    #[serde(serialize_with = "ser_q", deserialize_with = "de_q")]
    pub q: Option<f64>,
    /// Spectral bands.
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    /// Squared spectral bands.
    #[arg(long, value_delimiter = ',')]
    pub r2: Vec<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// spectral, kernel, heat or all.
    #[arg(long)]
    pub method: Option<String>,
    /// Grid points for qnorm.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Quasi-uniform discrepancy centers.
    #[arg(long)]
    pub centers: Option<usize>,
    /// Number of radii (or kernel levels) for disc.
    #[arg(long)]
    pub radii: Option<usize>,
    /// `caps` or `levelsets`.
    #[arg(long)]
    pub sets: Option<String>,
    /// Candidate budget for exact rules.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Energy descent steps applied after generation.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Input point set (JSON).
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Artifact path; `.csv` selects CSV where a task supports it.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_q(s: &str) -> Result<f64, String> {
    match s {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        _ => s.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn ser_q<S: Serializer>(q: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(v) if v.is_infinite() => s.serialize_str("inf"),
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

fn de_q<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Q {
        Num(f64),
        Text(String),
    }
    match Option::<Q>::deserialize(d)? {
        None => Ok(None),
        Some(Q::Num(v)) => Ok(Some(v)),
        Some(Q::Text(t)) => parse_q(&t).map(Some).map_err(serde::de::Error::custom),
    }
}

macro_rules! overlay {
    ($dst:ident, $src:ident; opt: $($o:ident),*; vec: $($v:ident),*) => {
        $(if $src.$o.is_some() { $dst.$o = $src.$o.clone(); })*
        $(if !$src.$v.is_empty() { $dst.$v = $src.$v.clone(); })*
    };
}

impl ExperimentConfig {
    /// Reads a JSON config file.
    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("config: cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("config: {e}"))
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overridden_by(mut self, flags: &Self) -> Self {
        let dst = &mut self;
        overlay!(dst, flags;
            opt: task, manifold, family, word_length, seed, seeds, alpha, beta, q, tol, method,
                grid, centers, radii, sets, budget, steps, input, out;
            vec: n, base, r, r2);
        self
    }

    /// sha256 of the config with paths removed, followed by the digest of
    /// the input file, so the hash does not depend on where files live.
    pub fn hash(&self, input_digest: Option<&str>) -> String {
        let mut c = self.clone();
        c.input = None;
        c.out = None;
        let canonical = serde_json::to_string(&c).expect("config serializes");
        let mut h = Sha256::new();
        h.update(canonical.as_bytes());
        if let Some(d) = input_digest {
            h.update(b"\n");
            h.update(d.as_bytes());
        }
        hex(&h.finalize())
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Where the point set of an analysis task comes from.
#[derive(Debug, Clone)]
pub enum Source {
    File { points: PointSet64, digest: String },
    Generated { manifold: ManifoldSpec, family: Family, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sets {
    Caps,
    LevelSets,
}

/// A validated config with every default resolved.
#[derive(Debug, Clone)]
pub struct Plan {
    pub task: Task,
    pub config: ExperimentConfig,
    pub manifold: ManifoldSpec,
    pub source: Option<Source>,
    pub family: Option<String>,
    pub ns: Vec<usize>,
    pub base: [f64; 3],
    pub bands: Vec<f64>,
    pub seed: u64,
    pub seeds: u64,
    pub alpha: f64,
    pub beta: f64,
    pub q: f64,
    pub tol: f64,
    pub methods: Vec<WceMethod>,
    pub grid: usize,
    pub centers: usize,
    pub radii: usize,
    pub sets: Sets,
    pub budget: Option<usize>,
    pub steps: usize,
    pub out: Option<PathBuf>,
    pub csv: bool,
    pub config_hash: String,
}

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_GRID: usize = 4096;
pub const DEFAULT_CENTERS: usize = 256;
pub const DEFAULT_RADII: usize = 16;
/// Base point of an lps orbit, `(1, √2, √3)/√6`. Rational base points can
/// land on coinciding words since the generators are rational.
pub const DEFAULT_LPS_BASE: [f64; 3] = [0.408_248_290_463_863, 0.577_350_269_189_625_8, 0.707_106_781_186_547_6];

pub fn parse_manifold(s: &str) -> Result<ManifoldSpec, String> {
    let (kind, dim) = s.split_once(':').unwrap_or((s, if s == "sphere" { "2" } else { "" }));
    let dim: usize = dim.parse().map_err(|_| format!("manifold must look like torus:2 or sphere:2, got {s:?}"))?;
    let kind = match kind {
        "torus" => ManifoldKind::Torus,
        "sphere" => ManifoldKind::Sphere,
        _ => return Err(format!("manifold kind must be torus or sphere, got {kind:?}")),
    };
    ManifoldSpec::checked(kind, dim).map_err(|e| e.to_string())
}

struct Check {
    errs: Vec<String>,
}

impl Check {
    fn fail(&mut self, field: &str, msg: impl std::fmt::Display) {
        self.errs.push(format!("{field}: {msg}"));
    }
}

fn needs(task: Task, field: &str) -> bool {
    use Task::*;
    match field {
        "alpha" => !matches!(task, Gen | Rule | Disc),
        "beta" => matches!(task, Transfer | Perturb),
        "band" => matches!(task, Rule | Perturb),
        "source" => matches!(task, Wce | Disc | Qnorm | Bound | Transfer),
        _ => false,
    }
}

pub fn validate(cfg: &ExperimentConfig) -> Result<Plan, Vec<String>> {
    let mut c = Check { errs: Vec::new() };
    let Some(task) = cfg.task else {
        return Err(vec!["task: no task given".into()]);
    };
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol < 1.0) {
        c.fail("tol", format!("tol must lie in (0, 1), got {tol}"));
    }
    let seed = cfg.seed.unwrap_or(0);
    let seeds = cfg.seeds.unwrap_or(1);
    if seeds == 0 {
        c.fail("seeds", "seeds must be at least 1");
    }
    if seeds > 1 && task != Task::Scale {
        c.fail("seeds", "several seeds are only used by scale");
    }

    // the input file, if any, fixes the manifold
    let mut source = None;
    let mut manifold = None;
    if let Some(path) = &cfg.input {
        if !matches!(task, Task::Wce | Task::Disc | Task::Qnorm | Task::Bound | Task::Transfer | Task::Perturb) {
            c.fail("in", format!("{} does not read a point set", task.name()));
        }
        match fs::read(path) {
            Err(e) => c.fail("in", format!("cannot read {}: {e}", path.display())),
            Ok(bytes) => match read_json::<f64, _>(bytes.as_slice()) {
                Err(e) => c.fail("in", format!("{}: {e}", path.display())),
                Ok(points) => {
                    manifold = Some(points.manifold);
                    if let Some(s) = &cfg.manifold {
                        if parse_manifold(s).ok() != Some(points.manifold) {
                            c.fail("manifold", format!("{s} disagrees with the input file ({})", points.manifold));
                        }
                    }
                    source = Some(Source::File { points, digest: hex(&Sha256::digest(&bytes)) });
                }
            },
        }
    }
    if manifold.is_none() {
        match cfg.manifold.as_deref().map(parse_manifold) {
            Some(Ok(m)) => manifold = Some(m),
            Some(Err(e)) => c.fail("manifold", e),
            None if cfg.input.is_none() => c.fail("manifold", "manifold is required (e.g. torus:2, sphere:2)"),
            None => {}
        }
    }
    let Some(m) = manifold else {
        return Err(c.errs);
    };
    let d = m.dim as f64;

    let alpha = cfg.alpha.unwrap_or(f64::NAN);
    let alpha_used = needs(task, "alpha")
        || (task == Task::Gen && cfg.steps.unwrap_or(0) > 0)
        || (task == Task::Disc && cfg.sets.as_deref() == Some("levelsets"));
    if alpha_used {
        match cfg.alpha {
            None => c.fail("alpha", "alpha is required"),
            Some(a) if !(a > d / 2.0) && task != Task::Qnorm && task != Task::Disc => {
                c.fail("alpha", format!("alpha must exceed d/2 = {}", d / 2.0))
            }
            Some(a) if !a.is_finite() || a > 50.0 => c.fail("alpha", format!("alpha must be at most 50, got {a}")),
            _ => {}
        }
    }
    let beta = cfg.beta.unwrap_or(f64::NAN);
    if needs(task, "beta") {
        match cfg.beta {
            None => c.fail("beta", "beta is required"),
            Some(b) if !(b > d / 2.0) => c.fail("beta", format!("beta must exceed d/2 = {}", d / 2.0)),
            Some(b) if task == Task::Transfer && alpha.is_finite() && b > alpha => {
                c.fail("beta", format!("beta must not exceed alpha = {alpha}"))
            }
            Some(b) if task == Task::Perturb && alpha.is_finite() && b <= alpha => {
                c.fail("beta", format!("beta must exceed alpha = {alpha}"))
            }
            Some(b) if b > 50.0 => c.fail("beta", format!("beta must be at most 50, got {b}")),
            _ => {}
        }
    }

    // bands from --r or --r2
    if !cfg.r.is_empty() && !cfg.r2.is_empty() {
        c.fail("r", "give either r or r2, not both");
    }
    let bands: Vec<f64> = if cfg.r2.is_empty() { cfg.r.clone() } else { cfg.r2.iter().map(|v| v.sqrt()).collect() };
    if bands.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        c.fail("r", "bands must be positive and finite");
    }
    let band_field = if cfg.r2.is_empty() { "r" } else { "r2" };
    if needs(task, "band") && bands.len() != 1 {
        c.fail(band_field, format!("{} needs exactly one band, got {}", task.name(), bands.len()));
    }

    // point families
    let family = cfg.family.clone();
    let ns = cfg.n.clone();
    let generated = matches!(task, Task::Gen | Task::Scale) || (needs(task, "source") && cfg.input.is_none());
    if needs(task, "source") && cfg.input.is_none() && cfg.family.is_none() {
        c.fail("in", format!("{} needs --in or a --family to generate", task.name()));
    }
    if generated {
        check_family(&mut c, task, &m, cfg, &bands);
    }
    if task == Task::Gen && cfg.family.as_deref() != Some("lps_orbit") && ns.len() != 1 {
        c.fail("n", format!("gen needs exactly one N, got {}", ns.len()));
    }
    if needs(task, "source") && cfg.input.is_none() && cfg.family.is_some() && ns.len() > 1 {
        c.fail("n", "only scale takes a list of N");
    }
    if task == Task::Scale {
        let points = if family.as_deref() == Some("exact_rule") { bands.len() } else { ns.len() };
        if points < 3 {
            c.fail(if family.as_deref() == Some("exact_rule") { band_field } else { "n" }, "scale needs at least 3 abscissae");
        }
    }
    let base = if cfg.base.is_empty() { DEFAULT_LPS_BASE.to_vec() } else { cfg.base.clone() };
    if base.len() != 3 {
        c.fail("base", format!("base needs 3 coordinates, got {}", base.len()));
    }
    if source.is_none() && needs(task, "source") && c.errs.is_empty() {
        let fam = make_family(family.as_deref().unwrap_or(""), ns.first().copied().unwrap_or(0), &m, cfg, &base);
        source = Some(Source::Generated { manifold: m, family: fam, seed });
    }

    let q = cfg.q.unwrap_or(2.0);
    if task == Task::Qnorm {
        if !(q >= 1.0) {
            c.fail("q", format!("q must lie in [1, inf], got {q}"));
        } else if alpha.is_finite() {
            let need = if q.is_infinite() { d } else { d * (1.0 - 1.0 / q) };
            if !(alpha > need) {
                c.fail("alpha", format!("alpha must exceed d(1 - 1/q) = {need}"));
            }
            if m.is_torus() && !(alpha > d) {
                c.fail("alpha", format!("on the torus qnorm needs alpha > d = {d}"));
            }
        }
    }

    let methods = match cfg.method.as_deref() {
        None => vec![WceMethod::Kernel],
        Some("all") if task == Task::Wce => WceMethod::ALL.to_vec(),
        Some(s) => match s.parse::<WceMethod>() {
            Ok(x) => vec![x],
            Err(_) => {
                c.fail("method", format!("method must be spectral, kernel, heat{}, got {s:?}", if task == Task::Wce { " or all" } else { "" }));
                Vec::new()
            }
        },
    };
    if cfg.method.is_some() && !matches!(task, Task::Wce | Task::Scale) {
        c.fail("method", format!("{} has no method choice", task.name()));
    }

    let grid = cfg.grid.unwrap_or(DEFAULT_GRID);
    if task == Task::Qnorm {
        if grid < 16 {
            c.fail("grid", "grid must have at least 16 points");
        } else if m.is_torus() && perfect_root(grid, m.dim).is_none() {
            c.fail("grid", "grid must be a perfect d-th power on the torus");
        }
    }
    let centers = cfg.centers.unwrap_or(DEFAULT_CENTERS);
    let radii = cfg.radii.unwrap_or(DEFAULT_RADII);
    if task == Task::Disc && (centers == 0 || radii == 0) {
        c.fail(if centers == 0 { "centers" } else { "radii" }, "must be at least 1");
    }
    let sets = match cfg.sets.as_deref() {
        None | Some("caps") => Sets::Caps,
        Some("levelsets") => {
            if !m.is_sphere() {
                c.fail("sets", "levelsets are only available on the sphere");
            }
            Sets::LevelSets
        }
        Some(s) => {
            c.fail("sets", format!("sets must be caps or levelsets, got {s:?}"));
            Sets::Caps
        }
    };
    if task == Task::Disc && sets == Sets::LevelSets && !(alpha > 0.0) {
        c.fail("alpha", "levelsets need a positive alpha");
    }
    let steps = cfg.steps.unwrap_or(0);
    if steps > 0 && task != Task::Gen {
        c.fail("steps", "energy descent runs only in gen");
    }
    if steps > 0 && !(2.0 * alpha > d) {
        c.fail("alpha", format!("energy descent needs alpha > d/2 = {}", d / 2.0));
    }
    if task == Task::Bound && !m.is_torus() {
        c.fail("manifold", "bound is implemented on the torus only");
    }
    if let (Some(b), true) = (cfg.budget, matches!(task, Task::Rule | Task::Perturb | Task::Scale)) {
        for &r in &bands {
            if let Ok(s) = spectrum_below(&m, r) {
                if b < 4 * s.basis_size {
                    c.fail("budget", format!("budget must be at least 4 × basis size = {}", 4 * s.basis_size));
                    break;
                }
            }
        }
    }

    let out = cfg.out.clone();
    let csv = out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    if csv && !matches!(task, Task::Gen | Task::Disc | Task::Scale) {
        c.fail("out", format!("{} writes JSON only", task.name()));
    }
    if out.is_none() && matches!(task, Task::Gen | Task::Rule) {
        c.fail("out", format!("{} needs an output path", task.name()));
    }

    if !c.errs.is_empty() {
        return Err(c.errs);
    }
    let digest = match &source {
        Some(Source::File { digest, .. }) => Some(digest.clone()),
        _ => None,
    };
    let mut canonical = cfg.clone();
    canonical.task = Some(task);
    let config_hash = canonical.hash(digest.as_deref());
    Ok(Plan {
        task,
        config: canonical,
        manifold: m,
        source,
        family,
        ns,
        base: [base[0], base[1], base[2]],
        bands,
        seed,
        seeds,
        alpha,
        beta,
        q,
        tol,
        methods,
        grid,
        centers,
        radii,
        sets,
        budget: cfg.budget,
        steps,
        out,
        csv,
        config_hash,
    })
}

fn check_family(c: &mut Check, task: Task, m: &ManifoldSpec, cfg: &ExperimentConfig, bands: &[f64]) {
    let Some(f) = cfg.family.as_deref() else {
        c.fail("family", "family is required");
        return;
    };
    match f {
        "lattice" | "random" | "jittered" | "fibonacci" => {
            if cfg.n.is_empty() {
                c.fail("n", "n is required");
            }
            if cfg.n.contains(&0) {
                c.fail("n", "N must be at least 1");
            }
            if f == "lattice" && !m.is_torus() {
                c.fail("family", "lattice lives on the torus only");
            }
            if f == "fibonacci" && !m.is_sphere() {
                c.fail("family", "fibonacci lives on the sphere only");
            }
            if (f == "lattice" || f == "jittered") && m.is_torus() && cfg.n.iter().any(|&n| n > 0 && perfect_root(n, m.dim).is_none()) {
                c.fail("n", "N must be a perfect d-th power");
            }
            if cfg.n.iter().any(|&n| n > 1 << 20) {
                c.fail("n", "N must be at most 2^20");
            }
        }
        "lps_orbit" => {
            if !m.is_sphere() {
                c.fail("family", "lps_orbit lives on the sphere only");
            }
            if task == Task::Scale {
                c.fail("family", "scale over lps orbits is not supported; run wce per word length");
            }
            match cfg.word_length {
                None => c.fail("word_length", "lps_orbit needs word_length"),
                Some(w) if w > 8 => c.fail("word_length", "word_length must be at most 8"),
                _ => {}
            }
        }
        "exact_rule" if task == Task::Scale => {
            if bands.is_empty() {
                c.fail("r", "exact_rule scaling needs bands");
            }
        }
        _ => c.fail("family", format!("unknown family {f:?}")),
    }
}

/// The library family for a validated config and one N.
pub fn make_family(name: &str, n: usize, m: &ManifoldSpec, cfg: &ExperimentConfig, base: &[f64]) -> Family {
    match name {
        "lattice" => Family::Lattice { n: perfect_root(n, m.dim).unwrap_or(0) },
        "random" => Family::Random { n },
        "jittered" => Family::Jittered { n },
        "fibonacci" => Family::Fibonacci { n },
        _ => Family::LpsOrbit { base: [base[0], base[1], base[2]], word_length: cfg.word_length.unwrap_or(0) },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn violations(cfg: &ExperimentConfig) -> Vec<String> {
        validate(cfg).err().unwrap_or_default()
    }

    fn cfg(task: Task) -> ExperimentConfig {
        ExperimentConfig { task: Some(task), ..Default::default() }
    }

    #[test]
    fn small_alpha_is_reported() {
        let mut c = cfg(Task::Wce);
        c.manifold = Some("torus:1".into());
        c.family = Some("random".into());
        c.n = vec![8];
        c.alpha = Some(0.4);
        let v = violations(&c);
        assert_eq!(v, vec!["alpha: alpha must exceed d/2 = 0.5".to_string()]);
    }

    #[test]
    fn non_cube_partitions_are_reported() {
        let mut c = cfg(Task::Gen);
        c.manifold = Some("torus:2".into());
        c.family = Some("jittered".into());
        c.n = vec![6];
        c.out = Some("x.json".into());
        let v = violations(&c);
        assert!(v.iter().any(|s| s == "n: N must be a perfect d-th power"), "{v:?}");
    }

    #[test]
    fn well_formed_configs_pass() {
        let mut c = cfg(Task::Scale);
        c.manifold = Some("torus:2".into());
        c.family = Some("jittered".into());
        c.n = vec![16, 64, 256];
        c.alpha = Some(1.3);
        c.seeds = Some(3);
        assert!(violations(&c).is_empty(), "{:?}", violations(&c));
        let mut r = cfg(Task::Rule);
        r.manifold = Some("sphere:2".into());
        r.r2 = vec![13.0];
        r.out = Some("rule.json".into());
        assert!(violations(&r).is_empty());
    }

    #[test]
    fn flags_override_the_file() {
        let file: ExperimentConfig =
            serde_json::from_str(r#"{"manifold": "torus:1", "alpha": 1.5, "q": "inf", "n": [4, 8]}"#).unwrap();
        assert_eq!(file.q, Some(f64::INFINITY));
        let flags = ExperimentConfig { alpha: Some(2.0), n: vec![16], ..Default::default() };
        let m = file.overridden_by(&flags);
        assert_eq!(m.alpha, Some(2.0));
        assert_eq!(m.n, vec![16]);
        assert_eq!(m.manifold.as_deref(), Some("torus:1"));
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"alhpa": 1}"#).is_err());
    }

    #[test]
    fn hash_ignores_paths() {
        let mut a = cfg(Task::Wce);
        a.alpha = Some(1.5);
        let mut b = a.clone();
        b.out = Some("elsewhere.json".into());
        assert_eq!(a.hash(None), b.hash(None));
        b.alpha = Some(1.6);
        assert_ne!(a.hash(None), b.hash(None));
        assert_ne!(a.hash(None), a.hash(Some("00")));
    }

    #[test]
    fn manifold_strings() {
        assert_eq!(parse_manifold("torus:3").unwrap(), ManifoldSpec::torus(3).unwrap());
        assert_eq!(parse_manifold("sphere").unwrap(), ManifoldSpec::sphere());
        assert!(parse_manifold("sphere:3").is_err());
        assert!(parse_manifold("klein:2").is_err());
    }
}
