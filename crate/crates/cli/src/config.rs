//! Plain-text configuration: `key = value` pairs from a file, with
//! command-line flags overriding file values. Unknown keys and
//! out-of-range values are rejected with the offending source location.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use seeplab_core::profile::BumpShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Dipole,
    Drainage,
    FloodDrain,
    Eigen,
    Sweep,
    ValidateSimilarity,
    Analyze,
}

impl Problem {
    pub fn parse(name: &str) -> Option<Problem> {
        Some(match name {
            "dipole" => Problem::Dipole,
            "drainage" => Problem::Drainage,
            "flood-drain" => Problem::FloodDrain,
            "eigen" => Problem::Eigen,
            "sweep" => Problem::Sweep,
            "validate-similarity" => Problem::ValidateSimilarity,
            "analyze" => Problem::Analyze,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Problem::Dipole => "dipole",
            Problem::Drainage => "drainage",
            Problem::FloodDrain => "flood-drain",
            Problem::Eigen => "eigen",
            Problem::Sweep => "sweep",
            Problem::ValidateSimilarity => "validate-similarity",
            Problem::Analyze => "analyze",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxUnits {
    /// `q = ∂x h²` at the front.
    Normalized,
    /// Physical discharge; converted via `q / (m κ₁)`.
    Physical,
}

/// Configuration error with a source location.
#[derive(Debug, Clone)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: Problem,
    pub ratio: f64,
    pub kappa1: f64,
    pub porosity: f64,
    pub grid_n: usize,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub t_switch: f64,
    pub series_len: usize,
    pub snapshots: Vec<f64>,
    pub flux: f64,
    pub flux_units: FluxUnits,
    pub beta: f64,
    pub ratios: Vec<f64>,
    pub ic: BumpShape,
    pub amplitude: f64,
    pub width: f64,
    pub offset: f64,
    pub domain_length: f64,
    pub eps_tip: f64,
    pub ode_step: f64,
    pub tol: f64,
    pub out: PathBuf,
}

impl RunConfig {
    /// Normalized drainage flux after unit conversion.
    pub fn normalized_flux(&self) -> f64 {
        match self.flux_units {
            FluxUnits::Normalized => self.flux,
            FluxUnits::Physical => self.flux / (self.porosity * self.kappa1),
        }
    }
}

/// One key-value assignment with where it came from, for diagnostics.
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: String,
}

/// Keys accepted for each problem; the config echo emits exactly these.
fn allowed_keys(problem: Problem) -> &'static [&'static str] {
    const COMMON: &[&str] = &["out"];
    match problem {
        Problem::Dipole => &[
            "out", "ratio", "kappa1", "delta", "porosity", "grid_n", "cfl", "dt_max", "t_start",
            "t_end", "series_len", "snapshots", "ic", "amplitude", "width",
        ],
        Problem::Drainage => &[
            "out", "ratio", "kappa1", "delta", "porosity", "grid_n", "cfl", "dt_max", "t_start",
            "t_end", "series_len", "snapshots", "ic", "amplitude", "width", "offset",
            "domain_length", "flux", "flux_units",
        ],
        Problem::FloodDrain => &[
            "out", "ratio", "kappa1", "delta", "porosity", "grid_n", "cfl", "dt_max", "t_start",
            "t_end", "t_switch", "series_len", "snapshots", "ic", "amplitude", "width",
            "domain_length", "flux",
        ],
        Problem::Eigen => &["out", "ratio", "eps_tip", "ode_step", "tol"],
        Problem::Sweep => &[
            "out", "ratios", "grid_n", "cfl", "t_start", "t_end", "series_len", "ic", "amplitude",
            "width", "tol",
        ],
        Problem::ValidateSimilarity => &[
            "out", "beta", "grid_n", "cfl", "dt_max", "t_start", "t_end", "series_len",
            "snapshots", "domain_length", "eps_tip", "ode_step",
        ],
        Problem::Analyze => COMMON,
    }
}

/// Splits raw command-line words after the subcommand into `--key value`
/// assignments.
pub fn parse_flags(args: &[String]) -> Result<Vec<(String, String, String)>, ConfigError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let flag = &args[i];
        let Some(name) = flag.strip_prefix("--") else {
            return Err(err(format!("expected a --flag, got '{flag}'")));
        };
        let (key_part, value) = match name.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                i += 1;
                let v = args
                    .get(i)
                    .ok_or_else(|| err(format!("flag --{name} is missing a value")))?;
                (name.to_string(), v.clone())
            }
        };
        out.push((
            key_part.replace('-', "_"),
            value,
            format!("flag --{key_part}"),
        ));
        i += 1;
    }
    Ok(out)
}

/// Reads `key = value` lines from a config file. `#` starts a comment;
/// blank lines are skipped.
pub fn parse_file(path: &Path) -> Result<Vec<(String, String, String)>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| err(format!("cannot read config file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(format!(
                "{}:{}: expected 'key = value', got '{raw}'",
                path.display(),
                idx + 1
            )));
        };
        out.push((
            key.trim().to_string(),
            value.trim().to_string(),
            format!("{}:{}", path.display(), idx + 1),
        ));
    }
    Ok(out)
}

struct Resolver {
    entries: BTreeMap<String, Entry>,
}

impl Resolver {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(e) => e
                .value
                .parse::<f64>()
                .map_err(|_| err(format!("{}: '{}' is not a number for {key}", e.origin, e.value))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        match self.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse::<usize>().map_err(|_| {
                err(format!(
                    "{}: '{}' is not a nonnegative integer for {key}",
                    e.origin, e.value
                ))
            }),
        }
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(e) => {
                if e.value.trim().is_empty() {
                    return Ok(Vec::new());
                }
                e.value
                    .split(',')
                    .map(|p| {
                        p.trim().parse::<f64>().map_err(|_| {
                            err(format!(
                                "{}: '{}' in {key} is not a number",
                                e.origin,
                                p.trim()
                            ))
                        })
                    })
                    .collect()
            }
        }
    }
}

/// Resolves a problem plus raw assignments (file entries first, then
/// flags, which win) into a validated configuration with defaults
/// applied.
pub fn resolve(
    problem: Problem,
    assignments: Vec<(String, String, String)>,
) -> Result<RunConfig, ConfigError> {
    let allowed = allowed_keys(problem);
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    for (key, value, origin) in assignments {
        if key == "problem" {
            let stated = Problem::parse(&value)
                .ok_or_else(|| err(format!("{origin}: unknown problem '{value}'")))?;
            if stated != problem {
                return Err(err(format!(
                    "{origin}: config is for problem '{}' but '{}' was invoked",
                    value,
                    problem.name()
                )));
            }
            continue;
        }
        if !allowed.contains(&key.as_str()) {
            return Err(err(format!(
                "{origin}: unknown key '{key}' for problem '{}'",
                problem.name()
            )));
        }
        entries.insert(key, Entry { value, origin });
    }
    let r = Resolver { entries };

    // physical parameters: either ratio, or kappa1 + delta
    let has_ratio = r.get("ratio").is_some();
    let has_delta = r.get("delta").is_some();
    if has_ratio && has_delta {
        return Err(err(
            "give either ratio or delta, not both (ratio = 1 - delta)".to_string(),
        ));
    }
    let ratio = if has_delta {
        1.0 - r.f64_or("delta", 0.0)?
    } else {
        r.f64_or("ratio", 1.0)?
    };
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(err(format!("ratio must lie in (0, 1], got {ratio}")));
    }
    let kappa1 = r.f64_or("kappa1", 1.0)?;
    if !(kappa1 > 0.0) {
        return Err(err(format!("kappa1 must be positive, got {kappa1}")));
    }
    let porosity = r.f64_or("porosity", 1.0)?;
    if !(porosity > 0.0 && porosity <= 1.0) {
        return Err(err(format!("porosity must lie in (0, 1], got {porosity}")));
    }

    let (grid_default, t_start_d, t_end_d, domain_d) = match problem {
        Problem::Dipole | Problem::Sweep => (400, 0.1, 100.0, 4.0),
        Problem::Drainage => (801, 0.0, 10.0, 4.0),
        Problem::FloodDrain => (801, 0.0, 100.0, 4.0),
        Problem::ValidateSimilarity => (1601, 1.0, 10.0, 2.0),
        Problem::Eigen | Problem::Analyze => (400, 0.1, 100.0, 4.0),
    };

    let grid_n = r.usize_or("grid_n", grid_default)?;
    if grid_n < 8 {
        return Err(err(format!("grid_n must be at least 8, got {grid_n}")));
    }
    let cfl = r.f64_or("cfl", 0.25)?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(err(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let dt_max = r.f64_or("dt_max", 0.01)?;
    if !(dt_max > 0.0) {
        return Err(err(format!("dt_max must be positive, got {dt_max}")));
    }
    let t_start = r.f64_or("t_start", t_start_d)?;
    let t_end = r.f64_or("t_end", t_end_d)?;
    if !(t_end >= t_start) || !t_start.is_finite() || !t_end.is_finite() {
        return Err(err(format!(
            "need finite t_start <= t_end, got {t_start}, {t_end}"
        )));
    }
    if t_start < 0.0 {
        return Err(err(format!("t_start must be nonnegative, got {t_start}")));
    }
    let t_switch = r.f64_or("t_switch", 1.0)?;
    if problem == Problem::FloodDrain && !(t_start <= t_switch && t_switch < t_end) {
        return Err(err(format!(
            "need t_start <= t_switch < t_end, got {t_start}, {t_switch}, {t_end}"
        )));
    }
    let series_len = r.usize_or("series_len", 400)?;
    let snapshots = {
        let default: &[f64] = match problem {
            Problem::ValidateSimilarity => &[2.0, 5.0, 10.0],
            _ => &[],
        };
        let v = r.list_or("snapshots", default)?;
        if v.iter().any(|t| !t.is_finite()) {
            return Err(err("snapshot times must be finite".to_string()));
        }
        v
    };

    let flux = r.f64_or("flux", match problem {
        Problem::FloodDrain => 2.0,
        _ => 0.0,
    })?;
    if !(flux >= 0.0) {
        return Err(err(format!("flux must be nonnegative, got {flux}")));
    }
    let flux_units = match r.get("flux_units") {
        None => FluxUnits::Normalized,
        Some(e) => match e.value.as_str() {
            "normalized" => FluxUnits::Normalized,
            "physical" => FluxUnits::Physical,
            other => {
                return Err(err(format!(
                    "{}: flux_units must be 'normalized' or 'physical', got '{other}'",
                    e.origin
                )))
            }
        },
    };

    let beta = r.f64_or("beta", 0.2)?;
    if problem == Problem::ValidateSimilarity && !(beta > 0.0 && beta < 0.25) {
        return Err(err(format!(
            "validate-similarity needs beta in (0, 0.25), got {beta}"
        )));
    }

    let ratios = r.list_or("ratios", &[1.0, 0.7, 0.5, 0.3])?;
    if problem == Problem::Sweep {
        if ratios.is_empty() {
            return Err(err("sweep needs at least one ratio".to_string()));
        }
        for &x in &ratios {
            if !(x > 0.0 && x <= 1.0) {
                return Err(err(format!("sweep ratio must lie in (0, 1], got {x}")));
            }
        }
    }

    let ic = match r.get("ic") {
        None => BumpShape::Parabolic,
        Some(e) => match e.value.as_str() {
            "parabolic" => BumpShape::Parabolic,
            "cosine" => BumpShape::Cosine,
            other => {
                return Err(err(format!(
                    "{}: ic must be 'parabolic' or 'cosine', got '{other}'",
                    e.origin
                )))
            }
        },
    };
    let amplitude = r.f64_or("amplitude", 1.0)?;
    if !(amplitude >= 0.0) {
        return Err(err(format!("amplitude must be nonnegative, got {amplitude}")));
    }
    let width = r.f64_or("width", 1.0)?;
    if !(width > 0.0) {
        return Err(err(format!("width must be positive, got {width}")));
    }
    let offset = r.f64_or("offset", match problem {
        Problem::Drainage => 1.0,
        _ => 0.0,
    })?;
    if !(offset >= 0.0) {
        return Err(err(format!("offset must be nonnegative, got {offset}")));
    }
    let domain_length = r.f64_or("domain_length", domain_d)?;
    if !(domain_length > 0.0) {
        return Err(err(format!(
            "domain_length must be positive, got {domain_length}"
        )));
    }

    let eps_tip = r.f64_or("eps_tip", 1e-6)?;
    if !(eps_tip > 0.0 && eps_tip < 1.0) {
        return Err(err(format!("eps_tip must lie in (0, 1), got {eps_tip}")));
    }
    let ode_step = r.f64_or("ode_step", 1e-4)?;
    if !(ode_step > 0.0 && ode_step < 1.0) {
        return Err(err(format!("ode_step must lie in (0, 1), got {ode_step}")));
    }
    let tol = r.f64_or("tol", 1e-6)?;
    if !(tol > 0.0) {
        return Err(err(format!("tol must be positive, got {tol}")));
    }

    let out = PathBuf::from(
        r.get("out")
            .map(|e| e.value.clone())
            .unwrap_or_else(|| "out".to_string()),
    );

    Ok(RunConfig {
        problem,
        ratio,
        kappa1,
        porosity,
        grid_n,
        cfl,
        dt_max,
        t_start,
        t_end,
        t_switch,
        series_len,
        snapshots,
        flux,
        flux_units,
        beta,
        ratios,
        ic,
        amplitude,
        width,
        offset,
        domain_length,
        eps_tip,
        ode_step,
        tol,
        out,
    })
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl RunConfig {
    /// Resolved configuration echo: exactly the keys this problem
    /// accepts, in a stable order, re-parseable by [`resolve`].
    pub fn echo_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs: Vec<(&'static str, String)> = vec![("problem", self.problem.name().into())];
        for &key in allowed_keys(self.problem) {
            let value = match key {
                "out" => self.out.display().to_string(),
                "ratio" => self.ratio.to_string(),
                "kappa1" => self.kappa1.to_string(),
                "delta" => continue, // folded into ratio
                "porosity" => self.porosity.to_string(),
                "grid_n" => self.grid_n.to_string(),
                "cfl" => self.cfl.to_string(),
                "dt_max" => self.dt_max.to_string(),
                "t_start" => self.t_start.to_string(),
                "t_end" => self.t_end.to_string(),
                "t_switch" => self.t_switch.to_string(),
                "series_len" => self.series_len.to_string(),
                "snapshots" => join(&self.snapshots),
                "flux" => self.flux.to_string(),
                "flux_units" => match self.flux_units {
                    FluxUnits::Normalized => "normalized".into(),
                    FluxUnits::Physical => "physical".into(),
                },
                "beta" => self.beta.to_string(),
                "ratios" => join(&self.ratios),
                "ic" => match self.ic {
                    BumpShape::Parabolic => "parabolic".into(),
                    BumpShape::Cosine => "cosine".into(),
                },
                "amplitude" => self.amplitude.to_string(),
                "width" => self.width.to_string(),
                "offset" => self.offset.to_string(),
                "domain_length" => self.domain_length.to_string(),
                "eps_tip" => self.eps_tip.to_string(),
                "ode_step" => self.ode_step.to_string(),
                "tol" => self.tol.to_string(),
                other => unreachable!("unhandled echo key {other}"),
            };
            pairs.push((key, value));
        }
        pairs
    }
}
