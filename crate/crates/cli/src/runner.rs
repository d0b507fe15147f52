//! Experiment orchestration and result serialization.
//!
//! Every run writes three files into its output directory:
//! `series.csv` (one row per sampled instant), `snapshots.csv`
//! (profiles at the requested times), and `summary.txt` (key = value
//! result lines followed by the resolved-configuration echo). Floats
//! are printed in round-trip form, so identical configurations produce
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use seeplab_core::analysis::{
    collapse_metric, fit_powerlaw, similarity_error, PowerLawFit, WindowPolicy,
};
use seeplab_core::batch;
use seeplab_core::dipole::{run_dipole, DipoleConfig};
use seeplab_core::drainage::{
    run_drainage, run_flood_then_drain, DrainageConfig, DrainageInitial, DrainageSpec,
    FloodDrainConfig,
};
use seeplab_core::params::PhysicalParams;
use seeplab_core::profile::{InitialCondition, Profile, SeriesRecord};
use seeplab_core::similarity::{drainage_similarity_with, shoot_beta_with, EigenProblem};
use seeplab_core::SolverError;

use crate::config::{Problem, RunConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a run, mapped to the process exit code.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Instability(String),
    Convergence(String),
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Instability(_) => 3,
            RunError::Convergence(_) => 4,
            RunError::Io(_) => 2,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Instability(_) => "instability",
            RunError::Convergence(_) => "convergence",
            RunError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m)
            | RunError::Instability(m)
            | RunError::Convergence(m)
            | RunError::Io(m) => m,
        }
    }
}

impl From<SolverError> for RunError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidInput(m) => RunError::Config(m),
            SolverError::Instability { time, detail } => {
                RunError::Instability(format!("t={time} {detail}"))
            }
            SolverError::Convergence(m) => RunError::Convergence(m),
        }
    }
}

fn io_err(e: std::io::Error, what: &str) -> RunError {
    RunError::Io(format!("{what}: {e}"))
}

fn series_csv(series: &[SeriesRecord]) -> String {
    let mut s = String::from("time,x_left,x_right,max_height,mass,dipole_moment,left_flux\n");
    for r in series {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.time, r.x_left, r.x_right, r.max_height, r.mass, r.dipole_moment,
            r.left_normalized_flux
        );
    }
    s
}

fn snapshots_csv(snapshots: &[Profile]) -> String {
    let mut s = String::from("snapshot_time,x,h\n");
    for p in snapshots {
        let n = p.heights.len();
        for i in 0..n {
            let x = p.x_left + (p.x_right - p.x_left) * i as f64 / (n - 1) as f64;
            let _ = writeln!(s, "{},{},{}", p.time, x, p.heights[i]);
        }
    }
    s
}

/// Summary file: result lines first, then the resolved config echo with
/// a `config.` prefix on each key.
fn summary_txt(results: &[(String, String)], cfg: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "tool_version = {TOOL_VERSION}");
    for (k, v) in results {
        let _ = writeln!(s, "{k} = {v}");
    }
    for (k, v) in cfg.echo_pairs() {
        let _ = writeln!(s, "config.{k} = {v}");
    }
    s
}

fn write_outputs(
    dir: &Path,
    series: &[SeriesRecord],
    snapshots: &[Profile],
    results: &[(String, String)],
    cfg: &RunConfig,
) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| io_err(e, "creating output directory"))?;
    fs::write(dir.join("series.csv"), series_csv(series))
        .map_err(|e| io_err(e, "writing series.csv"))?;
    fs::write(dir.join("snapshots.csv"), snapshots_csv(snapshots))
        .map_err(|e| io_err(e, "writing snapshots.csv"))?;
    fs::write(dir.join("summary.txt"), summary_txt(results, cfg))
        .map_err(|e| io_err(e, "writing summary.txt"))?;
    Ok(())
}

fn fmt_fit(prefix: &str, fit: &PowerLawFit, results: &mut Vec<(String, String)>) {
    results.push((format!("{prefix}_exponent"), fit.exponent.to_string()));
    results.push((format!("{prefix}_prefactor"), fit.prefactor.to_string()));
    results.push((format!("{prefix}_r_squared"), fit.r_squared.to_string()));
    results.push((
        format!("{prefix}_window"),
        format!("{},{}", fit.window.0, fit.window.1),
    ));
}

fn params_of(cfg: &RunConfig) -> Result<PhysicalParams, RunError> {
    PhysicalParams::new(cfg.kappa1, 1.0 - cfg.ratio, cfg.porosity).map_err(RunError::from)
}

fn initial_of(cfg: &RunConfig) -> InitialCondition {
    match cfg.ic {
        seeplab_core::profile::BumpShape::Parabolic => {
            InitialCondition::parabolic(cfg.amplitude, cfg.width)
        }
        seeplab_core::profile::BumpShape::Cosine => {
            InitialCondition::cosine(cfg.amplitude, cfg.width)
        }
    }
}

fn eigen_problem_of(cfg: &RunConfig, ratio: f64) -> Result<EigenProblem, RunError> {
    Ok(EigenProblem::new(ratio)
        .map_err(RunError::from)?
        .with_eps_tip(cfg.eps_tip)
        .with_step(cfg.ode_step)
        .with_tol(cfg.tol))
}

fn run_dipole_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let mut dcfg = DipoleConfig::new(params_of(cfg)?);
    dcfg.initial = initial_of(cfg);
    dcfg.grid_n = cfg.grid_n;
    dcfg.cfl = cfg.cfl;
    dcfg.dt_max = cfg.dt_max;
    dcfg.t_start = cfg.t_start;
    dcfg.t_end = cfg.t_end;
    dcfg.series_len = cfg.series_len;
    dcfg.snapshot_times = cfg.snapshots.clone();
    let run = run_dipole(&dcfg)?;

    let mut results = vec![
        ("steps".to_string(), run.steps.to_string()),
        ("final_x_r".to_string(), run.final_state.x_r.to_string()),
    ];
    let xr: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.x_right)).collect();
    let hm: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.max_height)).collect();
    if let Ok(fit) = fit_powerlaw(&xr, WindowPolicy::default()) {
        results.push(("beta_from_xr".to_string(), fit.exponent.to_string()));
        fmt_fit("xr_fit", &fit, &mut results);
    }
    if let Ok(fit) = fit_powerlaw(&hm, WindowPolicy::default()) {
        results.push(("alpha_from_max".to_string(), (-fit.exponent).to_string()));
        fmt_fit("max_height_fit", &fit, &mut results);
    }
    write_outputs(&cfg.out, &run.series, &run.snapshots, &results, cfg)
}

fn drainage_config_of(cfg: &RunConfig, spec: DrainageSpec) -> Result<DrainageConfig, RunError> {
    Ok(DrainageConfig {
        domain_length: cfg.domain_length,
        grid_n: cfg.grid_n,
        cfl: cfg.cfl,
        dt_max: cfg.dt_max,
        t_start: cfg.t_start,
        t_end: cfg.t_end,
        series_len: cfg.series_len,
        snapshot_times: cfg.snapshots.clone(),
        ..DrainageConfig::new(
            params_of(cfg)?,
            spec,
            DrainageInitial::Bump {
                ic: initial_of(cfg),
                offset: cfg.offset,
            },
        )
    })
}

fn run_drainage_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let q = cfg.normalized_flux();
    let spec = if q > 0.0 {
        DrainageSpec::Constant { q }
    } else {
        DrainageSpec::Free
    };
    let run = run_drainage(&drainage_config_of(cfg, spec)?)?;
    let mut results = vec![
        ("steps".to_string(), run.steps.to_string()),
        ("normalized_flux".to_string(), q.to_string()),
        ("final_x_left".to_string(), run.final_state.x_l.to_string()),
        ("final_x_right".to_string(), run.final_state.x_r.to_string()),
    ];
    if let Some(t) = run.extinction_time {
        results.push(("extinction_time".to_string(), t.to_string()));
    }
    write_outputs(&cfg.out, &run.series, &run.snapshots, &results, cfg)
}

fn run_flood_drain_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let fd = FloodDrainConfig {
        initial: initial_of(cfg),
        domain_length: cfg.domain_length,
        grid_n: cfg.grid_n,
        cfl: cfg.cfl,
        dt_max: cfg.dt_max,
        t_start: cfg.t_start,
        t_switch: cfg.t_switch,
        t_end: cfg.t_end,
        multiplier: cfg.flux,
        series_len: cfg.series_len,
        snapshot_times: cfg.snapshots.clone(),
        ..FloodDrainConfig::new(params_of(cfg)?)
    };
    let run = run_flood_then_drain(&fd)?;
    let mut results = vec![
        ("steps".to_string(), run.steps.to_string()),
        (
            "natural_flux_at_switch".to_string(),
            run.natural_flux_at_switch.to_string(),
        ),
        ("q0".to_string(), run.q0.to_string()),
    ];
    match run.extinction_time {
        Some(t) => results.push(("extinction_time".to_string(), t.to_string())),
        None => results.push(("extinction_time".to_string(), "none".to_string())),
    }
    write_outputs(&cfg.out, &run.series, &run.snapshots, &results, cfg)
}

fn run_eigen_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let prob = eigen_problem_of(cfg, cfg.ratio)?;
    let res = shoot_beta_with(&prob)?;
    let mut results = vec![
        ("beta".to_string(), res.beta.to_string()),
        ("alpha".to_string(), res.alpha().to_string()),
        ("gamma".to_string(), res.gamma().to_string()),
        ("epsilon".to_string(), res.epsilon_exp().to_string()),
        ("residual".to_string(), res.residual.to_string()),
    ];
    match res.switch_point {
        Some(z) => results.push(("switch_point".to_string(), z.to_string())),
        None => results.push(("switch_point".to_string(), "none".to_string())),
    }
    // the profile doubles as the solution at t = 1 in normalized units
    let profile = Profile {
        x_left: 0.0,
        x_right: 1.0,
        heights: resample(&res.xi, &res.f, 401),
        time: 1.0,
    };
    write_outputs(&cfg.out, &[], &[profile], &results, cfg)
}

fn resample(xs: &[f64], ys: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let x = xs[0] + (xs[xs.len() - 1] - xs[0]) * j as f64 / (n - 1) as f64;
            let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
            let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
            ys[k - 1] + w * (ys[k] - ys[k - 1])
        })
        .collect()
}

fn run_sweep_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    fs::create_dir_all(&cfg.out).map_err(|e| io_err(e, "creating output directory"))?;
    struct Row {
        ratio: f64,
        beta_eigen: Result<f64, String>,
        beta_from_xr: Result<f64, String>,
        alpha_from_max: Result<f64, String>,
        outputs: Option<(Vec<SeriesRecord>, Vec<Profile>)>,
    }
    let rows: Vec<Row> = batch::map_collect(&cfg.ratios, |&ratio| {
        let beta_eigen = eigen_problem_of(cfg, ratio)
            .and_then(|p| shoot_beta_with(&p).map_err(RunError::from))
            .map(|r| r.beta)
            .map_err(|e| e.message().to_string());
        let run = PhysicalParams::from_ratio(ratio)
            .map_err(RunError::from)
            .and_then(|params| {
                let mut dcfg = DipoleConfig::new(params);
                dcfg.initial = initial_of(cfg);
                dcfg.grid_n = cfg.grid_n;
                dcfg.cfl = cfg.cfl;
                dcfg.t_start = cfg.t_start;
                dcfg.t_end = cfg.t_end;
                dcfg.series_len = cfg.series_len;
                run_dipole(&dcfg).map_err(RunError::from)
            });
        match run {
            Ok(run) => {
                let xr: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.x_right)).collect();
                let hm: Vec<(f64, f64)> =
                    run.series.iter().map(|r| (r.time, r.max_height)).collect();
                let beta_from_xr = fit_powerlaw(&xr, WindowPolicy::default())
                    .map(|f| f.exponent)
                    .map_err(|e| e.to_string());
                let alpha_from_max = fit_powerlaw(&hm, WindowPolicy::default())
                    .map(|f| -f.exponent)
                    .map_err(|e| e.to_string());
                Row {
                    ratio,
                    beta_eigen,
                    beta_from_xr,
                    alpha_from_max,
                    outputs: Some((run.series, run.snapshots)),
                }
            }
            Err(e) => Row {
                ratio,
                beta_eigen,
                beta_from_xr: Err(e.message().to_string()),
                alpha_from_max: Err(e.message().to_string()),
                outputs: None,
            },
        }
    });

    let mut results = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let sub = cfg.out.join(format!("ratio_{}", row.ratio));
        if let Some((series, snapshots)) = &row.outputs {
            fs::create_dir_all(&sub).map_err(|e| io_err(e, "creating sweep subdirectory"))?;
            fs::write(sub.join("series.csv"), series_csv(series))
                .map_err(|e| io_err(e, "writing sweep series.csv"))?;
            fs::write(sub.join("snapshots.csv"), snapshots_csv(snapshots))
                .map_err(|e| io_err(e, "writing sweep snapshots.csv"))?;
        }
        let fmt = |r: &Result<f64, String>| match r {
            Ok(v) => v.to_string(),
            Err(e) => format!("error({e})"),
        };
        let identity = match (&row.alpha_from_max, &row.beta_from_xr) {
            (Ok(a), Ok(b)) => (a + 2.0 * b).to_string(),
            _ => "error".to_string(),
        };
        results.push((
            format!("row_{i}"),
            format!(
                "ratio={} beta_eigen={} beta_from_xr={} alpha_from_max={} alpha_plus_2beta={}",
                row.ratio,
                fmt(&row.beta_eigen),
                fmt(&row.beta_from_xr),
                fmt(&row.alpha_from_max),
                identity
            ),
        ));
    }
    write_outputs(&cfg.out, &[], &[], &results, cfg)
}

fn run_validate_similarity_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let prob = eigen_problem_of(cfg, 1.0)?;
    let sim = drainage_similarity_with(cfg.beta, &prob)?;
    let dcfg = DrainageConfig {
        snapshot_samples: 2001,
        ..drainage_config_of(cfg, DrainageSpec::from_similarity(&sim))?
    };
    let dcfg = DrainageConfig {
        initial: DrainageInitial::Similarity(sim.clone()),
        ..dcfg
    };
    let run = run_drainage(&dcfg)?;
    let rep = similarity_error(&run, &sim);

    let mut results = vec![
        ("beta".to_string(), cfg.beta.to_string()),
        ("lambda".to_string(), sim.lambda.to_string()),
        ("flux_exponent".to_string(), sim.flux_exponent().to_string()),
        (
            "flux_coefficient".to_string(),
            sim.normalized_flux(1.0).to_string(),
        ),
        ("steps".to_string(), run.steps.to_string()),
        (
            "profile_shape_err".to_string(),
            rep.sup_h_rel_err.to_string(),
        ),
    ];
    let maxmap = |v: &[(f64, f64)]| v.iter().map(|p| p.1).fold(0.0, f64::max).to_string();
    results.push(("xl_err_max".to_string(), maxmap(&rep.xl_rel_err)));
    results.push(("xr_err_max".to_string(), maxmap(&rep.xr_rel_err)));
    results.push(("amp_err_max".to_string(), maxmap(&rep.amp_rel_err)));
    let xl: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.x_left)).collect();
    let xr: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.x_right)).collect();
    if let Ok(fit) = fit_powerlaw(&xl, WindowPolicy::default()) {
        results.push(("xl_slope".to_string(), fit.exponent.to_string()));
    }
    if let Ok(fit) = fit_powerlaw(&xr, WindowPolicy::default()) {
        results.push(("xr_slope".to_string(), fit.exponent.to_string()));
    }
    write_outputs(&cfg.out, &run.series, &run.snapshots, &results, cfg)
}

fn parse_series_csv(text: &str) -> Result<Vec<SeriesRecord>, RunError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| RunError::Config("series.csv is empty".to_string()))?;
    if header != "time,x_left,x_right,max_height,mass,dipole_moment,left_flux" {
        return Err(RunError::Config(format!(
            "series.csv has an unexpected header: {header}"
        )));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 7 {
            return Err(RunError::Config(format!(
                "series.csv line {}: expected 7 columns",
                i + 2
            )));
        }
        let f = |j: usize| -> Result<f64, RunError> {
            cols[j].parse::<f64>().map_err(|_| {
                RunError::Config(format!("series.csv line {}: bad number '{}'", i + 2, cols[j]))
            })
        };
        out.push(SeriesRecord {
            time: f(0)?,
            x_left: f(1)?,
            x_right: f(2)?,
            max_height: f(3)?,
            mass: f(4)?,
            dipole_moment: f(5)?,
            left_normalized_flux: f(6)?,
        });
    }
    Ok(out)
}

fn parse_snapshots_csv(text: &str) -> Result<Vec<Profile>, RunError> {
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(RunError::Config(format!(
                "snapshots.csv line {}: expected 3 columns",
                i + 1
            )));
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| {
                RunError::Config(format!("snapshots.csv line {}: bad number '{s}'", i + 1))
            })
        };
        rows.push((parse(cols[0])?, parse(cols[1])?, parse(cols[2])?));
    }
    let mut profiles: Vec<Profile> = Vec::new();
    for (t, x, h) in rows {
        match profiles.last_mut() {
            Some(p) if p.time == t => {
                p.x_right = x;
                p.heights.push(h);
            }
            _ => profiles.push(Profile {
                x_left: x,
                x_right: x,
                heights: vec![h],
                time: t,
            }),
        }
    }
    profiles.retain(|p| p.heights.len() >= 2 && p.x_right > p.x_left);
    Ok(profiles)
}

fn run_analyze_cmd(cfg: &RunConfig) -> Result<(), RunError> {
    let dir = &cfg.out;
    let series_text = fs::read_to_string(dir.join("series.csv"))
        .map_err(|e| io_err(e, "reading series.csv"))?;
    let series = parse_series_csv(&series_text)?;
    let mut results = Vec::new();

    let xr: Vec<(f64, f64)> = series.iter().map(|r| (r.time, r.x_right)).collect();
    let hm: Vec<(f64, f64)> = series.iter().map(|r| (r.time, r.max_height)).collect();
    match fit_powerlaw(&xr, WindowPolicy::default()) {
        Ok(fit) => {
            results.push(("beta_from_xr".to_string(), fit.exponent.to_string()));
            fmt_fit("xr_fit", &fit, &mut results);
        }
        Err(e) => results.push(("beta_from_xr".to_string(), format!("error({e})"))),
    }
    let mut alpha = None;
    match fit_powerlaw(&hm, WindowPolicy::default()) {
        Ok(fit) => {
            alpha = Some(-fit.exponent);
            results.push(("alpha_from_max".to_string(), (-fit.exponent).to_string()));
            fmt_fit("max_height_fit", &fit, &mut results);
        }
        Err(e) => results.push(("alpha_from_max".to_string(), format!("error({e})"))),
    }
    if let (Some(a), Ok(fit)) = (alpha, fit_powerlaw(&xr, WindowPolicy::default())) {
        results.push((
            "alpha_plus_2beta".to_string(),
            (a + 2.0 * fit.exponent).to_string(),
        ));
    }

    if let Ok(text) = fs::read_to_string(dir.join("snapshots.csv")) {
        let snapshots = parse_snapshots_csv(&text)?;
        if snapshots.len() >= 2 {
            if let Ok(m) = collapse_metric(&snapshots) {
                results.push(("collapse_metric".to_string(), m.to_string()));
            }
        }
    }

    let mut s = String::new();
    let _ = writeln!(s, "tool_version = {TOOL_VERSION}");
    for (k, v) in &results {
        let _ = writeln!(s, "{k} = {v}");
    }
    fs::write(dir.join("analysis.txt"), s).map_err(|e| io_err(e, "writing analysis.txt"))?;
    Ok(())
}

/// Executes a resolved configuration, writing its artifact files.
pub fn run(cfg: &RunConfig) -> Result<(), RunError> {
    match cfg.problem {
        Problem::Dipole => run_dipole_cmd(cfg),
        Problem::Drainage => run_drainage_cmd(cfg),
        Problem::FloodDrain => run_flood_drain_cmd(cfg),
        Problem::Eigen => run_eigen_cmd(cfg),
        Problem::Sweep => run_sweep_cmd(cfg),
        Problem::ValidateSimilarity => run_validate_similarity_cmd(cfg),
        Problem::Analyze => run_analyze_cmd(cfg),
    }
}
