//! Exponent extraction, collapse metrics, and the solver-versus-
//! eigenvalue comparison harness.

use crate::batch;
use crate::dipole::{run_dipole, DipoleConfig};
use crate::drainage::DrainageRun;
use crate::error::{invalid, SolverError};
use crate::params::PhysicalParams;
use crate::profile::{InitialCondition, Profile};
use crate::similarity::{shoot_beta_with, DrainageSimilarity, EigenProblem};

/// How the fitting window is chosen on the log-log graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowPolicy {
    /// Trailing run of log-time over which a sliding-window local slope
    /// stays within `slope_tol` of the final slope; falls back to the
    /// trailing half of the log-time range when that run is too short.
    Stable { slope_tol: f64 },
    /// Fixed trailing fraction of the log-time range.
    TrailingFraction(f64),
    /// Every valid point.
    Full,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Stable { slope_tol: 0.01 }
    }
}

/// Least-squares power-law fit `y ≈ prefactor · t^exponent` over a
/// window of the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Time range actually used by the fit.
    pub window: (f64, f64),
    /// Number of points inside the window.
    pub points_used: usize,
}

fn ols(lt: &[f64], ly: &[f64]) -> (f64, f64, f64) {
    let n = lt.len() as f64;
    let mx = lt.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in lt.iter().zip(ly) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (&x, &y) in lt.iter().zip(ly) {
        let e = y - (intercept + slope * x);
        ss_res += e * e;
        ss_tot += (y - my) * (y - my);
    }
    let r2 = if ss_tot <= f64::EPSILON * ss_res.max(1.0) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    (slope, intercept, r2)
}

/// Fits `log y` against `log t` by ordinary least squares over the
/// window selected by `policy`. Needs at least 8 points with positive
/// `t` and `y`.
pub fn fit_powerlaw(points: &[(f64, f64)], policy: WindowPolicy) -> Result<PowerLawFit, SolverError> {
    let mut data: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(t, y)| t > 0.0 && y > 0.0 && t.is_finite() && y.is_finite())
        .collect();
    if data.len() < 8 {
        return Err(invalid(format!(
            "power-law fit needs at least 8 positive points, got {}",
            data.len()
        )));
    }
    data.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let lt: Vec<f64> = data.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = data.iter().map(|p| p.1.ln()).collect();
    let n = lt.len();

    let start = match policy {
        WindowPolicy::Full => 0,
        WindowPolicy::TrailingFraction(f) => trailing_log_start(&lt, f.clamp(0.0, 1.0)),
        WindowPolicy::Stable { slope_tol } => {
            let w = (n / 8).max(4).min(n - 1);
            let m = n - w; // local slope over the w points [i, i+w)
            let slopes: Vec<f64> = (0..=m)
                .map(|i| ols(&lt[i..(i + w).min(n)], &ly[i..(i + w).min(n)]).0)
                .collect();
            let s_last = *slopes.last().unwrap();
            let mut k = slopes.len() - 1;
            while k > 0 && (slopes[k - 1] - s_last).abs() <= slope_tol {
                k -= 1;
            }
            if n - k >= 8 {
                k
            } else {
                trailing_log_start(&lt, 0.5)
            }
        }
    };
    let start = start.min(n - 2);
    if lt[start] >= lt[n - 1] {
        return Err(invalid("fit window has no time spread".to_string()));
    }
    let (slope, intercept, r2) = ols(&lt[start..], &ly[start..]);
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared: r2,
        window: (data[start].0, data[n - 1].0),
        points_used: n - start,
    })
}

fn trailing_log_start(lt: &[f64], fraction: f64) -> usize {
    let lo = lt[0];
    let hi = lt[lt.len() - 1];
    let cut = hi - fraction * (hi - lo);
    lt.partition_point(|&v| v < cut).min(lt.len() - 2)
}

/// Maximum pairwise sup-norm distance between snapshots after rescaling
/// each to `ξ = (x − x_l)/(x_r − x_l)` and `h / max h` on a common
/// 201-point grid. Snapshots with zero maximum are excluded; it is an
/// error if none survive.
pub fn collapse_metric(snapshots: &[Profile]) -> Result<f64, SolverError> {
    const GRID: usize = 201;
    let mut rescaled: Vec<[f64; GRID]> = Vec::new();
    for p in snapshots {
        let hmax = p.max_height();
        if !(hmax > 0.0) || !(p.x_right > p.x_left) {
            continue; // degenerate snapshot
        }
        let n = p.heights.len();
        let mut row = [0.0_f64; GRID];
        for (j, slot) in row.iter_mut().enumerate() {
            let xi = j as f64 / (GRID - 1) as f64;
            // sample position in the profile's own index space
            let pos = xi * (n - 1) as f64;
            let k = (pos.floor() as usize).min(n - 2);
            let w = pos - k as f64;
            *slot = (p.heights[k] + w * (p.heights[k + 1] - p.heights[k])) / hmax;
        }
        rescaled.push(row);
    }
    if rescaled.is_empty() {
        return Err(invalid("all snapshots are degenerate".to_string()));
    }
    let mut worst = 0.0_f64;
    for i in 0..rescaled.len() {
        for j in i + 1..rescaled.len() {
            let d = rescaled[i]
                .iter()
                .zip(rescaled[j].iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Configuration shared by the rows of an eigenvalue-versus-PDE
/// comparison.
#[derive(Debug, Clone)]
pub struct CompareConfig {
    pub grid_n: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub cfl: f64,
    pub series_len: usize,
    pub initial: InitialCondition,
    pub eigen_tol: f64,
    pub window: WindowPolicy,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            grid_n: 400,
            t_start: 0.1,
            t_end: 100.0,
            cfl: 0.25,
            series_len: 400,
            initial: InitialCondition::parabolic(1.0, 1.0),
            eigen_tol: 1e-6,
            window: WindowPolicy::default(),
        }
    }
}

/// One row of the comparison table. Component failures leave the
/// affected fields empty and carry the reason instead of aborting the
/// whole table.
#[derive(Debug, Clone)]
pub struct ComparisonRow {
    pub ratio: f64,
    /// β from the shooting solver.
    pub beta_eigen: Option<f64>,
    /// β fitted from the front trajectory `x_r(t)`.
    pub beta_from_xr: Option<f64>,
    /// α fitted from the amplitude decay `max H(t)` (sign flipped).
    pub alpha_from_max: Option<f64>,
    pub error: Option<String>,
}

impl ComparisonRow {
    /// The exponent identity `α + 2β` evaluated from the fitted values;
    /// 1 when the run sits in the self-similar regime.
    pub fn alpha_plus_2beta(&self) -> Option<f64> {
        Some(self.alpha_from_max? + 2.0 * self.beta_from_xr?)
    }
}

fn compare_one(ratio: f64, cfg: &CompareConfig) -> ComparisonRow {
    let mut row = ComparisonRow {
        ratio,
        beta_eigen: None,
        beta_from_xr: None,
        alpha_from_max: None,
        error: None,
    };
    let mut errs: Vec<String> = Vec::new();

    match EigenProblem::new(ratio) {
        Ok(prob) => match shoot_beta_with(&prob.with_tol(cfg.eigen_tol)) {
            Ok(res) => row.beta_eigen = Some(res.beta),
            Err(e) => errs.push(format!("eigen: {e}")),
        },
        Err(e) => errs.push(format!("eigen: {e}")),
    }

    let run = PhysicalParams::from_ratio(ratio).and_then(|params| {
        let mut dcfg = DipoleConfig::new(params);
        dcfg.initial = cfg.initial;
        dcfg.grid_n = cfg.grid_n;
        dcfg.cfl = cfg.cfl;
        dcfg.t_start = cfg.t_start;
        dcfg.t_end = cfg.t_end;
        dcfg.series_len = cfg.series_len;
        run_dipole(&dcfg)
    });
    match run {
        Ok(run) => {
            let xr: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.x_right)).collect();
            let hm: Vec<(f64, f64)> = run.series.iter().map(|r| (r.time, r.max_height)).collect();
            match fit_powerlaw(&xr, cfg.window) {
                Ok(fit) => row.beta_from_xr = Some(fit.exponent),
                Err(e) => errs.push(format!("x_r fit: {e}")),
            }
            match fit_powerlaw(&hm, cfg.window) {
                Ok(fit) => row.alpha_from_max = Some(-fit.exponent),
                Err(e) => errs.push(format!("max-height fit: {e}")),
            }
        }
        Err(e) => errs.push(format!("pde: {e}")),
    }

    if !errs.is_empty() {
        row.error = Some(errs.join("; "));
    }
    row
}

/// Runs the shooting solver and the rescaled PDE at each ratio and
/// tabulates the fitted exponents. Rows are independent and are
/// computed in parallel when the `parallel` feature is enabled.
pub fn compare_eigen_pde(ratios: &[f64], cfg: &CompareConfig) -> Vec<ComparisonRow> {
    batch::map_collect(ratios, |&ratio| compare_one(ratio, cfg))
}

/// Errors of a fixed-grid run against an exact self-similar solution.
///
/// Front positions and amplitude carry their own relative errors; the
/// height profile is compared in self-similar coordinates (each side
/// rescaled to its own support and maximum), which is the collapse
/// comparison the exact solution is built for. A pointwise norm across
/// the square-root front wedge would instead be dominated by the front
/// placement already reported separately.
#[derive(Debug, Clone)]
pub struct SimilarityErrorReport {
    /// Worst sup-norm shape error over the snapshots, in scaled
    /// coordinates.
    pub sup_h_rel_err: f64,
    /// Relative amplitude error per snapshot time.
    pub amp_rel_err: Vec<(f64, f64)>,
    /// Relative left-front error per series time.
    pub xl_rel_err: Vec<(f64, f64)>,
    /// Relative right-front error per series time.
    pub xr_rel_err: Vec<(f64, f64)>,
}

/// Compares a run's snapshots and front trajectories against
/// [`DrainageSimilarity`] predictions at the same times.
pub fn similarity_error(run: &DrainageRun, sim: &DrainageSimilarity) -> SimilarityErrorReport {
    const PROBE: usize = 401;
    let fmax = sim.f.iter().copied().fold(0.0, f64::max);
    let mut sup = 0.0_f64;
    let mut amp = Vec::new();

    // exact shape on the unit support
    let exact_shape = |frac: f64| {
        let xi = sim.lambda + frac * (1.0 - sim.lambda);
        let k = sim.xi.partition_point(|&v| v < xi).clamp(1, sim.xi.len() - 1);
        let w = (xi - sim.xi[k - 1]) / (sim.xi[k] - sim.xi[k - 1]);
        (sim.f[k - 1] + w * (sim.f[k] - sim.f[k - 1])) / fmax
    };

    let snapshots: Vec<Profile> = if run.native_snapshots.is_empty() {
        run.snapshots.clone()
    } else {
        // the native polyline keeps the front wedges sharp
        run.native_snapshots
            .iter()
            .map(|st| st.to_profile(PROBE))
            .collect()
    };
    for p in &snapshots {
        let t = p.time;
        let hmax_exact = sim.c_h * t.powf(-(1.0 - 2.0 * sim.beta)) * fmax;
        let hmax_num = p.max_height();
        if !(hmax_exact > 0.0) || !(hmax_num > 0.0) {
            continue;
        }
        amp.push((t, (hmax_num - hmax_exact).abs() / hmax_exact));
        let n = p.heights.len();
        for j in 0..PROBE {
            let frac = j as f64 / (PROBE - 1) as f64;
            let pos = frac * (n - 1) as f64;
            let k = (pos.floor() as usize).min(n - 2);
            let w = pos - k as f64;
            let shape_num = (p.heights[k] + w * (p.heights[k + 1] - p.heights[k])) / hmax_num;
            sup = sup.max((shape_num - exact_shape(frac)).abs());
        }
    }

    let xl = run
        .series
        .iter()
        .filter(|r| sim.x_left(r.time) > 0.0)
        .map(|r| {
            let exact = sim.x_left(r.time);
            (r.time, (r.x_left - exact).abs() / exact)
        })
        .collect();
    let xr = run
        .series
        .iter()
        .map(|r| {
            let exact = sim.x_right(r.time);
            (r.time, (r.x_right - exact).abs() / exact)
        })
        .collect();
    SimilarityErrorReport {
        sup_h_rel_err: sup,
        amp_rel_err: amp,
        xl_rel_err: xl,
        xr_rel_err: xr,
    }
}
