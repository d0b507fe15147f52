//! Explicit solver for the natural-outflow problem in rescaled
//! coordinates.
//!
//! With `ξ = x / x_r(t)` and `H(ξ, t) = h(x_r ξ, t)` the flow equation
//! becomes
//!
//! ```text
//! ∂t H = [ κ ∂ξξ H² − 2 κ₁ ξ ∂ξH(1, t) ∂ξH ] / x_r²,
//! ```
//!
//! with `H(0) = H(1) = 0`, which pins the right front at `ξ = 1`. The
//! transport term carries the factor `−2κ₁` implied by the front speed
//! `v = −2κ₁ ∂x h(x_r)`; the front itself is advanced by `x_r += v·dt`
//! each step. The scheme is forward in time and centered in space, the
//! transport derivative is the one-sided difference `(uᵢ − uᵢ₋₁)/Δξ`,
//! and the diffusivity branch at each point comes from the sign of the
//! previous level's second difference of `u²`.

use crate::error::{invalid, SolverError};
use crate::params::PhysicalParams;
use crate::profile::{self, InitialCondition, Profile, SeriesRecord};

/// Fixed-domain state of the rescaled problem.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledState {
    /// `H(ξ)` on a uniform grid over `[0, 1]`, endpoints zero.
    pub heights: Vec<f64>,
    /// Physical position of the right front.
    pub x_r: f64,
    pub time: f64,
}

impl RescaledState {
    /// Grid spacing in `ξ`.
    pub fn dxi(&self) -> f64 {
        1.0 / (self.heights.len() - 1) as f64
    }

    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    /// Converts back to a physical-coordinate profile on `[0, x_r]`.
    pub fn to_profile(&self) -> Profile {
        Profile {
            x_left: 0.0,
            x_right: self.x_r,
            heights: self.heights.clone(),
            time: self.time,
        }
    }
}

/// Instantaneous extension speed of the mound,
/// `v = −2 κ₁ ∂x h(x_r) = −2 κ₁ (H_N − H_{N−1}) / (Δξ x_r)`.
pub fn boundary_speed(s: &RescaledState, params: &PhysicalParams) -> f64 {
    assert!(s.heights.len() >= 3, "need at least 3 grid points");
    let n = s.heights.len();
    let tip_diff = s.heights[n - 1] - s.heights[n - 2];
    -2.0 * params.kappa1 * tip_diff / (s.dxi() * s.x_r)
}

/// Explicit stability bound
/// `dt = cfl (Δξ x_r)² / (4 max(κ₁, κ₂) max H)`, capped at `dt_max`.
/// A zero state has no diffusion scale and returns `dt_max`.
pub fn stable_dt(s: &RescaledState, params: &PhysicalParams, cfl: f64, dt_max: f64) -> f64 {
    assert!(cfl > 0.0 && cfl <= 1.0, "cfl must lie in (0, 1]");
    stable_dt_raw(s.max_height(), s.dxi() * s.x_r, params, cfl, dt_max)
}

pub(crate) fn stable_dt_raw(
    h_max: f64,
    dx: f64,
    params: &PhysicalParams,
    cfl: f64,
    dt_max: f64,
) -> f64 {
    if h_max <= 0.0 {
        return dt_max;
    }
    (cfl * dx * dx / (4.0 * params.kappa_max() * h_max)).min(dt_max)
}

/// Core update; κ branches come from `sq_prev`, the squared heights of
/// the level before `curr`. Returns the new front position.
#[allow(clippy::too_many_arguments)]
fn step_into(
    curr: &[f64],
    sq_curr: &[f64],
    sq_prev: &[f64],
    x_r: f64,
    params: &PhysicalParams,
    dt: f64,
    clip_tol: f64,
    out: &mut [f64],
) -> Result<f64, SolverError> {
    let n = curr.len();
    let dxi = 1.0 / (n - 1) as f64;
    let coef = dt / (dxi * dxi * x_r * x_r);
    let kappa1 = params.kappa1;
    let tip_diff = curr[n - 1] - curr[n - 2];

    out[0] = 0.0;
    out[n - 1] = 0.0;
    for i in 1..n - 1 {
        let d2_prev = sq_prev[i - 1] - 2.0 * sq_prev[i] + sq_prev[i + 1];
        let kappa = params.kappa_select(d2_prev);
        let d2 = sq_curr[i - 1] - 2.0 * sq_curr[i] + sq_curr[i + 1];
        let xi = dxi * i as f64;
        let advection = -2.0 * kappa1 * xi * (curr[i] - curr[i - 1]) * tip_diff;
        out[i] = curr[i] + coef * (kappa * d2 + advection);
    }
    for v in out[1..n - 1].iter_mut() {
        if *v < 0.0 {
            if *v < -clip_tol {
                return Err(SolverError::Instability {
                    time: f64::NAN, // caller stamps the time
                    detail: format!("height fell to {v}"),
                });
            }
            *v = 0.0;
        }
    }
    let v = -2.0 * kappa1 * tip_diff / (dxi * x_r);
    Ok(x_r + v * dt)
}

/// One explicit step as a pure function. The κ branches are selected
/// from the state itself, matching the first step of a run where no
/// earlier level exists.
pub fn step_dipole(
    s: &RescaledState,
    params: &PhysicalParams,
    dt: f64,
) -> Result<RescaledState, SolverError> {
    let sq: Vec<f64> = s.heights.iter().map(|&h| h * h).collect();
    let clip_tol = 1e-12 * s.max_height().max(1.0);
    let mut out = vec![0.0; s.heights.len()];
    let x_r = step_into(&s.heights, &sq, &sq, s.x_r, params, dt, clip_tol, &mut out).map_err(
        |e| match e {
            SolverError::Instability { detail, .. } => SolverError::Instability {
                time: s.time,
                detail,
            },
            other => other,
        },
    )?;
    Ok(RescaledState {
        heights: out,
        x_r,
        time: s.time + dt,
    })
}

/// Configuration of one rescaled run.
#[derive(Debug, Clone, PartialEq)]
pub struct DipoleConfig {
    pub params: PhysicalParams,
    pub initial: InitialCondition,
    /// Number of ξ samples including both endpoints.
    pub grid_n: usize,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_start: f64,
    pub t_end: f64,
    /// Target number of series rows, spread logarithmically over
    /// `[t_start, t_end]` (uniformly when `t_start = 0`).
    pub series_len: usize,
    pub snapshot_times: Vec<f64>,
}

impl DipoleConfig {
    pub fn new(params: PhysicalParams) -> Self {
        Self {
            params,
            initial: InitialCondition::parabolic(1.0, 1.0),
            grid_n: 400,
            cfl: 0.25,
            dt_max: 1e-2,
            t_start: 0.1,
            t_end: 100.0,
            series_len: 400,
            snapshot_times: Vec::new(),
        }
    }
}

/// Output of a run: the time series, the requested physical-coordinate
/// snapshots, and the final state.
#[derive(Debug, Clone)]
pub struct DipoleRun {
    pub series: Vec<SeriesRecord>,
    pub snapshots: Vec<Profile>,
    pub steps: u64,
    pub final_state: RescaledState,
}

/// Builds the sorted list of times at which the run must land exactly:
/// series sampling times, snapshot times, and the end time. Snapshot
/// and end times act as anchors; generated series times that coalesce
/// with one (within rounding) are dropped so no instant is recorded
/// twice.
pub(crate) fn event_times(
    t_start: f64,
    t_end: f64,
    series_len: usize,
    snapshot_times: &[f64],
) -> Vec<f64> {
    let mut anchors: Vec<f64> = snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > t_start && t <= t_end)
        .collect();
    anchors.push(t_end);
    anchors.sort_by(|a, b| a.partial_cmp(b).unwrap());
    anchors.dedup();

    let near_anchor = |t: f64| {
        anchors
            .iter()
            .any(|&a| (a - t).abs() <= 1e-9 * a.abs().max(1.0))
    };

    let mut times = Vec::new();
    if series_len >= 2 && t_end > t_start {
        let n = series_len - 1;
        for k in 1..n {
            let t = if t_start > 0.0 {
                let (l0, l1) = (t_start.ln(), t_end.ln());
                (l0 + (l1 - l0) * k as f64 / n as f64).exp()
            } else {
                t_start + (t_end - t_start) * k as f64 / n as f64
            };
            if !near_anchor(t) {
                times.push(t);
            }
        }
    }
    times.extend_from_slice(&anchors);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    times
}

/// Runs the rescaled dipole problem. Deterministic for a fixed
/// configuration; instability aborts carry the offending time.
pub fn run_dipole(cfg: &DipoleConfig) -> Result<DipoleRun, SolverError> {
    if !(cfg.t_end >= cfg.t_start) {
        return Err(invalid(format!(
            "t_end {} must not precede t_start {}",
            cfg.t_end, cfg.t_start
        )));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(invalid(format!("cfl must lie in (0, 1], got {}", cfg.cfl)));
    }
    if !(cfg.dt_max > 0.0) {
        return Err(invalid("dt_max must be positive".to_string()));
    }

    let initial = profile::make_initial_profile(&cfg.initial, cfg.grid_n)?;
    let mut curr = initial.heights;
    let n = curr.len();
    let mut x_r = cfg.initial.width;
    let mut t = cfg.t_start;
    let clip_tol = 1e-12 * curr.iter().copied().fold(0.0, f64::max).max(1.0);

    let mut sq_curr: Vec<f64> = curr.iter().map(|&h| h * h).collect();
    let mut sq_prev = sq_curr.clone();
    let mut next = vec![0.0; n];

    let snapshot_set = |time: f64| {
        cfg.snapshot_times
            .iter()
            .any(|&s| (s - time).abs() <= 1e-12 * s.abs().max(1.0))
    };

    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let record =
        |series: &mut Vec<SeriesRecord>, snapshots: &mut Vec<Profile>, st: &RescaledState| {
            let p = st.to_profile();
            series.push(profile::series_record(&p));
            if snapshot_set(st.time) {
                snapshots.push(p);
            }
        };

    let state_view = |heights: &[f64], x_r: f64, time: f64| RescaledState {
        heights: heights.to_vec(),
        x_r,
        time,
    };

    record(&mut series, &mut snapshots, &state_view(&curr, x_r, t));
    if cfg.t_end == cfg.t_start {
        return Ok(DipoleRun {
            series,
            snapshots,
            steps: 0,
            final_state: state_view(&curr, x_r, t),
        });
    }

    let events = event_times(cfg.t_start, cfg.t_end, cfg.series_len, &cfg.snapshot_times);
    let mut steps: u64 = 0;
    for &t_next in &events {
        if t_next <= t {
            continue;
        }
        while t < t_next {
            let h_max = curr.iter().copied().fold(0.0, f64::max);
            let dxi = 1.0 / (n - 1) as f64;
            let mut dt = stable_dt_raw(h_max, dxi * x_r, &cfg.params, cfg.cfl, cfg.dt_max);
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(SolverError::Instability {
                    time: t,
                    detail: format!("degenerate step size {dt}"),
                });
            }
            let remaining = t_next - t;
            let landing = dt >= remaining;
            if landing {
                dt = remaining;
            }
            let new_xr = step_into(
                &curr,
                &sq_curr,
                &sq_prev,
                x_r,
                &cfg.params,
                dt,
                clip_tol,
                &mut next,
            )
            .map_err(|e| match e {
                SolverError::Instability { detail, .. } => {
                    SolverError::Instability { time: t, detail }
                }
                other => other,
            })?;
            std::mem::swap(&mut sq_prev, &mut sq_curr);
            std::mem::swap(&mut curr, &mut next);
            for (s, &h) in sq_curr.iter_mut().zip(curr.iter()) {
                *s = h * h;
            }
            x_r = new_xr;
            t = if landing { t_next } else { t + dt };
            steps += 1;
        }
        record(&mut series, &mut snapshots, &state_view(&curr, x_r, t));
    }

    Ok(DipoleRun {
        series,
        snapshots,
        steps,
        final_state: state_view(&curr, x_r, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(ratio: f64) -> PhysicalParams {
        PhysicalParams::from_ratio(ratio).unwrap()
    }

    fn zero_state(n: usize) -> RescaledState {
        RescaledState {
            heights: vec![0.0; n],
            x_r: 1.0,
            time: 0.0,
        }
    }

    #[test]
    fn boundary_speed_zero_state() {
        assert_eq!(boundary_speed(&zero_state(11), &params(1.0)), 0.0);
    }

    #[test]
    fn boundary_speed_linear_tip() {
        // tip slope −s gives v = 2 κ₁ s
        let n = 11;
        let dxi = 1.0 / (n - 1) as f64;
        let slope = 0.7;
        let s = RescaledState {
            heights: (0..n).map(|i| slope * (1.0 - dxi * i as f64)).collect(),
            x_r: 1.0,
            time: 0.0,
        };
        let p = params(0.5);
        let v = boundary_speed(&s, &p);
        assert!((v - 2.0 * p.kappa1 * slope).abs() < 1e-12);
    }

    #[test]
    fn stable_dt_scalings() {
        let p = params(0.5);
        let mk = |amp: f64, x_r: f64| RescaledState {
            heights: vec![0.0, amp, 0.0],
            x_r,
            time: 0.0,
        };
        let dt = stable_dt(&mk(1.0, 1.0), &p, 0.25, f64::INFINITY);
        let dt_tall = stable_dt(&mk(2.0, 1.0), &p, 0.25, f64::INFINITY);
        let dt_wide = stable_dt(&mk(1.0, 2.0), &p, 0.25, f64::INFINITY);
        assert!((dt_tall - dt / 2.0).abs() < 1e-15 * dt);
        assert!((dt_wide - 4.0 * dt).abs() < 1e-12 * dt);
        assert_eq!(stable_dt(&zero_state(5), &p, 0.25, 0.125), 0.125);
    }

    #[test]
    fn step_preserves_zero_state() {
        let s = zero_state(9);
        let out = step_dipole(&s, &params(0.5), 1e-3).unwrap();
        assert!(out.heights.iter().all(|&h| h == 0.0));
        assert_eq!(out.x_r, s.x_r);
        assert!((out.time - 1e-3).abs() < 1e-18);
    }

    /// Hand-evaluated update on a 5-point grid: u = [0, .4, .6, .2, 0],
    /// x_r = 2, κ₁ = 1, κ₂ = 2, dt = 1e-3, Δξ = 1/4. Second differences
    /// of u² pick κ₁, κ₂, κ₁ at the three interior points; the transport
    /// factor is (u_N − u_{N−1}) = −0.2 and the prefactor
    /// dt/(Δξ² x_r²) = 0.004.
    #[test]
    fn step_matches_hand_evaluation() {
        let s = RescaledState {
            heights: vec![0.0, 0.4, 0.6, 0.2, 0.0],
            x_r: 2.0,
            time: 0.0,
        };
        let p = PhysicalParams::new(1.0, 0.5, 1.0).unwrap(); // κ₂ = 2
        let out = step_dipole(&s, &p, 1e-3).unwrap();
        // i=1: κ₁·0.04 + (−2·0.25·0.4·(−0.2)) = 0.08   → 0.4 + 0.004·0.08
        // i=2: κ₂·(−0.52) + (−2·0.5·0.2·(−0.2)) = −1.0 → 0.6 − 0.004
        // i=3: κ₁·0.28 + (−2·0.75·(−0.4)·(−0.2)) = 0.16 → 0.2 + 0.004·0.16
        assert!((out.heights[1] - 0.40032).abs() < 1e-12);
        assert!((out.heights[2] - 0.596).abs() < 1e-12);
        assert!((out.heights[3] - 0.20064).abs() < 1e-12);
        assert_eq!(out.heights[0], 0.0);
        assert_eq!(out.heights[4], 0.0);
        // v = −2·1·(−0.2)/(0.25·2) = 0.8 → x_r = 2 + 0.8·dt
        assert!((out.x_r - 2.0008).abs() < 1e-12);
    }

    #[test]
    fn oversized_step_aborts_with_instability() {
        let s = RescaledState {
            heights: vec![0.0, 0.2, 0.9, 0.2, 0.0],
            x_r: 1.0,
            time: 3.5,
        };
        let err = step_dipole(&s, &params(1.0), 10.0).unwrap_err();
        match err {
            SolverError::Instability { time, .. } => assert_eq!(time, 3.5),
            other => panic!("expected instability, got {other:?}"),
        }
    }

    #[test]
    fn degenerate_run_echoes_initial_state() {
        let mut cfg = DipoleConfig::new(params(1.0));
        cfg.t_start = 0.5;
        cfg.t_end = 0.5;
        cfg.grid_n = 32;
        let run = run_dipole(&cfg).unwrap();
        assert_eq!(run.steps, 0);
        assert_eq!(run.series.len(), 1);
        assert_eq!(run.series[0].time, 0.5);
        assert!((run.series[0].x_right - 1.0).abs() < 1e-15);
    }

    #[test]
    fn endpoints_and_front_monotonicity_hold_along_a_run() {
        let mut cfg = DipoleConfig::new(params(0.5));
        cfg.grid_n = 100;
        cfg.t_end = 2.0;
        cfg.series_len = 50;
        let run = run_dipole(&cfg).unwrap();
        assert!(run.steps > 0);
        let st = &run.final_state;
        assert_eq!(st.heights[0], 0.0);
        assert_eq!(*st.heights.last().unwrap(), 0.0);
        assert!(st.heights.iter().all(|&h| h >= 0.0));
        for w in run.series.windows(2) {
            assert!(w[1].x_right >= w[0].x_right, "x_r not monotone");
            assert!(w[1].time > w[0].time);
        }
    }

    #[test]
    fn dipole_moment_drift_shrinks_first_order_in_grid() {
        // the one-sided transport difference makes the scheme first
        // order in Δξ; the drift must halve under grid doubling
        let drift = |n: usize| {
            let mut cfg = DipoleConfig::new(params(1.0));
            cfg.grid_n = n;
            cfg.t_end = 10.0;
            cfg.series_len = 60;
            let run = run_dipole(&cfg).unwrap();
            let q0 = run.series[0].dipole_moment;
            run.series
                .iter()
                .map(|r| (r.dipole_moment - q0).abs() / q0)
                .fold(0.0, f64::max)
        };
        let coarse = drift(100);
        let fine = drift(200);
        assert!(fine < 0.03, "drift at n = 200: {fine}");
        assert!(
            coarse / fine > 1.6,
            "drift not shrinking with the grid: {coarse} -> {fine}"
        );
    }

    #[test]
    fn late_run_has_positive_left_outflow() {
        let mut cfg = DipoleConfig::new(params(1.0));
        cfg.grid_n = 100;
        cfg.t_end = 5.0;
        cfg.series_len = 20;
        let run = run_dipole(&cfg).unwrap();
        assert!(run.series.last().unwrap().left_normalized_flux > 0.0);
    }

    #[test]
    fn refining_the_grid_barely_moves_the_front() {
        let mut cfg = DipoleConfig::new(params(0.5));
        cfg.grid_n = 100;
        cfg.t_end = 3.0;
        cfg.series_len = 10;
        let coarse = run_dipole(&cfg).unwrap().final_state.x_r;
        cfg.grid_n = 200;
        let fine = run_dipole(&cfg).unwrap().final_state.x_r;
        assert!(
            (coarse - fine).abs() / fine < 0.01,
            "x_r {coarse} vs refined {fine}"
        );
    }

    #[test]
    fn snapshots_are_physical_and_on_request() {
        let mut cfg = DipoleConfig::new(params(1.0));
        cfg.grid_n = 64;
        cfg.t_end = 1.0;
        cfg.series_len = 10;
        cfg.snapshot_times = vec![0.5, 1.0];
        let run = run_dipole(&cfg).unwrap();
        assert_eq!(run.snapshots.len(), 2);
        assert!((run.snapshots[0].time - 0.5).abs() < 1e-12);
        assert!((run.snapshots[1].time - 1.0).abs() < 1e-12);
        // snapshot is in physical coordinates: right edge at x_r > width
        assert!(run.snapshots[1].x_right > 1.0);
        assert_eq!(run.snapshots[1].x_left, 0.0);
    }

    #[test]
    fn identical_configs_reproduce_bitwise() {
        let mut cfg = DipoleConfig::new(params(0.7));
        cfg.grid_n = 80;
        cfg.t_end = 1.0;
        cfg.series_len = 20;
        let a = run_dipole(&cfg).unwrap();
        let b = run_dipole(&cfg).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn rejects_inverted_time_range() {
        let mut cfg = DipoleConfig::new(params(1.0));
        cfg.t_start = 2.0;
        cfg.t_end = 1.0;
        assert!(run_dipole(&cfg).is_err());
    }
}
