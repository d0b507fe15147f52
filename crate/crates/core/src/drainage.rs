//! Fixed-grid front-tracking solver.
//!
//! The mound lives on a uniform grid over `[0, L]`; the free boundaries
//! `x_l`, `x_r` fall between grid points and are carried as fractional
//! positions next to the outermost wet points. Interior wet points take
//! the centered explicit update; the two edge wet points balance the
//! interior face flux against the boundary condition: a prescribed
//! drainage flux `q = ∂x h²` on the left (receding water, `κ₂`) and the
//! free-boundary wedge flux on the right (advancing water, `κ₁`).
//!
//! Three left-edge modes cover the problems treated here: forced
//! drainage, a pinned outflow face `h(0) = 0`, and a free boundary that
//! mirrors the right front (used for two-sided spreading and
//! cross-validation of the rescaled solver).

use crate::error::{invalid, SolverError};
use crate::params::PhysicalParams;
use crate::profile::{InitialCondition, Profile, SeriesRecord};
use crate::similarity::DrainageSimilarity;

/// Left-boundary condition of a fixed-grid run. Fluxes are normalized,
/// `q = ∂x h²` at the front (physical discharge divided by `m κ₁`).
#[derive(Debug, Clone, PartialEq)]
pub enum DrainageSpec {
    /// Zero drainage; the left front is free like the right one.
    Free,
    /// The left edge is the outflow face `h(0) = 0`, pinned at `x = 0`.
    PinnedLeft,
    /// Constant normalized drainage flux `q₀ ≥ 0`.
    Constant { q: f64 },
    /// Power-law flux `q(t) = coefficient · t^exponent` (the sampled
    /// self-similar drainage law).
    PowerLaw { coefficient: f64, exponent: f64 },
}

impl DrainageSpec {
    /// The power-law flux matching an exact self-similar drainage
    /// solution.
    pub fn from_similarity(sim: &DrainageSimilarity) -> Self {
        DrainageSpec::PowerLaw {
            coefficient: sim.normalized_flux(1.0),
            exponent: sim.flux_exponent(),
        }
    }

    /// Normalized flux at time `t`; `None` in the modes without forced
    /// drainage.
    pub fn flux(&self, t: f64) -> Option<f64> {
        match *self {
            DrainageSpec::Free | DrainageSpec::PinnedLeft => None,
            DrainageSpec::Constant { q } => Some(q),
            DrainageSpec::PowerLaw {
                coefficient,
                exponent,
            } => Some(coefficient * t.powf(exponent)),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        match *self {
            DrainageSpec::Constant { q } if !(q >= 0.0) => {
                Err(invalid(format!("drainage flux must be nonnegative, got {q}")))
            }
            DrainageSpec::PowerLaw { coefficient, .. } if !(coefficient >= 0.0) => Err(invalid(
                format!("flux coefficient must be nonnegative, got {coefficient}"),
            )),
            _ => Ok(()),
        }
    }
}

/// Fixed-grid state with fractional front positions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontState {
    /// Grid spacing; point `i` sits at `x = i·dx`.
    pub dx: f64,
    /// Heights on the full grid; exactly zero outside the wet range.
    pub heights: Vec<f64>,
    /// Index of the first wet point.
    pub wet_lo: usize,
    /// Index of the last wet point (`wet_lo > wet_hi` once extinct).
    pub wet_hi: usize,
    pub x_l: f64,
    pub x_r: f64,
    pub time: f64,
}

impl FrontState {
    pub fn x_at(&self, i: usize) -> f64 {
        self.dx * i as f64
    }

    /// Distance from the left front to the first wet point.
    pub fn dx_l(&self) -> f64 {
        self.x_at(self.wet_lo) - self.x_l
    }

    /// Distance from the last wet point to the right front.
    pub fn dx_r(&self) -> f64 {
        self.x_r - self.x_at(self.wet_hi)
    }

    pub fn wet_count(&self) -> usize {
        if self.wet_lo > self.wet_hi {
            0
        } else {
            self.wet_hi - self.wet_lo + 1
        }
    }

    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }

    /// Mass of the piecewise-linear reconstruction, front wedges
    /// included.
    pub fn mass(&self) -> f64 {
        self.polyline_integrals().0
    }

    /// `∫ x h dx` of the same reconstruction.
    pub fn dipole_moment(&self) -> f64 {
        self.polyline_integrals().1
    }

    fn polyline_integrals(&self) -> (f64, f64) {
        if self.wet_count() == 0 {
            return (0.0, 0.0);
        }
        let mut m = 0.0;
        let mut q = 0.0;
        let mut seg = |xa: f64, ha: f64, xb: f64, hb: f64| {
            let w = xb - xa;
            m += 0.5 * w * (ha + hb);
            q += w * (ha * (2.0 * xa + xb) + hb * (xa + 2.0 * xb)) / 6.0;
        };
        seg(self.x_l, 0.0, self.x_at(self.wet_lo), self.heights[self.wet_lo]);
        for i in self.wet_lo..self.wet_hi {
            seg(
                self.x_at(i),
                self.heights[i],
                self.x_at(i + 1),
                self.heights[i + 1],
            );
        }
        seg(self.x_at(self.wet_hi), self.heights[self.wet_hi], self.x_r, 0.0);
        (m, q)
    }

    /// One-sided estimate of `∂x h²` at the left edge: the standard
    /// stencil at a pinned face, the front-wedge slope otherwise.
    pub fn left_normalized_flux(&self) -> f64 {
        if self.wet_count() == 0 {
            return 0.0;
        }
        if self.x_l == 0.0 && self.wet_lo <= 1 {
            let sq = |i: usize| self.heights[i] * self.heights[i];
            return (-3.0 * sq(0) + 4.0 * sq(1) - sq(2)) / (2.0 * self.dx);
        }
        let u = self.heights[self.wet_lo];
        let w = self.dx_l();
        if w > 1e-12 * self.dx {
            u * u / w
        } else if self.wet_count() >= 2 {
            let u1 = self.heights[self.wet_lo + 1];
            (u1 * u1 - u * u) / self.dx
        } else {
            0.0
        }
    }

    /// Resamples the wet region onto `n` uniform points over
    /// `[x_l, x_r]`; ends are exactly zero.
    pub fn to_profile(&self, n: usize) -> Profile {
        assert!(n >= 2);
        if self.wet_count() == 0 || !(self.x_r > self.x_l) {
            return Profile {
                x_left: self.x_l,
                x_right: self.x_l + self.dx,
                heights: vec![0.0; n],
                time: self.time,
            };
        }
        let mut xs = Vec::with_capacity(self.wet_count() + 2);
        let mut hs = Vec::with_capacity(self.wet_count() + 2);
        xs.push(self.x_l);
        hs.push(0.0);
        for i in self.wet_lo..=self.wet_hi.min(self.heights.len() - 1) {
            let x = self.x_at(i);
            if x > self.x_l && x < self.x_r {
                xs.push(x);
                hs.push(self.heights[i]);
            }
        }
        xs.push(self.x_r);
        hs.push(0.0);
        let step = (self.x_r - self.x_l) / (n - 1) as f64;
        let heights = (0..n)
            .map(|j| {
                if j == 0 || j == n - 1 {
                    return 0.0;
                }
                let x = self.x_l + step * j as f64;
                let k = xs.partition_point(|&v| v < x).clamp(1, xs.len() - 1);
                let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
                hs[k - 1] + w * (hs[k] - hs[k - 1])
            })
            .collect();
        Profile {
            x_left: self.x_l,
            x_right: self.x_r,
            heights,
            time: self.time,
        }
    }

    /// Series row built from front-tracked observables.
    pub fn series_record(&self) -> SeriesRecord {
        SeriesRecord {
            time: self.time,
            x_left: self.x_l,
            x_right: self.x_r,
            max_height: self.max_height(),
            mass: self.mass(),
            dipole_moment: self.dipole_moment(),
            left_normalized_flux: self.left_normalized_flux(),
        }
    }

    /// Builds a state by sampling a compact bump whose support starts at
    /// `offset`.
    pub fn from_bump(
        ic: &InitialCondition,
        offset: f64,
        domain_length: f64,
        grid_n: usize,
    ) -> Result<FrontState, SolverError> {
        if grid_n < 8 {
            return Err(invalid(format!("grid_n must be at least 8, got {grid_n}")));
        }
        if !(offset >= 0.0) || offset + ic.width >= domain_length {
            return Err(invalid(format!(
                "bump support [{}, {}] must sit inside [0, {domain_length})",
                offset,
                offset + ic.width
            )));
        }
        let dx = domain_length / (grid_n - 1) as f64;
        let heights: Vec<f64> = (0..grid_n)
            .map(|i| ic.height_at(dx * i as f64 - offset))
            .collect();
        let wet_lo = heights.iter().position(|&h| h > 0.0);
        let wet_hi = heights.iter().rposition(|&h| h > 0.0);
        let (wet_lo, wet_hi) = match (wet_lo, wet_hi) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid("initial bump is identically zero".to_string())),
        };
        Ok(FrontState {
            dx,
            heights,
            wet_lo,
            wet_hi,
            x_l: offset,
            x_r: offset + ic.width,
            time: 0.0,
        })
    }

    /// Builds a state by sampling an exact self-similar solution at time
    /// `t0`.
    pub fn from_similarity(
        sim: &DrainageSimilarity,
        t0: f64,
        domain_length: f64,
        grid_n: usize,
    ) -> Result<FrontState, SolverError> {
        if !(t0 > 0.0) {
            return Err(invalid(format!("t0 must be positive, got {t0}")));
        }
        if grid_n < 8 {
            return Err(invalid(format!("grid_n must be at least 8, got {grid_n}")));
        }
        let x_r = sim.x_right(t0);
        if x_r >= domain_length {
            return Err(invalid(format!(
                "similarity support reaches {x_r}, beyond the domain length {domain_length}"
            )));
        }
        let dx = domain_length / (grid_n - 1) as f64;
        let heights: Vec<f64> = (0..grid_n).map(|i| sim.height(dx * i as f64, t0)).collect();
        let wet_lo = heights.iter().position(|&h| h > 0.0);
        let wet_hi = heights.iter().rposition(|&h| h > 0.0);
        let (wet_lo, wet_hi) = match (wet_lo, wet_hi) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(invalid("similarity profile has no wet points on the grid")),
        };
        Ok(FrontState {
            dx,
            heights,
            wet_lo,
            wet_hi,
            x_l: sim.x_left(t0),
            x_r,
            time: t0,
        })
    }
}

/// New left-front position under forced drainage: linear extrapolation
/// of `h²` at the prescribed slope `q` down to zero,
/// `x_l = (first wet point) − u_l² / q`, clamped to stay at or left of
/// the first wet point and within one cell of the previous position.
pub fn update_left_boundary(s: &FrontState, q_n: f64) -> f64 {
    assert!(q_n > 0.0, "forced-front formula needs q > 0");
    let first_wet_x = s.x_at(s.wet_lo);
    let u_l = s.heights[s.wet_lo];
    left_front_forced(first_wet_x, u_l, q_n, s.x_l, s.dx)
}

fn left_front_forced(first_wet_x: f64, u_l: f64, q: f64, x_l_prev: f64, dx: f64) -> f64 {
    let candidate = first_wet_x - u_l * u_l / q;
    candidate.clamp(x_l_prev - dx, first_wet_x).max(0.0)
}

/// New right-front position: linear extrapolation of `h` through the
/// last two wet values to its zero crossing, clamped to one cell of
/// motion and to stay at or right of the last wet point. With fewer
/// than two wet points the front falls back to half a cell beyond the
/// last wet point.
pub fn update_right_boundary(s: &FrontState) -> f64 {
    let last_wet_x = s.x_at(s.wet_hi);
    if s.wet_count() < 2 {
        return last_wet_x + 0.5 * s.dx;
    }
    let u_r = s.heights[s.wet_hi];
    let u_rm1 = s.heights[s.wet_hi - 1];
    right_front_extrapolated(last_wet_x, u_r, u_rm1, s.x_r, s.dx)
}

fn right_front_extrapolated(last_wet_x: f64, u_r: f64, u_rm1: f64, x_r_prev: f64, dx: f64) -> f64 {
    let upper = x_r_prev + dx;
    let candidate = if u_rm1 > u_r {
        last_wet_x + dx * u_r / (u_rm1 - u_r)
    } else {
        // flat or rising toward the front: no finite crossing
        f64::INFINITY
    };
    candidate.clamp(last_wet_x, upper)
}

/// Mirrored extrapolation for a free left front.
fn left_front_extrapolated(first_wet_x: f64, u_l: f64, u_lp1: f64, x_l_prev: f64, dx: f64) -> f64 {
    let lower = x_l_prev - dx;
    let candidate = if u_lp1 > u_l {
        first_wet_x - dx * u_l / (u_lp1 - u_l)
    } else {
        f64::NEG_INFINITY
    };
    candidate.clamp(lower, first_wet_x).max(0.0)
}

/// Internal stepping engine; owns the double-buffered grids so runs do
/// not allocate per step.
struct Engine {
    params: PhysicalParams,
    spec: DrainageSpec,
    dx: f64,
    clip_tol: f64,
    curr: Vec<f64>,
    sq_curr: Vec<f64>,
    sq_prev: Vec<f64>,
    next: Vec<f64>,
    wet_lo: usize,
    wet_hi: usize,
    x_l: f64,
    x_r: f64,
    time: f64,
}

impl Engine {
    fn new(state: &FrontState, params: PhysicalParams, spec: DrainageSpec) -> Self {
        let sq: Vec<f64> = state.heights.iter().map(|&h| h * h).collect();
        Engine {
            params,
            spec,
            dx: state.dx,
            clip_tol: 1e-12 * state.max_height().max(1.0),
            curr: state.heights.clone(),
            sq_curr: sq.clone(),
            sq_prev: sq,
            next: vec![0.0; state.heights.len()],
            wet_lo: state.wet_lo,
            wet_hi: state.wet_hi,
            x_l: state.x_l,
            x_r: state.x_r,
            time: state.time,
        }
    }

    fn state(&self) -> FrontState {
        FrontState {
            dx: self.dx,
            heights: self.curr.clone(),
            wet_lo: self.wet_lo,
            wet_hi: self.wet_hi,
            x_l: self.x_l,
            x_r: self.x_r,
            time: self.time,
        }
    }

    fn wet_count(&self) -> usize {
        if self.wet_lo > self.wet_hi {
            0
        } else {
            self.wet_hi - self.wet_lo + 1
        }
    }

    fn max_height(&self) -> f64 {
        self.curr[self.wet_lo..=self.wet_hi.min(self.curr.len() - 1)]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Polyline mass without materializing a state clone.
    fn mass(&self) -> f64 {
        if self.wet_lo > self.wet_hi {
            return 0.0;
        }
        let mut m = 0.5 * (self.x_at(self.wet_lo) - self.x_l) * self.curr[self.wet_lo];
        for i in self.wet_lo..self.wet_hi {
            m += 0.5 * self.dx * (self.curr[i] + self.curr[i + 1]);
        }
        m += 0.5 * (self.x_r - self.x_at(self.wet_hi)) * self.curr[self.wet_hi];
        m
    }

    fn stable_dt(&self, cfl: f64, dt_max: f64) -> f64 {
        crate::dipole::stable_dt_raw(self.max_height(), self.dx, &self.params, cfl, dt_max)
    }

    fn step(&mut self, dt: f64) -> Result<(), SolverError> {
        let n = self.curr.len();
        let dx = self.dx;
        let (lo, hi) = (self.wet_lo, self.wet_hi);
        debug_assert!(lo <= hi);
        let pinned = matches!(self.spec, DrainageSpec::PinnedLeft);
        let q_n = self.spec.flux(self.time);

        self.next.fill(0.0);
        let coef = dt / (dx * dx);

        // interior wet points; under a pinned face the first wet point is
        // an ordinary interior point with a zero neighbor at the wall
        let (il, ir) = if pinned { (lo, hi - 1) } else { (lo + 1, hi.saturating_sub(1)) };
        for i in il..=ir.min(n - 2) {
            if i == 0 {
                continue;
            }
            let d2_prev = self.sq_prev[i - 1] - 2.0 * self.sq_prev[i] + self.sq_prev[i + 1];
            let kappa = self.params.kappa_select(d2_prev);
            let d2 = self.sq_curr[i - 1] - 2.0 * self.sq_curr[i] + self.sq_curr[i + 1];
            self.next[i] = self.curr[i] + coef * kappa * d2;
        }

        // left wet point
        let u_l_old = self.curr[lo];
        if !pinned {
            let dx_l = (self.x_at(lo) - self.x_l).max(0.0);
            let w = 2.0 * dt / (dx + dx_l);
            let face = (self.sq_curr[lo + 1] - self.sq_curr[lo]) / dx;
            self.next[lo] = match q_n {
                // forced drainage: receding water carries κ₂
                Some(q) => u_l_old + w * self.params.kappa2 * (face - q),
                // free front mirrors the right treatment with κ₁
                None => {
                    let wedge = if u_l_old > 0.0 && dx_l > 0.0 {
                        self.sq_curr[lo] / dx_l
                    } else {
                        0.0
                    };
                    u_l_old + w * self.params.kappa1 * (face - wedge)
                }
            };
        }

        // right wet point: advancing water carries κ₁
        {
            let dx_r = (self.x_r - self.x_at(hi)).max(0.0);
            let w = 2.0 * dt / (dx + dx_r);
            let face = (self.sq_curr[hi - 1] - self.sq_curr[hi]) / dx;
            let wedge = if self.curr[hi] > 0.0 && dx_r > 0.0 {
                self.sq_curr[hi] / dx_r
            } else {
                0.0
            };
            self.next[hi] = self.curr[hi] + w * self.params.kappa1 * (face - wedge);
        }

        // Negative edge cells mean the front passed them: they dry and
        // the wet range shrinks below. Interior negatives beyond the
        // clip tolerance signal instability.
        for i in lo..=hi {
            let v = self.next[i];
            if !v.is_finite() {
                return Err(SolverError::Instability {
                    time: self.time,
                    detail: format!("non-finite height at grid point {i}"),
                });
            }
            if v < 0.0 {
                if i != lo && i != hi && v < -self.clip_tol {
                    return Err(SolverError::Instability {
                        time: self.time,
                        detail: format!("height fell to {v} at grid point {i}"),
                    });
                }
                self.next[i] = 0.0;
            }
        }
        if pinned {
            self.next[0] = 0.0;
        }

        // fronts and wet-range bookkeeping
        let mut new_lo = lo;
        let mut new_hi = hi;

        // dry emptied edge cells (at most a couple per step in practice)
        while new_hi > new_lo && self.next[new_hi] <= 0.0 {
            self.next[new_hi] = 0.0;
            new_hi -= 1;
        }
        let left_dried = if !pinned {
            let mut dried = false;
            while new_lo < new_hi && self.next[new_lo] <= 0.0 {
                self.next[new_lo] = 0.0;
                new_lo += 1;
                dried = true;
            }
            dried
        } else {
            false
        };
        if new_lo >= new_hi && self.next[new_lo] <= 0.0 {
            // nothing wet remains
            self.commit(new_lo, new_hi, dt, true);
            return Ok(());
        }

        // right front from the new values
        let x_hi = self.dx * new_hi as f64;
        let new_x_r = if new_hi > new_lo {
            right_front_extrapolated(x_hi, self.next[new_hi], self.next[new_hi - 1], self.x_r, dx)
        } else {
            x_hi + 0.5 * dx
        };
        let mut new_x_r = new_x_r;
        while new_hi + 1 < n && new_x_r >= self.dx * (new_hi + 1) as f64 {
            new_hi += 1;
            self.next[new_hi] = 0.0;
        }
        if new_hi + 1 >= n {
            return Err(invalid(format!(
                "right front reached the end of the computational domain at t = {}",
                self.time
            )));
        }
        new_x_r = new_x_r.max(self.dx * new_hi as f64);

        // left front by mode
        let mut new_x_l = self.x_l;
        if !pinned {
            match q_n {
                Some(q) if q > 0.0 => {
                    // After a drying event the next point serves as u_l and
                    // the front is recomputed from it; the floor keeps dx_l
                    // within one cell, so a profile too tall for the
                    // prescribed flux cannot walk the front away and
                    // inflate the wedge.
                    let u_for_front = if left_dried {
                        self.next[new_lo]
                    } else {
                        u_l_old
                    };
                    new_x_l =
                        left_front_forced(self.dx * new_lo as f64, u_for_front, q, self.x_l, dx)
                            .max(self.dx * new_lo as f64 - dx);
                }
                _ => {
                    // free mode: mirror of the right front
                    let x_lo = self.dx * new_lo as f64;
                    let cand = if new_hi > new_lo {
                        left_front_extrapolated(
                            x_lo,
                            self.next[new_lo],
                            self.next[new_lo + 1],
                            self.x_l,
                            dx,
                        )
                    } else {
                        (x_lo - 0.5 * dx).max(0.0)
                    };
                    new_x_l = cand;
                    while new_lo > 0 && new_x_l <= self.dx * (new_lo - 1) as f64 {
                        new_lo -= 1;
                        self.next[new_lo] = 0.0;
                    }
                    if new_lo == 0 && new_x_l <= 0.0 {
                        new_x_l = 0.0;
                    }
                }
            }
        }

        self.x_r = new_x_r;
        self.x_l = new_x_l;
        self.commit(new_lo, new_hi, dt, false);
        Ok(())
    }

    fn x_at(&self, i: usize) -> f64 {
        self.dx * i as f64
    }

    fn commit(&mut self, lo: usize, hi: usize, dt: f64, extinct: bool) {
        std::mem::swap(&mut self.sq_prev, &mut self.sq_curr);
        std::mem::swap(&mut self.curr, &mut self.next);
        for (s, &h) in self.sq_curr.iter_mut().zip(self.curr.iter()) {
            *s = h * h;
        }
        if extinct {
            self.wet_lo = 1;
            self.wet_hi = 0;
        } else {
            self.wet_lo = lo;
            self.wet_hi = hi;
        }
        self.time += dt;
    }
}

/// One explicit front-tracked step as a pure function; the κ branches
/// come from the state itself.
pub fn step_front(
    s: &FrontState,
    params: &PhysicalParams,
    spec: &DrainageSpec,
    dt: f64,
) -> Result<FrontState, SolverError> {
    spec.validate()?;
    if s.wet_count() == 0 {
        let mut out = s.clone();
        out.time += dt;
        return Ok(out);
    }
    if s.wet_count() < 2 {
        return Err(invalid(
            "front step needs at least 2 wet points; the run is extinct".to_string(),
        ));
    }
    let mut engine = Engine::new(s, *params, spec.clone());
    engine.step(dt)?;
    Ok(engine.state())
}

/// Initial data of a fixed-grid run.
#[derive(Debug, Clone)]
pub enum DrainageInitial {
    /// Compact bump with its support starting at `offset`.
    Bump { ic: InitialCondition, offset: f64 },
    /// Exact self-similar solution sampled at the run's start time.
    Similarity(DrainageSimilarity),
}

/// Configuration of a fixed-grid run.
#[derive(Debug, Clone)]
pub struct DrainageConfig {
    pub params: PhysicalParams,
    pub spec: DrainageSpec,
    pub initial: DrainageInitial,
    pub domain_length: f64,
    /// Number of grid points on `[0, domain_length]`.
    pub grid_n: usize,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub series_len: usize,
    pub snapshot_times: Vec<f64>,
    /// Extinction is declared below `mass_floor_factor ×` initial mass.
    pub mass_floor_factor: f64,
    /// Resolution of resampled snapshot profiles.
    pub snapshot_samples: usize,
}

impl DrainageConfig {
    pub fn new(params: PhysicalParams, spec: DrainageSpec, initial: DrainageInitial) -> Self {
        Self {
            params,
            spec,
            initial,
            domain_length: 4.0,
            grid_n: 801,
            cfl: 0.25,
            dt_max: 1e-2,
            t_start: 0.0,
            t_end: 10.0,
            series_len: 400,
            snapshot_times: Vec::new(),
            mass_floor_factor: 1e-6,
            snapshot_samples: 201,
        }
    }
}

/// Output of a fixed-grid run.
#[derive(Debug, Clone)]
pub struct DrainageRun {
    pub series: Vec<SeriesRecord>,
    pub snapshots: Vec<Profile>,
    /// Raw states behind the resampled snapshots; error norms against
    /// exact solutions are taken at these native grid points.
    pub native_snapshots: Vec<FrontState>,
    /// Time at which the mound was declared extinct, when it was.
    pub extinction_time: Option<f64>,
    pub steps: u64,
    pub final_state: FrontState,
}

fn initial_state(cfg: &DrainageConfig) -> Result<FrontState, SolverError> {
    let mut st = match &cfg.initial {
        DrainageInitial::Bump { ic, offset } => {
            FrontState::from_bump(ic, *offset, cfg.domain_length, cfg.grid_n)?
        }
        DrainageInitial::Similarity(sim) => {
            FrontState::from_similarity(sim, cfg.t_start, cfg.domain_length, cfg.grid_n)?
        }
    };
    st.time = cfg.t_start;
    if matches!(cfg.spec, DrainageSpec::PinnedLeft) {
        if st.x_l != 0.0 {
            return Err(invalid(format!(
                "pinned-left runs need the support to start at x = 0, got x_l = {}",
                st.x_l
            )));
        }
        st.heights[0] = 0.0;
        st.wet_lo = st.wet_lo.max(1);
    }
    Ok(st)
}

/// Runs the fixed-grid solver. Extinction (mass below the floor or
/// fewer than two wet points) ends the run early with the extinction
/// time recorded.
pub fn run_drainage(cfg: &DrainageConfig) -> Result<DrainageRun, SolverError> {
    cfg.spec.validate()?;
    if !(cfg.t_end >= cfg.t_start) {
        return Err(invalid(format!(
            "t_end {} must not precede t_start {}",
            cfg.t_end, cfg.t_start
        )));
    }
    if !(cfg.cfl > 0.0 && cfg.cfl <= 1.0) {
        return Err(invalid(format!("cfl must lie in (0, 1], got {}", cfg.cfl)));
    }
    let state = initial_state(cfg)?;
    drive(cfg, state, cfg.t_start, cfg.t_end)
}

/// Shared run loop; also used by the flood-then-drain composite.
fn drive(
    cfg: &DrainageConfig,
    state: FrontState,
    t_start: f64,
    t_end: f64,
) -> Result<DrainageRun, SolverError> {
    let mass_floor = cfg.mass_floor_factor * state.mass();
    let mut engine = Engine::new(&state, cfg.params, cfg.spec.clone());

    let snapshot_set = |time: f64| {
        cfg.snapshot_times
            .iter()
            .any(|&s| (s - time).abs() <= 1e-12 * s.abs().max(1.0))
    };

    let mut series = Vec::new();
    let mut snapshots = Vec::new();
    let mut native_snapshots = Vec::new();
    let mut record = |st: &FrontState| {
        series.push(st.series_record());
        if snapshot_set(st.time) {
            snapshots.push(st.to_profile(cfg.snapshot_samples));
            native_snapshots.push(st.clone());
        }
    };

    record(&engine.state());
    if t_end == t_start {
        return Ok(DrainageRun {
            series,
            snapshots,
            native_snapshots,
            extinction_time: None,
            steps: 0,
            final_state: engine.state(),
        });
    }

    let events = crate::dipole::event_times(t_start, t_end, cfg.series_len, &cfg.snapshot_times);
    let mut steps: u64 = 0;
    let mut extinction_time = None;

    'outer: for &t_next in &events {
        if t_next <= engine.time {
            continue;
        }
        while engine.time < t_next {
            if engine.wet_count() < 2 || engine.mass() < mass_floor {
                extinction_time = Some(engine.time);
                record(&engine.state());
                break 'outer;
            }
            let mut dt = engine.stable_dt(cfg.cfl, cfg.dt_max);
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(SolverError::Instability {
                    time: engine.time,
                    detail: format!("degenerate step size {dt}"),
                });
            }
            let remaining = t_next - engine.time;
            let landing = dt >= remaining;
            if landing {
                dt = remaining;
            }
            let t_before = engine.time;
            engine.step(dt)?;
            if landing {
                engine.time = t_next;
            } else {
                engine.time = t_before + dt;
            }
            steps += 1;
        }
        if extinction_time.is_none() {
            record(&engine.state());
        }
    }

    Ok(DrainageRun {
        series,
        snapshots,
        native_snapshots,
        extinction_time,
        steps,
        final_state: engine.state(),
    })
}

/// Configuration of the flood-then-drain experiment: natural outflow
/// through the pinned face until `t_switch`, then constant forced
/// drainage at `multiplier ×` the natural flux measured at the switch.
#[derive(Debug, Clone)]
pub struct FloodDrainConfig {
    pub params: PhysicalParams,
    pub initial: InitialCondition,
    pub domain_length: f64,
    pub grid_n: usize,
    pub cfl: f64,
    pub dt_max: f64,
    pub t_start: f64,
    pub t_switch: f64,
    pub t_end: f64,
    pub multiplier: f64,
    pub series_len: usize,
    pub snapshot_times: Vec<f64>,
    pub mass_floor_factor: f64,
    pub snapshot_samples: usize,
}

impl FloodDrainConfig {
    pub fn new(params: PhysicalParams) -> Self {
        Self {
            params,
            initial: InitialCondition::parabolic(1.0, 1.0),
            domain_length: 4.0,
            grid_n: 801,
            cfl: 0.25,
            dt_max: 1e-2,
            t_start: 0.0,
            t_switch: 1.0,
            t_end: 100.0,
            multiplier: 2.0,
            series_len: 400,
            snapshot_times: Vec::new(),
            mass_floor_factor: 1e-6,
            snapshot_samples: 201,
        }
    }
}

/// Output of the flood-then-drain experiment.
#[derive(Debug, Clone)]
pub struct FloodDrainRun {
    /// Natural outflow flux `∂x h²(0)` measured at the switch time.
    pub natural_flux_at_switch: f64,
    /// Forced flux applied after the switch.
    pub q0: f64,
    pub series: Vec<SeriesRecord>,
    pub snapshots: Vec<Profile>,
    pub extinction_time: Option<f64>,
    pub steps: u64,
}

/// Runs the two-phase experiment. With `multiplier = 0` the second
/// phase keeps the natural outflow (no forced drainage, no extinction
/// expected).
pub fn run_flood_then_drain(cfg: &FloodDrainConfig) -> Result<FloodDrainRun, SolverError> {
    if !(cfg.t_start <= cfg.t_switch && cfg.t_switch < cfg.t_end) {
        return Err(invalid(format!(
            "need t_start <= t_switch < t_end, got {}, {}, {}",
            cfg.t_start, cfg.t_switch, cfg.t_end
        )));
    }
    if !(cfg.multiplier >= 0.0) {
        return Err(invalid(format!(
            "flux multiplier must be nonnegative, got {}",
            cfg.multiplier
        )));
    }

    let phase1_cfg = DrainageConfig {
        params: cfg.params,
        spec: DrainageSpec::PinnedLeft,
        initial: DrainageInitial::Bump {
            ic: cfg.initial,
            offset: 0.0,
        },
        domain_length: cfg.domain_length,
        grid_n: cfg.grid_n,
        cfl: cfg.cfl,
        dt_max: cfg.dt_max,
        t_start: cfg.t_start,
        t_end: cfg.t_switch,
        series_len: cfg.series_len / 2,
        snapshot_times: cfg.snapshot_times.clone(),
        mass_floor_factor: cfg.mass_floor_factor,
        snapshot_samples: cfg.snapshot_samples,
    };
    let phase1 = run_drainage(&phase1_cfg)?;
    let natural_flux = phase1.final_state.left_normalized_flux();
    let q0 = cfg.multiplier * natural_flux;

    let mut series = phase1.series;
    let mut snapshots = phase1.snapshots;

    let mut state = phase1.final_state;
    let phase2_spec = if q0 > 0.0 {
        // the left front starts receding from the outflow face
        state.x_l = 0.0;
        state.wet_lo = state.wet_lo.max(1);
        DrainageSpec::Constant { q: q0 }
    } else {
        DrainageSpec::PinnedLeft
    };
    let phase2_cfg = DrainageConfig {
        spec: phase2_spec,
        t_start: cfg.t_switch,
        t_end: cfg.t_end,
        series_len: cfg.series_len / 2,
        ..phase1_cfg
    };
    let phase2 = drive(&phase2_cfg, state, cfg.t_switch, cfg.t_end)?;

    // the switch instant is already recorded by phase 1
    series.extend(phase2.series.into_iter().skip(1));
    snapshots.extend(phase2.snapshots);

    Ok(FloodDrainRun {
        natural_flux_at_switch: natural_flux,
        q0,
        series,
        snapshots,
        extinction_time: phase2.extinction_time,
        steps: phase1.steps + phase2.steps,
    })
}
