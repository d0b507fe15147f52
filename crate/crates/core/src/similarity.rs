//! Shooting solver for the nonlinear eigenvalue problem that fixes the
//! anomalous spreading exponent `β`, plus the exact self-similar drainage
//! solution used to validate the fixed-grid solver.
//!
//! With `h = C_h t^{−(1−2β)} f(x / (C_x t^β))` and the normalization
//! `C_h / (κ₁ C_x²) = 1`, the profile `f` on `[0, 1]` satisfies
//!
//! ```text
//! (f²)'' = −c · s,   s(ξ) = (1 − 2β) f + β ξ f',
//! c = 1        where s < 0  (advancing water, κ₁ branch),
//! c = κ₁/κ₂    where s > 0  (receding water, κ₂ branch),
//! ```
//!
//! with `f(0) = 0`, `f(1) = 0`, `f'(1) = −β/2`. Only one `β` satisfies
//! all three conditions; it is found by bisection on the shot residual.
//! The integration works on `g = f²`, which stays regular at `ξ = 0`,
//! starting from a Taylor expansion at the degenerate tip and marching
//! toward the origin with classical fourth-order Runge-Kutta stages.

use crate::error::{invalid, SolverError};

/// Localization width in `ξ` for a branch switch.
const SWITCH_LOC_TOL: f64 = 1e-10;
/// Localization width in `ξ` for a zero crossing of `f`.
const CROSSING_LOC_TOL: f64 = 1e-12;

/// Parameters of one eigenvalue problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenProblem {
    /// Diffusivity ratio `κ₁/κ₂` in (0, 1].
    pub ratio: f64,
    /// Offset of the Taylor start below the tip, `ξ₀ = 1 − eps_tip`.
    pub eps_tip: f64,
    /// Runge-Kutta step in `ξ`.
    pub step: f64,
    /// Bisection tolerance on `β`.
    pub tol: f64,
}

impl EigenProblem {
    pub fn new(ratio: f64) -> Result<Self, SolverError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(invalid(format!("ratio must lie in (0, 1], got {ratio}")));
        }
        Ok(Self {
            ratio,
            eps_tip: 1e-6,
            step: 1e-4,
            tol: 1e-6,
        })
    }

    pub fn with_eps_tip(mut self, eps: f64) -> Self {
        self.eps_tip = eps;
        self
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// Converged eigenvalue solution.
#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Anomalous spreading exponent.
    pub beta: f64,
    /// Diffusivity ratio the problem was solved at.
    pub ratio: f64,
    /// Profile sample positions, ascending over `[0, 1]`.
    pub xi: Vec<f64>,
    /// Profile values `f(ξ) = √g(ξ)`.
    pub f: Vec<f64>,
    /// Location where the branch indicator changed sign; absent for
    /// `ratio = 1`, where the branches coincide.
    pub switch_point: Option<f64>,
    /// Residual `g(0)` of the converged shot.
    pub residual: f64,
    /// Slope `(f²)'(0)` of the converged shot; sets the natural outflow
    /// flux law.
    pub g_prime_origin: f64,
}

impl EigenResult {
    /// Decay exponent of the amplitude, `α = 1 − 2β` exactly.
    pub fn alpha(&self) -> f64 {
        1.0 - 2.0 * self.beta
    }

    /// Exponent `γ = 4α − 2` of the dimensionless similarity form.
    pub fn gamma(&self) -> f64 {
        4.0 * self.alpha() - 2.0
    }

    /// Exponent `ε = 1 − 4β` of the dimensionless similarity form.
    pub fn epsilon_exp(&self) -> f64 {
        1.0 - 4.0 * self.beta
    }

    /// Wraps the profile as an evaluable self-similar solution with the
    /// given prefactors (`λ = 0`: the mound touches the origin).
    pub fn similarity_solution(&self, c_x: f64, c_h: f64) -> DrainageSimilarity {
        DrainageSimilarity {
            beta: self.beta,
            lambda: 0.0,
            xi: self.xi.clone(),
            f: self.f.clone(),
            c_x,
            c_h,
            g_prime_at_left: self.g_prime_origin,
        }
    }
}

/// One integration of the profile ODE at a trial `β`.
#[derive(Debug, Clone)]
pub struct ShotResult {
    /// Sample positions, ascending.
    pub xi: Vec<f64>,
    /// Samples of `g = f²`.
    pub g: Vec<f64>,
    /// Signed residual: `g(0)` when the origin was reached, `−λ` when
    /// `f` crossed zero at `ξ = λ` before reaching it.
    pub residual: f64,
    /// Zero crossing of `f`, when one occurred.
    pub crossing: Option<f64>,
    /// First sign change of the branch indicator.
    pub switch_point: Option<f64>,
    /// `g'` at the leftmost point reached (origin or crossing).
    pub g_prime_left: f64,
}

impl ShotResult {
    pub fn reached_origin(&self) -> bool {
        self.crossing.is_none()
    }
}

/// Exact self-similar drainage solution
/// `h(x, t) = C_h t^{−(1−2β)} f(x / (C_x t^β))` with the mound supported
/// on `ξ ∈ [λ, 1]`.
#[derive(Debug, Clone)]
pub struct DrainageSimilarity {
    pub beta: f64,
    /// Left-front similarity coordinate; the fronts are
    /// `x_l = λ C_x t^β` and `x_r = C_x t^β`.
    pub lambda: f64,
    /// Profile sample positions, ascending over `[λ, 1]`.
    pub xi: Vec<f64>,
    pub f: Vec<f64>,
    /// Spatial prefactor.
    pub c_x: f64,
    /// Amplitude prefactor; a solution of the flow equation requires
    /// `c_h = κ₁ c_x²` (both default to 1 in normalized units).
    pub c_h: f64,
    /// `(f²)'(λ)`, the slope entering the flux law.
    pub g_prime_at_left: f64,
}

impl DrainageSimilarity {
    pub fn x_left(&self, t: f64) -> f64 {
        self.lambda * self.c_x * t.powf(self.beta)
    }

    pub fn x_right(&self, t: f64) -> f64 {
        self.c_x * t.powf(self.beta)
    }

    /// Exponent of the drainage flux law, `3β − 2`.
    pub fn flux_exponent(&self) -> f64 {
        3.0 * self.beta - 2.0
    }

    /// Normalized drainage flux `∂x h²` at the left front:
    /// `(C_h²/C_x) (f²)'(λ) t^{3β−2}`.
    pub fn normalized_flux(&self, t: f64) -> f64 {
        self.c_h * self.c_h / self.c_x * self.g_prime_at_left * t.powf(self.flux_exponent())
    }

    /// Physical discharge rate `q(t) = m C_h C_x (f²)'(λ) t^{3β−2}`
    /// (valid under the `c_h = κ₁ c_x²` normalization with `κ₁ = 1`).
    pub fn physical_flux(&self, porosity_m: f64, t: f64) -> f64 {
        porosity_m * self.c_h * self.c_x * self.g_prime_at_left * t.powf(self.flux_exponent())
    }

    /// Height at `(x, t)`; zero outside `[x_l(t), x_r(t)]`.
    pub fn height(&self, x: f64, t: f64) -> f64 {
        assert!(t > 0.0, "similarity solution needs t > 0");
        let scale = self.c_x * t.powf(self.beta);
        let xi = x / scale;
        if xi < self.lambda || xi > 1.0 {
            return 0.0;
        }
        let amp = self.c_h * t.powf(-(1.0 - 2.0 * self.beta));
        amp * interp(&self.xi, &self.f, xi)
    }
}

/// Evaluates a self-similar solution at a physical point. Zero outside
/// the support `[x_l(t), x_r(t)]`.
pub fn eval_similarity(sim: &DrainageSimilarity, x: f64, t: f64) -> f64 {
    sim.height(x, t)
}

/// Slope of `g` at the left end of an ascending sample set. Near a zero
/// of `g` the profile behaves like `C²δ + a δ^{3/2}`, so two secants at
/// different scales pin `C²` by eliminating the `√δ` term.
fn edge_slope(xi: &[f64], g: &[f64]) -> f64 {
    let n = xi.len();
    if n < 2 {
        return 0.0;
    }
    let (x0, g0) = (xi[0], g[0]);
    let j1 = 2.min(n - 1);
    let d1 = xi[j1] - x0;
    if !(d1 > 0.0) {
        return 0.0;
    }
    let s1 = (g[j1] - g0) / d1;
    let j2 = xi.partition_point(|&v| v < x0 + 4.0 * d1).min(n - 1);
    let d2 = xi[j2] - x0;
    if j2 <= j1 || !(d2 > d1 * 1.5) {
        return s1;
    }
    let s2 = (g[j2] - g0) / d2;
    let (r1, r2) = (d1.sqrt(), d2.sqrt());
    (s1 * r2 - s2 * r1) / (r2 - r1)
}

/// Linear interpolation on an ascending sample grid.
fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    debug_assert_eq!(xs.len(), ys.len());
    if x <= xs[0] {
        return ys[0];
    }
    if x >= xs[xs.len() - 1] {
        return ys[ys.len() - 1];
    }
    let j = xs.partition_point(|&v| v < x).max(1);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let (y0, y1) = (ys[j - 1], ys[j]);
    let w = (x - x0) / (x1 - x0);
    y0 + w * (y1 - y0)
}

/// Taylor start at the degenerate tip: values of `(g, g')` at
/// `ξ = 1 − eps`, from the series
/// `g(1−ε) = (β²/4) ε² − (β(1−β)/8) ε³ + O(ε⁴)`
/// obtained by matching the `ε⁰` and `ε¹` orders of the ODE on the
/// advancing branch (the tip slope in normalized units is
/// `f'(1) = −β/2`).
pub fn taylor_start(beta: f64, ratio: f64, eps: f64) -> Result<(f64, f64), SolverError> {
    if !(beta > 0.0) {
        return Err(invalid(format!("beta must be positive, got {beta}")));
    }
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(invalid(format!("ratio must lie in (0, 1], got {ratio}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid(format!("eps must lie in [0, 1), got {eps}")));
    }
    let c2 = beta * beta / 4.0;
    let c3 = -beta * (1.0 - beta) / 8.0;
    let g = c2 * eps * eps + c3 * eps * eps * eps;
    // derivative with respect to ξ = 1 − ε
    let gp = -(2.0 * c2 * eps + 3.0 * c3 * eps * eps);
    Ok((g, gp))
}

/// Branch indicator `s = (1 − 2β) f + β ξ f'` in `g` variables.
fn indicator(beta: f64, xi: f64, g: f64, gp: f64) -> f64 {
    let f = g.sqrt();
    let base = (1.0 - 2.0 * beta) * f;
    if xi == 0.0 {
        base
    } else {
        base + beta * xi * gp / (2.0 * f)
    }
}

/// Right-hand side of the first-order system for `(g, g')` with a frozen
/// branch coefficient.
fn rhs(beta: f64, coeff: f64, xi: f64, g: f64, gp: f64) -> (f64, f64) {
    (gp, -coeff * indicator(beta, xi, g, gp))
}

/// One RK4 step of signed length `h` (negative marches toward the
/// origin).
fn rk4_step(beta: f64, coeff: f64, xi: f64, y: (f64, f64), h: f64) -> (f64, f64) {
    let (k1g, k1p) = rhs(beta, coeff, xi, y.0, y.1);
    let (k2g, k2p) = rhs(
        beta,
        coeff,
        xi + 0.5 * h,
        y.0 + 0.5 * h * k1g,
        y.1 + 0.5 * h * k1p,
    );
    let (k3g, k3p) = rhs(
        beta,
        coeff,
        xi + 0.5 * h,
        y.0 + 0.5 * h * k2g,
        y.1 + 0.5 * h * k2p,
    );
    let (k4g, k4p) = rhs(beta, coeff, xi + h, y.0 + h * k3g, y.1 + h * k3p);
    (
        y.0 + h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g),
        y.1 + h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p),
    )
}

/// Integrates the `g`-form of the profile ODE from `ξ = 1 − eps_tip`
/// toward the origin at a trial `β`, switching the branch coefficient
/// where the indicator changes sign and stopping early if `f` reaches
/// zero (the shot "went complex"; reported as a negative residual for
/// bracketing).
pub fn integrate_profile(beta: f64, prob: &EigenProblem) -> Result<ShotResult, SolverError> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(invalid(format!("beta must lie in (0, 0.5), got {beta}")));
    }
    if !(prob.eps_tip > 0.0 && prob.eps_tip < 1.0) {
        return Err(invalid(format!("eps_tip out of range: {}", prob.eps_tip)));
    }
    if !(prob.step > 0.0 && prob.step < 1.0) {
        return Err(invalid(format!("step out of range: {}", prob.step)));
    }

    let ratio = prob.ratio;
    // With equal diffusivities the branches carry the same coefficient
    // and the indicator sign is irrelevant.
    let monitor_switch = ratio < 1.0;

    let mut xi = 1.0 - prob.eps_tip;
    let mut y = taylor_start(beta, ratio, prob.eps_tip)?;
    // The tip is always on the advancing branch: s(1⁻) = −β²/2 + O(ε).
    let mut sign_negative = true;
    let coeff = |neg: bool| if neg { 1.0 } else { ratio };

    let cap = (1.0 / prob.step) as usize + 16;
    let mut xis = Vec::with_capacity(cap + 2);
    let mut gs = Vec::with_capacity(cap + 2);
    // exact tip value, then the Taylor start
    xis.push(1.0);
    gs.push(0.0);
    xis.push(xi);
    gs.push(y.0);

    let mut switch_point: Option<f64> = None;
    let mut crossing: Option<f64> = None;

    let acceptable = |neg: bool, xi1: f64, y1: (f64, f64)| -> bool {
        if !(y1.0.is_finite() && y1.1.is_finite()) {
            return false;
        }
        if y1.0 < 0.0 {
            return false;
        }
        if monitor_switch && y1.0 > 0.0 {
            let s = indicator(beta, xi1, y1.0, y1.1);
            if s.is_nan() || (s < 0.0) != neg && s != 0.0 {
                return false;
            }
        }
        true
    };

    'march: while xi > 0.0 {
        // Near the degenerate tip `g` varies over the scale of the
        // distance to it; grading the step with that distance keeps the
        // √g evaluations well conditioned until the nominal step takes
        // over.
        let tip_dist = 1.0 - xi;
        let h = prob.step.min(xi).min((0.1 * tip_dist).max(prob.eps_tip * 0.1));
        let c = coeff(sign_negative);
        let trial = rk4_step(beta, c, xi, y, -h);
        if acceptable(sign_negative, xi - h, trial) {
            xi -= h;
            if xi < 1e-15 {
                xi = 0.0;
            }
            y = trial;
            xis.push(xi);
            gs.push(y.0);
            continue;
        }

        // An event lies inside (0, h]: find the largest acceptable
        // sub-step by bisection, then classify the failure just past it.
        // Crossings need the tighter width; it also satisfies the switch
        // requirement.
        let loc_tol = CROSSING_LOC_TOL.min(SWITCH_LOC_TOL);
        let mut lo = 0.0_f64;
        let mut hi = h;
        let mut y_lo = y;
        while hi - lo > loc_tol {
            let mid = 0.5 * (lo + hi);
            let t = rk4_step(beta, c, xi, y, -mid);
            if acceptable(sign_negative, xi - mid, t) {
                lo = mid;
                y_lo = t;
            } else {
                hi = mid;
            }
        }
        let just_past = rk4_step(beta, c, xi, y, -hi);
        let crossed = !just_past.0.is_finite() || !just_past.1.is_finite() || just_past.0 <= 0.0;
        if crossed {
            // f touched zero at λ ≈ ξ − hi.
            let lambda = (xi - hi).max(0.0);
            y = y_lo;
            xis.push(lambda);
            gs.push(0.0);
            crossing = Some(lambda);
            break 'march;
        }
        // Branch switch: advance to the localized point and flip.
        xi -= lo;
        y = y_lo;
        xis.push(xi);
        gs.push(y.0);
        sign_negative = !sign_negative;
        if switch_point.is_none() {
            switch_point = Some(xi);
        }
        if xi <= 0.0 {
            break 'march;
        }
    }

    let residual = match crossing {
        Some(lambda) => -lambda,
        None => y.0,
    };

    // ascending order for interpolation
    xis.reverse();
    gs.reverse();

    // The terminal derivative of the marched state is polluted by the
    // square-root singularity of the right-hand side where g → 0; the
    // sample secants stay clean, so the edge slope is recovered from
    // them with the √δ correction extrapolated away.
    let g_prime_left = edge_slope(&xis, &gs);

    Ok(ShotResult {
        xi: xis,
        g: gs,
        residual,
        crossing,
        switch_point,
        g_prime_left,
    })
}

/// Finds the eigenvalue `β(ratio)` by bisection on the signed shot
/// residual over an initial bracket `[0.05, 0.45]`, expanded when the
/// residual does not change sign across it.
pub fn shoot_beta(ratio: f64, tol: f64) -> Result<EigenResult, SolverError> {
    if !(tol > 0.0) {
        return Err(invalid(format!("tol must be positive, got {tol}")));
    }
    let prob = EigenProblem::new(ratio)?.with_tol(tol);
    shoot_beta_with(&prob)
}

/// Same as [`shoot_beta`] with full control over the integration
/// parameters.
pub fn shoot_beta_with(prob: &EigenProblem) -> Result<EigenResult, SolverError> {
    let residual_at = |beta: f64| -> Result<f64, SolverError> {
        Ok(integrate_profile(beta, prob)?.residual)
    };

    let mut lo = 0.05_f64;
    let mut hi = 0.45_f64;
    let mut r_lo = residual_at(lo)?;
    let mut r_hi = residual_at(hi)?;
    // Expand toward (0, 0.5) if the bracket does not straddle the root.
    let mut expand = 0;
    while r_lo > 0.0 && expand < 6 {
        lo *= 0.5;
        r_lo = residual_at(lo)?;
        expand += 1;
    }
    expand = 0;
    while r_hi < 0.0 && expand < 6 {
        hi = 0.5 * (hi + 0.5);
        r_hi = residual_at(hi)?;
        expand += 1;
    }
    if r_lo > 0.0 || r_hi < 0.0 {
        return Err(SolverError::Convergence(format!(
            "no sign change in shot residual for ratio {}: r({lo}) = {r_lo}, r({hi}) = {r_hi}",
            prob.ratio
        )));
    }

    while hi - lo > prob.tol {
        let mid = 0.5 * (lo + hi);
        let r = residual_at(mid)?;
        if r >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // The upper end reaches the origin with a small nonnegative residual
    // and a profile positive throughout (0, 1).
    let shot = integrate_profile(hi, prob)?;
    let f = shot.g.iter().map(|&g| g.max(0.0).sqrt()).collect();
    Ok(EigenResult {
        beta: hi,
        ratio: prob.ratio,
        xi: shot.xi,
        f,
        switch_point: shot.switch_point,
        residual: shot.residual,
        g_prime_origin: shot.g_prime_left,
    })
}

/// Builds the exact self-similar drainage solution at `ratio = 1` for a
/// prescribed `β < 0.25`: the shot profile crosses zero at an interior
/// `λ`, which becomes the left front of the receding mound.
pub fn drainage_similarity(beta: f64) -> Result<DrainageSimilarity, SolverError> {
    drainage_similarity_with(beta, &EigenProblem::new(1.0).expect("ratio 1 is valid"))
}

/// Same as [`drainage_similarity`] with explicit integration parameters
/// (the ratio is forced to 1, the validated case).
pub fn drainage_similarity_with(
    beta: f64,
    prob: &EigenProblem,
) -> Result<DrainageSimilarity, SolverError> {
    if !(beta > 0.0 && beta < 0.25) {
        return Err(invalid(format!(
            "drainage similarity needs beta in (0, 0.25), got {beta}"
        )));
    }
    let mut prob = *prob;
    prob.ratio = 1.0;
    let shot = integrate_profile(beta, &prob)?;
    let lambda = shot.crossing.ok_or_else(|| {
        SolverError::Convergence(format!(
            "profile did not cross zero in (0, 1) at beta {beta}; \
             crossing requires beta < 0.25"
        ))
    })?;
    // keep samples on [λ, 1]
    let start = shot.xi.partition_point(|&x| x < lambda);
    let xi: Vec<f64> = shot.xi[start..].to_vec();
    let f: Vec<f64> = shot.g[start..]
        .iter()
        .map(|&g| g.max(0.0).sqrt())
        .collect();
    Ok(DrainageSimilarity {
        beta,
        lambda,
        xi,
        f,
        c_x: 1.0,
        c_h: 1.0,
        g_prime_at_left: shot.g_prime_left,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_start_tip_values() {
        let (g, gp) = taylor_start(0.25, 1.0, 0.0).unwrap();
        assert_eq!(g, 0.0);
        assert_eq!(gp, 0.0);
    }

    #[test]
    fn taylor_start_leading_order() {
        // g(1−ε) ≈ (β²/4) ε² with a relative cubic correction of order ε
        let beta = 0.25;
        let eps = 1e-6;
        let (g, _) = taylor_start(beta, 1.0, eps).unwrap();
        let lead = beta * beta / 4.0 * eps * eps;
        assert!((g / lead - 1.0).abs() < 1e-5, "g/lead = {}", g / lead);
    }

    #[test]
    fn taylor_start_rejects_bad_eps() {
        assert!(taylor_start(0.25, 1.0, 1.0).is_err());
        assert!(taylor_start(0.25, 1.0, -0.1).is_err());
        assert!(taylor_start(0.0, 1.0, 0.1).is_err());
    }

    /// ODE residual of the truncated series is O(ε²): evaluate
    /// g'' + c·s on the series and compare magnitudes across ε.
    #[test]
    fn taylor_series_satisfies_ode_to_second_order() {
        let beta = 0.2;
        let res = |eps: f64| {
            let (g, gp) = taylor_start(beta, 1.0, eps).unwrap();
            // series second derivative w.r.t. ξ equals the ε one
            let c2 = beta * beta / 4.0;
            let c3 = -beta * (1.0 - beta) / 8.0;
            let gpp = 2.0 * c2 + 6.0 * c3 * eps;
            gpp + indicator(beta, 1.0 - eps, g, gp)
        };
        let r2 = res(1e-2).abs();
        let r3 = res(1e-3).abs();
        let lead = beta * beta / 2.0;
        assert!(r2 < 0.05 * lead, "residual {r2} not small next to {lead}");
        assert!(r3 < r2 / 30.0, "residuals {r2} -> {r3} not O(eps^2)");
    }

    #[test]
    fn ratio_one_anchor_beta_quarter() {
        let res = shoot_beta(1.0, 1e-6).unwrap();
        assert!(
            (res.beta - 0.25).abs() < 5e-4,
            "beta(1) = {}, expected 0.25",
            res.beta
        );
        assert_eq!(res.alpha(), 1.0 - 2.0 * res.beta);
        assert_eq!(res.gamma(), 4.0 * res.alpha() - 2.0);
        assert_eq!(res.epsilon_exp(), 1.0 - 4.0 * res.beta);
        assert!(res.switch_point.is_none());
        // boundary conditions of the converged profile
        assert!(res.f.first().unwrap().abs() < 1e-2);
        assert!(res.f.last().unwrap().abs() < 1e-2);
        assert!(res.f[1..res.f.len() - 1].iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn residual_small_at_exact_quarter() {
        let prob = EigenProblem::new(1.0).unwrap();
        let shot = integrate_profile(0.25, &prob).unwrap();
        assert!(
            shot.residual.abs() < 1e-4,
            "residual at beta = 0.25: {}",
            shot.residual
        );
    }

    #[test]
    fn low_beta_crosses_zero_inside() {
        let prob = EigenProblem::new(1.0).unwrap();
        let shot = integrate_profile(0.2, &prob).unwrap();
        let lambda = shot.crossing.expect("beta = 0.2 must cross");
        assert!(lambda > 0.0 && lambda < 1.0, "lambda = {lambda}");
        assert!(shot.residual < 0.0);
    }

    #[test]
    fn residuals_bracket_the_root() {
        let prob = EigenProblem::new(1.0).unwrap();
        let below = integrate_profile(0.24, &prob).unwrap().residual;
        let above = integrate_profile(0.26, &prob).unwrap().residual;
        assert!(below < 0.0, "residual below root: {below}");
        assert!(above > 0.0, "residual above root: {above}");
    }

    #[test]
    fn beta_decreases_with_ratio() {
        let ratios = [1.0, 0.8, 0.6, 0.45, 0.3];
        let betas: Vec<f64> = ratios
            .iter()
            .map(|&r| shoot_beta(r, 1e-6).unwrap().beta)
            .collect();
        for w in betas.windows(2) {
            assert!(w[1] < w[0], "betas not strictly decreasing: {betas:?}");
        }
        for &b in &betas {
            assert!(b > 0.0 && b <= 0.25 + 1e-5, "beta out of range: {b}");
        }
    }

    #[test]
    fn switch_point_present_for_retention() {
        let res = shoot_beta(0.5, 1e-6).unwrap();
        let z = res.switch_point.expect("ratio < 1 must switch branch");
        assert!(z > 0.0 && z < 1.0, "switch at {z}");
    }

    #[test]
    fn converged_profile_satisfies_ode_pointwise() {
        // substitute (g, g', g'') from finite differences of the stored
        // profile into the ODE on both branches
        let prob = EigenProblem::new(0.5).unwrap();
        let res = shoot_beta_with(&prob).unwrap();
        let beta = res.beta;
        let g: Vec<f64> = res.f.iter().map(|&v| v * v).collect();
        let n = res.xi.len();
        let mut worst = 0.0_f64;
        // skip neighborhoods of the endpoints and the branch switch where
        // one-sided behavior dominates
        let z = res.switch_point.unwrap();
        for i in 2..n - 2 {
            let xi = res.xi[i];
            if !(0.05..=0.95).contains(&xi) || (xi - z).abs() < 0.01 {
                continue;
            }
            let hl = res.xi[i] - res.xi[i - 1];
            let hr = res.xi[i + 1] - res.xi[i];
            if (hl - hr).abs() > 1e-9 {
                continue; // uneven spacing near a localized event
            }
            let gpp = (g[i - 1] - 2.0 * g[i] + g[i + 1]) / (hl * hr);
            let gp = (g[i + 1] - g[i - 1]) / (hl + hr);
            let s = indicator(beta, xi, g[i], gp);
            let coeff = if s < 0.0 { 1.0 } else { prob.ratio };
            worst = worst.max((gpp + coeff * s).abs());
        }
        assert!(worst < 1e-3, "worst pointwise ODE residual {worst}");
    }

    #[test]
    fn refinement_stability_of_beta() {
        let base = EigenProblem::new(0.7).unwrap();
        let fine = base.with_step(base.step / 2.0);
        let b0 = shoot_beta_with(&base).unwrap().beta;
        let b1 = shoot_beta_with(&fine).unwrap().beta;
        assert!(
            (b0 - b1).abs() < base.tol,
            "beta moved {} under step halving",
            (b0 - b1).abs()
        );
    }

    #[test]
    fn eps_tip_insensitivity() {
        let betas: Vec<f64> = [1e-7, 1e-6, 1e-5, 1e-4]
            .iter()
            .map(|&e| {
                let prob = EigenProblem::new(0.5).unwrap().with_eps_tip(e);
                shoot_beta_with(&prob).unwrap().beta
            })
            .collect();
        let spread = betas
            .iter()
            .fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - betas.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        assert!(spread < 1e-5, "beta spread over eps_tip: {spread}");
    }

    #[test]
    fn drainage_similarity_flux_exponent() {
        let sim = drainage_similarity(0.2).unwrap();
        assert!(sim.lambda > 0.0 && sim.lambda < 1.0, "lambda {}", sim.lambda);
        assert!((sim.flux_exponent() + 1.4).abs() < 1e-12);
        assert!(sim.g_prime_at_left > 0.0);
        // f(λ) = f(1) = 0 within tolerance, positive between
        assert!(sim.f.first().unwrap().abs() < 1e-3);
        assert!(sim.f.last().unwrap().abs() < 1e-3);
        let mid = sim.f.len() / 2;
        assert!(sim.f[mid] > 0.0);
    }

    #[test]
    fn lambda_shrinks_toward_dipole_limit() {
        let l1 = drainage_similarity(0.2).unwrap().lambda;
        let l2 = drainage_similarity(0.23).unwrap().lambda;
        let l3 = drainage_similarity(0.245).unwrap().lambda;
        assert!(l2 < l1 && l3 < l2, "lambda not shrinking: {l1}, {l2}, {l3}");
        assert!(l3 < 0.35, "lambda should approach 0 near beta = 0.25, got {l3}");
    }

    #[test]
    fn lambda_golden_value_stable_under_refinement() {
        // golden value frozen from a doubled-resolution integration;
        // both resolutions must agree to 4 digits
        let coarse = drainage_similarity_with(0.2, &EigenProblem::new(1.0).unwrap()).unwrap();
        let fine = drainage_similarity_with(
            0.2,
            &EigenProblem::new(1.0).unwrap().with_step(5e-5),
        )
        .unwrap();
        assert!(
            (coarse.lambda - fine.lambda).abs() < 5e-5,
            "lambda {} vs refined {}",
            coarse.lambda,
            fine.lambda
        );
    }

    #[test]
    fn similarity_evaluation_geometry() {
        let sim = drainage_similarity(0.2).unwrap();
        let t = 4.0;
        // outside the support, and exactly at the tip
        assert_eq!(sim.height(sim.x_right(t) * 1.01, t), 0.0);
        assert_eq!(sim.height(sim.x_right(t), t), 0.0);
        assert_eq!(sim.height(sim.x_left(t) * 0.9, t), 0.0);
        // self-consistency: eval at ξ·C_x·t^β over C_h·t^{−(1−2β)} is f(ξ)
        let xi_probe = 0.5 * (sim.lambda + 1.0);
        let x = xi_probe * sim.c_x * t.powf(sim.beta);
        let h = eval_similarity(&sim, x, t);
        let f_back = h / (sim.c_h * t.powf(-(1.0 - 2.0 * sim.beta)));
        let f_direct = interp(&sim.xi, &sim.f, xi_probe);
        assert!((f_back - f_direct).abs() < 1e-12);
    }

    #[test]
    fn drainage_similarity_rejects_dipole_range() {
        assert!(drainage_similarity(0.25).is_err());
        assert!(drainage_similarity(0.3).is_err());
        assert!(drainage_similarity(0.0).is_err());
    }
}
