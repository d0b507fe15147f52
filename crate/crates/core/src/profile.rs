//! Sampled mound profiles, initial conditions, and integral observables.

use crate::error::{invalid, SolverError};

/// A sampled mound height on a uniform grid over `[x_left, x_right]`.
///
/// The end samples are zero in every problem treated here: both edges of
/// the mound are either free boundaries or a pinned outflow face.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub x_left: f64,
    pub x_right: f64,
    pub heights: Vec<f64>,
    pub time: f64,
}

impl Profile {
    /// Grid spacing of the samples.
    pub fn dx(&self) -> f64 {
        (self.x_right - self.x_left) / (self.heights.len() - 1) as f64
    }

    /// Position of sample `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_left + self.dx() * i as f64
    }

    /// Largest sampled height.
    pub fn max_height(&self) -> f64 {
        self.heights.iter().copied().fold(0.0, f64::max)
    }
}

/// Shape family for the initial mound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpShape {
    /// `h0(x) = A (1 − (2x/d − 1)²)` clipped at zero.
    Parabolic,
    /// `h0(x) = A cos(π (x − d/2) / d)`, a cosine arch truncated at its
    /// zeros; concave on its support like the parabola.
    Cosine,
}

/// Initial mound: a concave bump of amplitude `amplitude` supported on
/// `[0, width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialCondition {
    pub shape: BumpShape,
    pub amplitude: f64,
    pub width: f64,
}

impl InitialCondition {
    pub fn parabolic(amplitude: f64, width: f64) -> Self {
        Self {
            shape: BumpShape::Parabolic,
            amplitude,
            width,
        }
    }

    pub fn cosine(amplitude: f64, width: f64) -> Self {
        Self {
            shape: BumpShape::Cosine,
            amplitude,
            width,
        }
    }

    /// Height at position `x`; zero outside `[0, width]`.
    pub fn height_at(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.width {
            return 0.0;
        }
        match self.shape {
            BumpShape::Parabolic => {
                let s = 2.0 * x / self.width - 1.0;
                (self.amplitude * (1.0 - s * s)).max(0.0)
            }
            BumpShape::Cosine => {
                let s = std::f64::consts::PI * (x - 0.5 * self.width) / self.width;
                (self.amplitude * s.cos()).max(0.0)
            }
        }
    }
}

/// One row of a run's time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRecord {
    pub time: f64,
    pub x_left: f64,
    pub x_right: f64,
    pub max_height: f64,
    pub mass: f64,
    pub dipole_moment: f64,
    /// One-sided estimate of `∂x h²` at the left edge; the natural
    /// drainage observable for outflow through `x = x_left`.
    pub left_normalized_flux: f64,
}

/// Samples an initial condition on `n_samples` uniformly spaced points
/// over `[0, width]`. The end samples are exactly zero.
pub fn make_initial_profile(
    ic: &InitialCondition,
    n_samples: usize,
) -> Result<Profile, SolverError> {
    if n_samples < 8 {
        return Err(invalid(format!(
            "initial profile needs at least 8 samples, got {n_samples}"
        )));
    }
    if !(ic.width > 0.0) {
        return Err(invalid(format!(
            "support width must be positive, got {}",
            ic.width
        )));
    }
    if !(ic.amplitude >= 0.0) {
        return Err(invalid(format!(
            "amplitude must be nonnegative, got {}",
            ic.amplitude
        )));
    }
    let dx = ic.width / (n_samples - 1) as f64;
    let heights = (0..n_samples).map(|i| ic.height_at(dx * i as f64)).collect();
    Ok(Profile {
        x_left: 0.0,
        x_right: ic.width,
        heights,
        time: 0.0,
    })
}

/// Trapezoid-rule integral of `h` over the support.
pub fn mass(p: &Profile) -> f64 {
    let dx = p.dx();
    let n = p.heights.len();
    let mut sum = 0.0;
    for i in 0..n - 1 {
        sum += 0.5 * (p.heights[i] + p.heights[i + 1]);
    }
    sum * dx
}

/// Trapezoid-rule integral of `x · h` over the support.
pub fn dipole_moment(p: &Profile) -> f64 {
    let dx = p.dx();
    let n = p.heights.len();
    let mut sum = 0.0;
    for i in 0..n - 1 {
        sum += 0.5 * (p.x(i) * p.heights[i] + p.x(i + 1) * p.heights[i + 1]);
    }
    sum * dx
}

/// Second-order one-sided estimate of `∂x h²` at `x_left`.
pub fn left_normalized_flux(p: &Profile) -> f64 {
    assert!(p.heights.len() >= 3, "need at least 3 samples");
    let dx = p.dx();
    let h0 = p.heights[0] * p.heights[0];
    let h1 = p.heights[1] * p.heights[1];
    let h2 = p.heights[2] * p.heights[2];
    (-3.0 * h0 + 4.0 * h1 - h2) / (2.0 * dx)
}

/// Builds the series row for a profile at its own time stamp.
pub fn series_record(p: &Profile) -> SeriesRecord {
    SeriesRecord {
        time: p.time,
        x_left: p.x_left,
        x_right: p.x_right,
        max_height: p.max_height(),
        mass: mass(p),
        dipole_moment: dipole_moment(p),
        left_normalized_flux: left_normalized_flux(p),
    }
}
