//! Physical parameters of the porous stratum.

use crate::error::{invalid, SolverError};

/// Seepage parameters of the stratum.
///
/// `kappa1` is the diffusivity while water advances into dry pores
/// (units L²/(T·H)); `kappa2 = kappa1 / (1 − delta)` applies while water
/// recedes and a fraction `delta` of the pore volume stays trapped.
/// `porosity_m` is the active porosity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub delta: f64,
    pub porosity_m: f64,
}

impl PhysicalParams {
    /// Builds parameters from the advancing diffusivity and the trapped
    /// pore fraction. Requires `kappa1 > 0`, `0 ≤ delta < 1`,
    /// `0 < porosity_m ≤ 1`.
    pub fn new(kappa1: f64, delta: f64, porosity_m: f64) -> Result<Self, SolverError> {
        if !(kappa1 > 0.0) || !kappa1.is_finite() {
            return Err(invalid(format!("kappa1 must be positive, got {kappa1}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(invalid(format!("delta must lie in [0, 1), got {delta}")));
        }
        if !(porosity_m > 0.0 && porosity_m <= 1.0) {
            return Err(invalid(format!(
                "porosity_m must lie in (0, 1], got {porosity_m}"
            )));
        }
        Ok(Self {
            kappa1,
            kappa2: kappa1 / (1.0 - delta),
            delta,
            porosity_m,
        })
    }

    /// Builds parameters from the diffusivity ratio `r = kappa1/kappa2`
    /// in (0, 1], with `kappa1 = 1` and unit porosity. The trapped
    /// fraction is `delta = 1 − r`.
    pub fn from_ratio(ratio: f64) -> Result<Self, SolverError> {
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(invalid(format!("ratio must lie in (0, 1], got {ratio}")));
        }
        Self::new(1.0, 1.0 - ratio, 1.0)
    }

    /// Diffusivity ratio `kappa1 / kappa2 = 1 − delta`.
    pub fn ratio(&self) -> f64 {
        self.kappa1 / self.kappa2
    }

    /// Diffusivity branch for an explicit step, selected from the sign of
    /// the previous level's second difference of `h²`: `kappa1` when the
    /// profile is locally filling (positive second difference), `kappa2`
    /// when it is locally draining. The tie at exactly zero takes
    /// `kappa1`.
    pub fn kappa_select(&self, second_diff_h2: f64) -> f64 {
        if second_diff_h2 < 0.0 {
            self.kappa2
        } else {
            self.kappa1
        }
    }

    /// The larger of the two diffusivities (equals `kappa2`).
    pub fn kappa_max(&self) -> f64 {
        self.kappa1.max(self.kappa2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_ties_kappa2_to_delta() {
        let p = PhysicalParams::new(2.0, 0.5, 1.0).unwrap();
        assert_eq!(p.kappa2, 4.0);
        // kappa2 * (1 - delta) == kappa1 exactly as constructed
        assert_eq!(p.kappa2 * (1.0 - p.delta), p.kappa1);
        assert!((p.ratio() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn from_ratio_round_trips() {
        let p = PhysicalParams::from_ratio(0.25).unwrap();
        assert_eq!(p.kappa1, 1.0);
        assert!((p.ratio() - 0.25).abs() < 1e-15);
        assert!(p.kappa2 >= p.kappa1);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(PhysicalParams::new(0.0, 0.1, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, -0.1, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.1, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 0.1, 1.5).is_err());
        assert!(PhysicalParams::from_ratio(0.0).is_err());
        assert!(PhysicalParams::from_ratio(1.5).is_err());
    }

    #[test]
    fn kappa_select_branches() {
        let p = PhysicalParams::new(1.0, 0.5, 1.0).unwrap();
        assert_eq!(p.kappa_select(1.0), p.kappa1);
        assert_eq!(p.kappa_select(-1.0), p.kappa2);
        // documented tie-break
        assert_eq!(p.kappa_select(0.0), p.kappa1);
    }

    #[test]
    fn kappa_select_odd_symmetry_away_from_tie() {
        let p = PhysicalParams::new(1.0, 0.3, 0.9).unwrap();
        for d2 in [1e-9, 0.3, 7.0, 1e12] {
            let plus = p.kappa_select(d2);
            let minus = p.kappa_select(-d2);
            assert_eq!(plus, p.kappa1);
            assert_eq!(minus, p.kappa2);
            assert_ne!(plus, minus);
        }
    }
}
