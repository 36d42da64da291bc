//! Physical parameters of the two-phase cell and the derived constants.

use crate::error::{Error, Result};

/// Fluid and cell parameters. The `minus` phase sits below the interface.
///
/// The derived constants are
/// `a_mu = (mu_- - mu_+)/(mu_- + mu_+)` (always in `(-1, 1)`),
/// `b_mu = k/(mu_- + mu_+)` and
/// `Theta = g (rho_- - rho_+) + (mu_- - mu_+) V / k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mu_minus: f64,
    pub mu_plus: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub gravity: f64,
    pub permeability: f64,
    pub surface_tension: f64,
    pub cell_speed: f64,
}

impl PhysicalParams {
    pub fn new(
        mu_minus: f64,
        mu_plus: f64,
        rho_minus: f64,
        rho_plus: f64,
        gravity: f64,
        permeability: f64,
        surface_tension: f64,
        cell_speed: f64,
    ) -> Result<Self> {
        let p = PhysicalParams {
            mu_minus,
            mu_plus,
            rho_minus,
            rho_plus,
            gravity,
            permeability,
            surface_tension,
            cell_speed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_minus", self.mu_minus),
            ("mu_plus", self.mu_plus),
            ("rho_minus", self.rho_minus),
            ("rho_plus", self.rho_plus),
            ("permeability", self.permeability),
            ("surface_tension", self.surface_tension),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gravity.is_finite() && self.gravity >= 0.0) {
            return Err(Error::invalid(format!(
                "gravity must be nonnegative, got {}",
                self.gravity
            )));
        }
        if !self.cell_speed.is_finite() {
            return Err(Error::invalid("cell_speed must be finite".to_string()));
        }
        Ok(())
    }

    /// Viscosity contrast `(mu_- - mu_+)/(mu_- + mu_+)`; lies in `(-1, 1)`
    /// for any positive viscosities.
    pub fn a_mu(&self) -> f64 {
        (self.mu_minus - self.mu_plus) / (self.mu_minus + self.mu_plus)
    }

    /// Mobility constant `k/(mu_- + mu_+)`.
    pub fn b_mu(&self) -> f64 {
        self.permeability / (self.mu_minus + self.mu_plus)
    }

    /// Driving coefficient `Theta = g (rho_- - rho_+) + (mu_- - mu_+) V / k`.
    /// Positive values are the gravitationally stable regime.
    pub fn theta_coefficient(&self) -> f64 {
        self.gravity * (self.rho_minus - self.rho_plus)
            + (self.mu_minus - self.mu_plus) * self.cell_speed / self.permeability
    }
}

impl Default for PhysicalParams {
    /// Stock parameter set exercising nonzero viscosity contrast in the
    /// stable regime: `a_mu = 1/3`, `b_mu = 1/3`, `Theta = 1`.
    fn default() -> Self {
        PhysicalParams {
            mu_minus: 2.0,
            mu_plus: 1.0,
            rho_minus: 2.0,
            rho_plus: 1.0,
            gravity: 1.0,
            permeability: 1.0,
            surface_tension: 1.0,
            cell_speed: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants_of_default_set() {
        let p = PhysicalParams::default();
        assert!((p.a_mu() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.b_mu() - 1.0 / 3.0).abs() < 1e-15);
        assert!((p.theta_coefficient() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn a_mu_stays_in_open_unit_interval() {
        for (lo, hi) in [(1e-6, 1e6), (3.0, 1.0), (1.0, 1.0)] {
            let p = PhysicalParams::new(lo, hi, 2.0, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
            assert!(p.a_mu().abs() < 1.0);
        }
    }

    #[test]
    fn cell_speed_feeds_theta() {
        let p = PhysicalParams::new(2.0, 1.0, 1.0, 1.0, 1.0, 0.5, 1.0, 3.0).unwrap();
        // rho contrast zero: Theta = (mu_- - mu_+) V / k = 1 * 3 / 0.5
        assert!((p.theta_coefficient() - 6.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_viscosity() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 0.0).is_err());
    }
}
