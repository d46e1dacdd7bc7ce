use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Material and discretization parameters. Every field defaults to one
/// except the storage coefficient `c0`, which defaults to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Fluid viscosity.
    pub mu_f: f64,
    /// Solid shear modulus.
    pub mu_s: f64,
    /// Solid first Lamé parameter.
    pub lambda: f64,
    /// Biot-Willis coefficient.
    pub alpha: f64,
    /// Constrained specific storage.
    pub c0: f64,
    /// Scalar permeability.
    pub kappa: f64,
    /// Beavers-Joseph-Saffman slip coefficient.
    pub gamma: f64,
    pub rho_f: f64,
    pub rho_s: f64,
    /// Time step. The assembled operator is that of one backward Euler step
    /// with unit step, so only `dt = 1` is accepted.
    pub dt: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu_f: 1.0,
            mu_s: 1.0,
            lambda: 1.0,
            alpha: 1.0,
            c0: 0.0,
            kappa: 1.0,
            gamma: 1.0,
            rho_f: 1.0,
            rho_s: 1.0,
            dt: 1.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu_f", self.mu_f),
            ("mu_s", self.mu_s),
            ("lambda", self.lambda),
            ("alpha", self.alpha),
            ("kappa", self.kappa),
            ("dt", self.dt),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and positive",
                });
            }
        }
        for (name, value) in [("c0", self.c0), ("gamma", self.gamma), ("rho_f", self.rho_f), ("rho_s", self.rho_s)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and non-negative",
                });
            }
        }
        if self.dt != 1.0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: self.dt,
                reason: "only a unit time step is supported",
            });
        }
        Ok(())
    }

    /// Slip coefficient `γ μ_f / √κ` of the tangential interface term.
    pub fn slip(&self) -> f64 {
        self.gamma * self.mu_f / self.kappa.sqrt()
    }

    /// Weight of the fractional interface term, `1/(2μ_s) + 1/(2μ_f)`.
    pub fn interface_weight(&self) -> f64 {
        0.5 / self.mu_s + 0.5 / self.mu_f
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Params = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameters serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_toml() {
        let p = Params::from_toml_str("kappa = 1e-4\nmu_f = 0.5\n").unwrap();
        assert_eq!(p.kappa, 1e-4);
        assert_eq!(p.mu_f, 0.5);
        assert_eq!(p.c0, 0.0);
        assert_eq!(p.lambda, 1.0);
        let back = Params::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(matches!(
            Params::from_toml_str("lambda = 0.0"),
            Err(Error::InvalidParameter { name: "lambda", .. })
        ));
        assert!(matches!(Params::from_toml_str("c0 = -1.0"), Err(Error::InvalidParameter { name: "c0", .. })));
        assert!(Params::from_toml_str("unknown = 1.0").is_err());
        assert!(Params::from_toml_str("dt = 0.5").is_err());
    }

    #[test]
    fn derived_coefficients() {
        let p = Params {
            mu_f: 2.0,
            kappa: 4.0,
            gamma: 3.0,
            ..Params::default()
        };
        assert_eq!(p.slip(), 3.0);
        assert_eq!(p.interface_weight(), 0.75);
    }
}
