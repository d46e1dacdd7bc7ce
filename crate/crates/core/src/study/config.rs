use serde::{Deserialize, Serialize};

use crate::assembly::Params;
use crate::exec::Execution;
use crate::interface::{FractionalVariant, StrongElimination};
use crate::linalg::minres::{MinresSettings, DEFAULT_MAXIT, DEFAULT_RTOL};
use crate::mesh::BcConfig;
use crate::precond::{InterfaceOptions, PreconditionerKind};
use crate::{Error, Result};

/// Optional overrides of a study's built-in defaults, read from TOML.
///
/// ```toml
/// bc = "vel-disp"
/// levels = [4, 8, 16]
/// kinds = ["rf", "rd"]
/// variant = "dirichlet-nitsche"
///
/// [params]
/// kappa = 1e-10
///
/// [grid]
/// mu_f = [1.0, 1e-4]
/// ```
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub bc: Option<BcConfig>,
    pub levels: Option<Vec<usize>>,
    pub kinds: Option<Vec<PreconditionerKind>>,
    pub variant: Option<FractionalVariant>,
    pub strong_elimination: Option<StrongElimination>,
    pub nitsche_beta: Option<f64>,
    pub rtol: Option<f64>,
    pub maxit: Option<usize>,
    pub seed: Option<u64>,
    pub execution: Option<Execution>,
    /// Base parameter overrides (any subset of the parameter keys).
    pub params: Option<toml::Table>,
    pub grid: Option<Grid>,
}

/// Parameter grid; every unset axis keeps the study default.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub mu_f: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
    pub lambda: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub rtol: f64,
    pub maxit: usize,
    pub seed: u64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            maxit: DEFAULT_MAXIT,
            seed: 0,
        }
    }
}

impl SolverSettings {
    pub fn minres(&self) -> MinresSettings {
        MinresSettings {
            rtol: self.rtol,
            maxit: self.maxit,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(levels) = &self.levels {
            if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse("levels must be nonempty and strictly ascending".into()));
            }
        }
        if let Some(k) = &self.kinds {
            if k.is_empty() {
                return Err(Error::Parse("kinds must be nonempty".into()));
            }
        }
        if let Some(g) = &self.grid {
            for axis in [&g.mu_f, &g.kappa, &g.lambda, &g.alpha, &g.gamma].into_iter().flatten() {
                if axis.is_empty() {
                    return Err(Error::Parse("grid axes must be nonempty".into()));
                }
            }
        }
        if let Some(rtol) = self.rtol {
            if !(rtol > 0.0 && rtol < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "rtol",
                    value: rtol,
                    reason: "must lie in (0, 1)",
                });
            }
        }
        self.apply_params(Params::default())?;
        Ok(())
    }

    /// Applies the `[params]` overrides to `base`.
    pub fn apply_params(&self, base: Params) -> Result<Params> {
        let Some(over) = &self.params else { return Ok(base) };
        let mut table: toml::Table = toml::from_str(&base.to_toml_string()).map_err(|e| Error::Parse(e.to_string()))?;
        for (k, v) in over {
            let v = match v {
                toml::Value::Integer(i) => toml::Value::Float(*i as f64),
                other => other.clone(),
            };
            table.insert(k.clone(), v);
        }
        Params::from_toml_str(&toml::to_string(&table).map_err(|e| Error::Parse(e.to_string()))?)
    }

    pub fn settings(&self) -> SolverSettings {
        let d = SolverSettings::default();
        SolverSettings {
            rtol: self.rtol.unwrap_or(d.rtol),
            maxit: self.maxit.unwrap_or(d.maxit),
            seed: self.seed.unwrap_or(d.seed),
        }
    }

    pub fn interface_options(&self, default_variant: FractionalVariant) -> InterfaceOptions {
        let d = InterfaceOptions::with_variant(self.variant.unwrap_or(default_variant));
        InterfaceOptions {
            strong: self.strong_elimination.unwrap_or(d.strong),
            nitsche_beta: self.nitsche_beta.unwrap_or(d.nitsche_beta),
            ..d
        }
    }

    pub fn levels_or(&self, default: &[usize]) -> Vec<usize> {
        self.levels.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn kinds_or(&self, default: &[PreconditionerKind]) -> Vec<PreconditionerKind> {
        self.kinds.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn execution(&self) -> Execution {
        self.execution.unwrap_or_default()
    }
}
