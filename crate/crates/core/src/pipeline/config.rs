use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamparse::{eval_real, PolynomialForm};
use crate::hgm::OdeOptions;
use crate::orealg::GbLimits;
use crate::ring::{MonomialOrder, NumPoint, Precision, VarContext};

/// Everything a pipeline run depends on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub hamiltonian: String,
    pub n: usize,
    /// Numeric parameter values; parameters are ordered by name.
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Base point entries as real expressions in the parameters, `pi` and `e`.
    pub base_point: Vec<String>,
    #[serde(default)]
    pub order: MonomialOrder,
    #[serde(default)]
    pub polynomial_form: PolynomialForm,
    #[serde(default)]
    pub precision: Precision,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gamma: GammaBudget,
    #[serde(default)]
    pub ode: OdeOptions,
    #[serde(default)]
    pub verify: VerifyConfig,
    /// Explicit boundary vectors `qbar_2 .. qbar_n`, replacing the solver's choice.
    #[serde(default)]
    pub qbars: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GammaBudget {
    pub l_max: usize,
    #[serde(flatten)]
    pub limits: GbLimits,
}

impl Default for GammaBudget {
    fn default() -> Self {
        GammaBudget { l_max: 6, limits: GbLimits::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Random points for the Poisson-bracket check.
    pub samples: usize,
    /// Sampling radius around the base point.
    pub radius: f64,
    pub flow_duration: f64,
    pub flow_samples: usize,
    /// Points of the x-path used to reconstruct `v`.
    pub path_points: usize,
    pub path_step: f64,
    /// Direction of the x-path; defaults to `(1, .., 1)`.
    pub path_direction: Option<Vec<f64>>,
    pub tolerances: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            samples: 20,
            radius: 0.5,
            flow_duration: 0.5,
            flow_samples: 50,
            path_points: 10,
            path_step: 0.01,
            path_direction: None,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub poisson: f64,
    pub conservation: f64,
    pub residual: f64,
    pub symmetry: f64,
    /// Bound on `|f_k|` at the base point for it to count as a point of the manifold.
    pub manifold: f64,
    /// Relative agreement of values recomputed with tightened integrator tolerances.
    pub refinement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            poisson: 1e-6,
            conservation: 1e-6,
            residual: 1e-6,
            symmetry: 1e-4,
            manifold: 1e-8,
            refinement: 1e-7,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: PipelineConfig = toml::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("n must be at least 1".into()));
        }
        if self.base_point.len() != 2 * self.n {
            return Err(Error::Dimension(format!(
                "base point has {} entries, expected {}",
                self.base_point.len(),
                2 * self.n
            )));
        }
        let v = &self.verify;
        let t = &v.tolerances;
        let positive = [
            self.ode.rtol,
            self.ode.atol,
            v.radius,
            v.flow_duration,
            v.path_step,
            t.poisson,
            t.conservation,
            t.residual,
            t.symmetry,
            t.manifold,
            t.refinement,
        ];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::Invalid("tolerances, radius, durations and steps must be positive".into()));
        }
        if let Some(d) = &v.path_direction {
            if d.len() != self.n || d.iter().all(|x| *x == 0.0) {
                return Err(Error::Invalid(format!("path direction must be a nonzero vector of length {}", self.n)));
            }
        }
        if let Some(qs) = &self.qbars {
            if qs.len() + 1 != self.n {
                return Err(Error::Dimension(format!(
                    "{} explicit boundary vectors given, expected {}",
                    qs.len(),
                    self.n - 1
                )));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> VarContext {
        VarContext::new(self.n, self.params.keys().cloned().collect())
    }

    pub fn param_values(&self) -> Vec<f64> {
        self.params.values().copied().collect()
    }

    pub fn base_point(&self) -> Result<NumPoint> {
        let bindings: Vec<(String, f64)> = self.params.iter().map(|(k, v)| (k.clone(), *v)).collect();
        let coords = self.base_point.iter().map(|e| eval_real(e, &bindings)).collect::<Result<Vec<_>>>()?;
        NumPoint::new(coords, self.param_values())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
hamiltonian = "-2*p1*sin(x1) + 2*x2*p2 - a*p2^2 + b*x1^4"
n = 2
base_point = ["pi/6", "1", "b*(pi/6)^4", "2/a"]
[params]
b = 1
a = 2
[gamma]
l_max = 4
max_pairs = 100
"#;

    #[test]
    fn parses_and_evaluates_the_base_point() {
        let c = PipelineConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.context().params, vec!["a".to_string(), "b".to_string()]);
        assert_eq!(c.gamma.l_max, 4);
        assert_eq!(c.gamma.limits.max_pairs, 100);
        assert_eq!(c.gamma.limits.max_basis, 500);
        let z = c.base_point().unwrap();
        assert_eq!(z.params, vec![2.0, 1.0]);
        assert!((z.coords[0] - std::f64::consts::PI / 6.0).abs() < 1e-15);
        assert_eq!(z.coords[3], 1.0);
        assert_eq!(c.precision, Precision::Double);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(PipelineConfig::from_toml("hamiltonian = \"x1\"\nn = 1\nbase_point = [\"1\"]").is_err());
        assert!(PipelineConfig::from_toml("hamiltonian = \"x1\"\nn = 0\nbase_point = []").is_err());
        assert!(
            PipelineConfig::from_toml("hamiltonian = \"x1\"\nn = 1\nbase_point = [\"1\", \"1\"]\nbogus = 3").is_err()
        );
    }
}
