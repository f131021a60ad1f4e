use std::path::{Path, PathBuf};

use impulse_dividend::sim::default_horizon;
use impulse_dividend::Params;
use serde::{Deserialize, Serialize};

pub const AXES: [&str; 7] = ["beta", "a", "mu_minus", "sigma_minus", "mu_plus", "sigma_plus", "q"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: ParamsConfig,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub mu_plus: f64,
    pub sigma_plus: f64,
    pub mu_minus: f64,
    pub sigma_minus: f64,
    pub a: f64,
    pub q: f64,
    pub beta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            mu_plus: 0.1,
            sigma_plus: 0.1,
            mu_minus: 0.5,
            sigma_minus: 0.5,
            a: 1.0,
            q: 0.05,
            beta: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub dt: f64,
    /// Defaults to `max(20 / q, 50)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    pub n_paths: usize,
    pub antithetic: bool,
    pub store_paths: bool,
    /// Initial surplus; defaults to the lower barrier.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    /// Barriers to simulate instead of the solver's pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: None,
            n_paths: 100_000,
            antithetic: true,
            store_paths: false,
            x0: None,
            z1: None,
            z2: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub axis: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            axis: "beta".into(),
            from: 0.1,
            to: 2.0,
            steps: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSection {
    pub n1: usize,
    pub n2: usize,
    pub refine_rounds: usize,
    pub top_k: usize,
    /// Upper end of both lattice axes; defaults to twice the solver's bound.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_max: Option<f64>,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            n1: 400,
            n2: 400,
            refine_rounds: 3,
            top_k: 5,
            z_max: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z2: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: None,
            params: ParamsConfig::default(),
            sim: SimSection::default(),
            sweep: SweepSection::default(),
            oracle: OracleSection::default(),
            verify: VerifySection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    #[cfg(test)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn model(&self) -> Result<Params, String> {
        let p = self.params;
        Params::new(p.mu_plus, p.sigma_plus, p.mu_minus, p.sigma_minus, p.a, p.q, p.beta).map_err(|e| e.to_string())
    }

    pub fn horizon(&self) -> f64 {
        self.sim.horizon.unwrap_or_else(|| default_horizon(self.params.q))
    }

    /// Fills in every default that depends on other values so the embedded
    /// copy reproduces the run on its own.
    pub fn resolve(mut self) -> Self {
        self.sim.horizon = Some(self.horizon());
        self
    }

    pub fn check_sweep(&self) -> Result<(), String> {
        let s = &self.sweep;
        if !AXES.contains(&s.axis.as_str()) {
            return Err(format!("unknown sweep axis `{}`; expected one of {}", s.axis, AXES.join(", ")));
        }
        if !(s.from.is_finite() && s.to.is_finite()) {
            return Err(format!("sweep range must be finite, got [{}, {}]", s.from, s.to));
        }
        if s.steps == 0 {
            return Err("sweep steps must be at least 1".into());
        }
        Ok(())
    }

    pub fn sweep_values(&self) -> Vec<f64> {
        let s = &self.sweep;
        if s.steps == 1 {
            return vec![s.from];
        }
        (0..s.steps)
            .map(|i| s.from + (s.to - s.from) * i as f64 / (s.steps - 1) as f64)
            .collect()
    }

    pub fn with_axis(&self, value: f64) -> Self {
        let mut c = self.clone();
        let p = &mut c.params;
        match self.sweep.axis.as_str() {
            "beta" => p.beta = value,
            "a" => p.a = value,
            "mu_minus" => p.mu_minus = value,
            "sigma_minus" => p.sigma_minus = value,
            "mu_plus" => p.mu_plus = value,
            "sigma_plus" => p.sigma_plus = value,
            "q" => p.q = value,
            other => unreachable!("axis {other} passed validation"),
        }
        c
    }
}
