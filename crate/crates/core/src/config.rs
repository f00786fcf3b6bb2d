//! Flat TOML configuration holding one market and one contract.
//!
//! ```toml
//! r = 0.05
//! delta = 0.07
//! sigma = 0.2
//! lambda = 1.0
//! p = [0.7]
//! xi = [25.0]
//! q = [0.3]
//! eta = [50.0]
//! K = 100.0
//! L = 95.0
//! rho_L = -26.34
//! gamma_L = 0.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DownOutStepSpec, HejdModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

impl Default for OneOrMany {
    fn default() -> Self {
        OneOrMany::Many(Vec::new())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PricingConfig {
    pub r: f64,
    pub delta: f64,
    pub sigma: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub p: OneOrMany,
    #[serde(default)]
    pub xi: OneOrMany,
    #[serde(default)]
    pub q: OneOrMany,
    #[serde(default)]
    pub eta: OneOrMany,
    #[serde(rename = "K")]
    pub strike: f64,
    #[serde(rename = "L", default)]
    pub barrier: f64,
    #[serde(rename = "rho_L", default)]
    pub knock_rate: f64,
    #[serde(rename = "gamma_L", default)]
    pub seasoning: f64,
}

impl PricingConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is serializable")
    }

    pub fn from_parts(model: &HejdModel, spec: &DownOutStepSpec) -> Self {
        let w = |cs: &[crate::model::JumpComponent]| OneOrMany::Many(cs.iter().map(|c| c.weight).collect());
        let a = |cs: &[crate::model::JumpComponent]| OneOrMany::Many(cs.iter().map(|c| c.rate).collect());
        PricingConfig {
            r: model.r(),
            delta: model.delta(),
            sigma: model.sigma(),
            lambda: model.lambda(),
            p: w(model.up_components()),
            xi: a(model.up_components()),
            q: w(model.down_components()),
            eta: a(model.down_components()),
            strike: spec.strike,
            barrier: spec.barrier,
            knock_rate: spec.knock_rate,
            seasoning: spec.seasoning,
        }
    }

    pub fn model(&self) -> Result<HejdModel> {
        HejdModel::new(
            self.r,
            self.delta,
            self.sigma,
            self.lambda,
            &self.p.to_vec(),
            &self.xi.to_vec(),
            &self.q.to_vec(),
            &self.eta.to_vec(),
        )
    }

    pub fn spec(&self) -> Result<DownOutStepSpec> {
        DownOutStepSpec::new(self.strike, self.barrier, self.knock_rate, self.seasoning)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "r = 0.05\ndelta = 0.07\nsigma = 0.2\nlambda = 1.0\np = [0.7]\nxi = [25.0]\nq = 0.3\neta = 50\nK = 100\nL = 95\nrho_L = -26.34\n";

    #[test]
    fn parses_scalars_and_lists() {
        let cfg = PricingConfig::from_toml_str(TEXT).unwrap();
        let m = cfg.model().unwrap();
        assert_eq!(m.down_components()[0].rate, 50.0);
        assert_eq!(cfg.spec().unwrap().seasoning, 0.0);
    }

    #[test]
    fn round_trips() {
        let cfg = PricingConfig::from_toml_str(TEXT).unwrap();
        let again = PricingConfig::from_parts(&cfg.model().unwrap(), &cfg.spec().unwrap());
        let back = PricingConfig::from_toml_str(&again.to_toml_string()).unwrap();
        assert_eq!(back.model().unwrap(), cfg.model().unwrap());
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let err = PricingConfig::from_toml_str(&format!("{TEXT}bogus = 1\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        assert!(err.is_input_error());
    }
}
