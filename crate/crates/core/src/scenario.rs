//! Scenario files: the federation, its secrets and the faults to inject.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::mathcore::{
    hash_to_prime, CloudKeyMaterial, Credentials, MathError, DEFAULT_PRIME_BITS, MAX_PRIME_BITS,
    MIN_PRIME_BITS,
};
use crate::simnet::FaultPlan;
use crate::CloudId;

/// A malformed scenario, located by its JSON field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() || self.path == "." {
            f.write_str(&self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn default_prime_bits() -> u32 {
    DEFAULT_PRIME_BITS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloudSpec {
    pub grant_type: String,
    pub service_type: String,
    pub client_name: String,
    pub client_region: String,
    pub client_location: String,
    #[serde(with = "crate::dec")]
    pub service_payment: u64,
    pub expiry_date: String,
    #[serde(with = "crate::dec")]
    pub secret: u64,
    /// Injected credential prime; bypasses the credential hash.
    #[serde(default, with = "crate::dec::option", skip_serializing_if = "Option::is_none")]
    pub fixed_cp: Option<u64>,
}

impl CloudSpec {
    pub fn credentials(&self) -> Credentials {
        Credentials {
            grant_type: self.grant_type.clone(),
            service_type: self.service_type.clone(),
            client_name: self.client_name.clone(),
            client_region: self.client_region.clone(),
            client_location: self.client_location.clone(),
            service_payment: self.service_payment,
            expiry_date: self.expiry_date.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(with = "crate::dec")]
    pub seed: u64,
    #[serde(default = "default_prime_bits")]
    pub prime_bits: u32,
    /// Share polynomial degree; `n - 1` when absent.
    #[serde(default, with = "crate::dec::option", skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub clouds: Vec<CloudSpec>,
    #[serde(default)]
    pub faults: FaultPlan,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de)
            .map_err(|e| ConfigError::new(e.path().to_string(), e.inner()))?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn n(&self) -> usize {
        self.clouds.len()
    }

    pub fn effective_degree(&self) -> usize {
        self.degree.unwrap_or(self.n().saturating_sub(1))
    }

    /// Key material per cloud, injected primes taking precedence.
    pub fn derive_keys(&self) -> Result<Vec<CloudKeyMaterial>, ConfigError> {
        self.clouds
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let id = CloudId::from_index(i);
                match c.fixed_cp {
                    Some(cp) => CloudKeyMaterial::from_prime(id, cp)
                        .map_err(|e| ConfigError::new(format!("clouds[{i}].fixed_cp"), e)),
                    None => {
                        let cp = hash_to_prime(&c.credentials(), self.prime_bits).map_err(|e| match e {
                            MathError::EmptyField(f) => ConfigError::new(format!("clouds[{i}].{f}"), e),
                            MathError::InvalidBitWidth(_) => ConfigError::new("prime_bits", e),
                            other => ConfigError::new(format!("clouds[{i}]"), other),
                        })?;
                        CloudKeyMaterial::from_prime(id, cp).map_err(|e| ConfigError::new(format!("clouds[{i}]"), e))
                    }
                }
            })
            .collect()
    }

    /// Checks every constraint a run relies on and returns the key material.
    pub fn validate(&self) -> Result<Vec<CloudKeyMaterial>, ConfigError> {
        if self.n() < 2 {
            return Err(ConfigError::new(
                "clouds",
                format!("a federation needs at least 2 clouds, got {}", self.n()),
            ));
        }
        if !(MIN_PRIME_BITS..=MAX_PRIME_BITS).contains(&self.prime_bits) {
            return Err(ConfigError::new("prime_bits", MathError::InvalidBitWidth(self.prime_bits)));
        }
        if self.effective_degree() == 0 {
            return Err(ConfigError::new("degree", "share polynomials need degree at least 1"));
        }
        self.faults.validate(self.n())?;
        let keys = self.derive_keys()?;
        let bound = keys.iter().map(|k| k.np).min().expect("n >= 2");
        for (i, c) in self.clouds.iter().enumerate() {
            if c.secret >= bound {
                return Err(ConfigError::new(
                    format!("clouds[{i}].secret"),
                    format!("secret {} is not below the smallest modulus {bound}", c.secret),
                ));
            }
        }
        Ok(keys)
    }
}
