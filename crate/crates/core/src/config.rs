//! System configuration: a flat TOML document whose keys follow the network
//! parameter table. Omitted keys take the table defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{generate_topology, large_scale_fading, DistanceUnit, PathLossModel, ShadowingModel};
use crate::energy::{PowerCostParams, SymmetricInputs, SymmetricModel};
use crate::error::{Error, Result};
use crate::fronthaul::UplinkSignalParams;
use crate::rng::{child_seed, Component};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceUnitKey {
    #[default]
    Km,
    M,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Carrier frequency, GHz.
    pub f_ghz: f64,
    /// Bandwidth, MHz.
    pub b_s_mhz: f64,
    pub h_ap: f64,
    pub h_ue: f64,
    /// Path-loss breakpoints, meters.
    pub d0: f64,
    pub d1: f64,
    pub sigma_sh_db: f64,
    pub theta: f64,
    /// Maximum UE transmit power, mW.
    pub rho_u_mw: f64,
    pub eta: f64,
    pub c_fso: f64,
    pub p_m: f64,
    pub p_0: f64,
    /// Watt/Gbps.
    pub p_fh_fso: f64,
    pub p_fh_of: f64,
    pub mu_fso: f64,
    pub mu_of: f64,
    pub k_b: f64,
    pub t0: f64,
    pub nf_db: f64,
    pub m: usize,
    pub k: usize,
    /// Side of the square area, meters.
    pub area_side: f64,
    /// Common large-scale fading of the equal-fading model. When absent it is
    /// the geometric mean of one seeded drop.
    pub beta: Option<f64>,
    pub path_loss_distance_unit: DistanceUnitKey,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            f_ghz: 1.9,
            b_s_mhz: 20.0,
            h_ap: 15.0,
            h_ue: 1.65,
            d0: 10.0,
            d1: 50.0,
            sigma_sh_db: 8.0,
            theta: 0.5,
            rho_u_mw: 100.0,
            eta: 0.5,
            c_fso: 2.0,
            p_m: 0.2,
            p_0: 0.825,
            p_fh_fso: 0.3,
            p_fh_of: 0.25,
            mu_fso: 0.003,
            mu_of: 0.03,
            k_b: 1.381e-23,
            t0: 290.0,
            nf_db: 9.0,
            m: 100,
            k: 10,
            area_side: 1000.0,
            beta: None,
            path_loss_distance_unit: DistanceUnitKey::Km,
        }
    }
}

impl SystemConfig {
    /// Parse a TOML document and validate it.
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(text).map_err(|e| Error::ConfigParse {
            path: origin.to_path_buf(),
            message: e.message().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("f_ghz", self.f_ghz),
            ("b_s_mhz", self.b_s_mhz),
            ("h_ap", self.h_ap),
            ("h_ue", self.h_ue),
            ("d0", self.d0),
            ("d1", self.d1),
            ("c_fso", self.c_fso),
            ("k_b", self.k_b),
            ("t0", self.t0),
            ("area_side", self.area_side),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("sigma_sh_db", self.sigma_sh_db),
            ("rho_u_mw", self.rho_u_mw),
            ("p_m", self.p_m),
            ("p_0", self.p_0),
            ("p_fh_fso", self.p_fh_fso),
            ("p_fh_of", self.p_fh_of),
            ("mu_fso", self.mu_fso),
            ("mu_of", self.mu_of),
        ];
        for (key, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::config(key, format!("must be >= 0, got {v}")));
            }
        }
        if !self.nf_db.is_finite() {
            return Err(Error::config("nf_db", "must be finite"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::config("eta", format!("must be in [0, 1], got {}", self.eta)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::config("theta", format!("must be in [0, 1], got {}", self.theta)));
        }
        if self.d0 >= self.d1 {
            return Err(Error::config("d1", format!("must exceed d0={}, got {}", self.d0, self.d1)));
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be >= 1"));
        }
        if self.k == 0 {
            return Err(Error::config("k", "must be >= 1"));
        }
        if self.mu_fso > self.mu_of {
            return Err(Error::config("mu_fso", "must not exceed mu_of"));
        }
        if self.p_fh_fso < self.p_fh_of {
            return Err(Error::config("p_fh_of", "must not exceed p_fh_fso"));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::config("beta", format!("must be positive, got {b}")));
            }
        }
        Ok(())
    }

    pub fn f_mhz(&self) -> f64 {
        self.f_ghz * 1e3
    }

    /// Bandwidth, Hz.
    pub fn b_s(&self) -> f64 {
        self.b_s_mhz * 1e6
    }

    /// Transmit power, Watt.
    pub fn rho_u(&self) -> f64 {
        self.rho_u_mw * 1e-3
    }

    /// Noise power `k_B T0 B_s NF`, Watt.
    pub fn delta_sq(&self) -> f64 {
        self.k_b * self.t0 * self.b_s() * 10f64.powf(self.nf_db / 10.0)
    }

    pub fn path_loss(&self) -> Result<PathLossModel> {
        let unit = match self.path_loss_distance_unit {
            DistanceUnitKey::Km => DistanceUnit::Kilometers,
            DistanceUnitKey::M => DistanceUnit::Meters,
        };
        PathLossModel::new(self.f_mhz(), self.h_ap, self.h_ue, self.d0, self.d1, unit)
    }

    pub fn shadowing(&self) -> Result<ShadowingModel> {
        ShadowingModel::new(self.sigma_sh_db, self.theta)
    }

    pub fn power_cost(&self) -> PowerCostParams {
        PowerCostParams {
            p_circuit: self.p_m,
            p0: self.p_0,
            p_fh_fso: self.p_fh_fso,
            p_fh_of: self.p_fh_of,
            mu_fso: self.mu_fso,
            mu_of: self.mu_of,
            b_s: self.b_s(),
        }
    }

    pub fn signal_params(&self) -> Result<UplinkSignalParams> {
        UplinkSignalParams::uniform(self.rho_u(), self.eta, self.delta_sq(), self.m, self.k)
    }

    /// `β` of the equal-fading model: the configured value, or the geometric
    /// mean over one random drop derived from `seed`.
    pub fn resolve_beta(&self, seed: u64) -> Result<f64> {
        if let Some(b) = self.beta {
            return Ok(b);
        }
        let s = child_seed(seed, Component::SymmetricBeta, 0);
        let topo = generate_topology(self.m, self.k, self.area_side, s)?;
        Ok(large_scale_fading(&topo, &self.path_loss()?, &self.shadowing()?, s)?.geometric_mean())
    }

    pub fn symmetric_inputs(&self, beta: f64) -> SymmetricInputs {
        SymmetricInputs {
            beta,
            rho_u: self.rho_u(),
            eta: self.eta,
            delta_sq: self.delta_sq(),
            m: self.m,
            k: self.k,
            c_fso: self.c_fso,
        }
    }

    pub fn symmetric_model(&self, seed: u64) -> Result<SymmetricModel> {
        let beta = self.resolve_beta(seed)?;
        SymmetricModel::new(&self.symmetric_inputs(beta), &self.power_cost())
    }

    /// Every effective key, TOML formatted.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serialises")
    }

    /// SHA-256 of [`Self::to_toml`], hex.
    pub fn sha(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Load a config file, or the defaults when `path` is `"default"`.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    if path.as_os_str() == "default" {
        return Ok(SystemConfig::default());
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SystemConfig::from_toml_str(&text, path)
}
