//! Fronthaul links and compression noise.
//!
//! Each AP forwards a compressed copy of its received signal over a fiber
//! (OF) or free-space optical (FSO) link. FSO links carry `C_FSO` bits per
//! channel use, fiber links `N · C_FSO`. Compression is modelled by the
//! Gaussian test channel `ŷ = y + n`, `n ~ CN(0, D)`, so a link of capacity
//! `C` yields the distortion `D = E{|y|²} / (2^C − 1)`.

use crate::channel::LargeScaleFading;
use crate::csv::{sig, CsvTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkType {
    Fso,
    Fiber,
}

/// Per-AP link assignment and capacities.
#[derive(Debug, Clone, PartialEq)]
pub struct FronthaulPlan {
    link_types: Vec<LinkType>,
    c_fso: f64,
    n_coeff: f64,
}

impl FronthaulPlan {
    /// Explicit assignment. `n_coeff` may be `f64::INFINITY` (ideal fiber).
    pub fn from_links(link_types: Vec<LinkType>, c_fso: f64, n_coeff: f64) -> Result<Self> {
        if !(c_fso > 0.0 && c_fso.is_finite()) {
            return Err(Error::invalid(format!("FSO capacity must be positive, got {c_fso}")));
        }
        if n_coeff.is_nan() || n_coeff < 0.0 {
            return Err(Error::invalid(format!("capacity coefficient must be >= 0, got {n_coeff}")));
        }
        Ok(Self {
            link_types,
            c_fso,
            n_coeff,
        })
    }

    /// `m - m_of` FSO links on APs `0..m-m_of`, fiber on the rest.
    pub fn fso_first(m: usize, m_of: usize, c_fso: f64, n_coeff: f64) -> Result<Self> {
        if m_of > m {
            return Err(Error::invalid(format!("m_of={m_of} exceeds m={m}")));
        }
        let links = (0..m)
            .map(|i| if i < m - m_of { LinkType::Fso } else { LinkType::Fiber })
            .collect();
        Self::from_links(links, c_fso, n_coeff)
    }

    pub fn all_fso(m: usize, c_fso: f64) -> Result<Self> {
        Self::fso_first(m, 0, c_fso, 1.0)
    }

    pub fn link_types(&self) -> &[LinkType] {
        &self.link_types
    }

    pub fn num_aps(&self) -> usize {
        self.link_types.len()
    }

    pub fn c_fso(&self) -> f64 {
        self.c_fso
    }

    pub fn n_coeff(&self) -> f64 {
        self.n_coeff
    }

    pub fn m_of(&self) -> usize {
        self.link_types.iter().filter(|t| **t == LinkType::Fiber).count()
    }

    pub fn m_fso(&self) -> usize {
        self.num_aps() - self.m_of()
    }

    pub fn capacity_of(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Fso => self.c_fso,
            LinkType::Fiber => self.n_coeff * self.c_fso,
        }
    }

    /// `C_m` for AP `ap`.
    pub fn capacity(&self, ap: usize) -> f64 {
        self.capacity_of(self.link_types[ap])
    }

    pub fn capacities(&self) -> Vec<f64> {
        self.link_types.iter().map(|t| self.capacity_of(*t)).collect()
    }
}

/// Uplink transmit/noise parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct UplinkSignalParams {
    /// Max UE transmit power, Watt.
    pub rho_u: f64,
    /// Per-UE power-control coefficients in `[0, 1]`.
    pub eta: Vec<f64>,
    /// Per-AP noise variance, Watt.
    pub delta_sq: Vec<f64>,
}

impl UplinkSignalParams {
    pub fn new(rho_u: f64, eta: Vec<f64>, delta_sq: Vec<f64>) -> Result<Self> {
        // rho_u = 0 is accepted so the noise-only limit can be evaluated
        if !(rho_u >= 0.0 && rho_u.is_finite()) {
            return Err(Error::invalid(format!("rho_u must be >= 0, got {rho_u}")));
        }
        if let Some(e) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
            return Err(Error::invalid(format!("eta must lie in [0, 1], got {e}")));
        }
        if let Some(d) = delta_sq.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
            return Err(Error::invalid(format!("noise variance must be positive, got {d}")));
        }
        if eta.is_empty() || delta_sq.is_empty() {
            return Err(Error::invalid("need at least one UE and one AP"));
        }
        Ok(Self { rho_u, eta, delta_sq })
    }

    /// Equal `η` for `k` UEs and equal `δ²` at `m` APs.
    pub fn uniform(rho_u: f64, eta: f64, delta_sq: f64, m: usize, k: usize) -> Result<Self> {
        Self::new(rho_u, vec![eta; k], vec![delta_sq; m])
    }

    pub fn num_ues(&self) -> usize {
        self.eta.len()
    }

    pub fn num_aps(&self) -> usize {
        self.delta_sq.len()
    }

    pub(crate) fn check_dims(&self, beta: &LargeScaleFading) -> Result<()> {
        if beta.num_aps() != self.num_aps() || beta.num_ues() != self.num_ues() {
            return Err(Error::invalid(format!(
                "fading is {}x{} but signal params cover {} APs and {} UEs",
                beta.num_aps(),
                beta.num_ues(),
                self.num_aps(),
                self.num_ues()
            )));
        }
        Ok(())
    }
}

/// `E{|y_m|²} = ρ_u Σ_k η_k β_mk + δ²_m` for the AP whose row is `beta_row`.
pub fn received_signal_power(beta_row: &[f64], sig: &UplinkSignalParams, ap: usize) -> Result<f64> {
    if beta_row.len() != sig.num_ues() {
        return Err(Error::invalid(format!(
            "beta row has {} entries, expected {}",
            beta_row.len(),
            sig.num_ues()
        )));
    }
    let delta = *sig
        .delta_sq
        .get(ap)
        .ok_or_else(|| Error::invalid(format!("AP index {ap} out of range")))?;
    let s: f64 = beta_row.iter().zip(&sig.eta).map(|(b, e)| e * b).sum();
    Ok(sig.rho_u * s + delta)
}

/// Which rate-distortion test channel relates capacity and distortion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TestChannel {
    /// `x̂ = x + z`: `R(D) = log2(1 + σ²/D)`, so `D = σ² / (2^C − 1)`.
    #[default]
    Additive,
    /// `x = x̂ + z`: `R(D) = log2(σ²/D)`, so `D = σ² / 2^C`.
    Backward,
}

/// Minimum distortion for a source of power `signal_power` over a link of
/// capacity `capacity` bits per channel use.
pub fn quantization_noise_var(signal_power: f64, capacity: f64) -> Result<f64> {
    quantization_noise_var_with(signal_power, capacity, TestChannel::Additive)
}

pub fn quantization_noise_var_with(signal_power: f64, capacity: f64, channel: TestChannel) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(Error::invalid(format!("capacity must be positive, got {capacity}")));
    }
    if !(signal_power >= 0.0 && signal_power.is_finite()) {
        return Err(Error::invalid(format!("signal power must be >= 0, got {signal_power}")));
    }
    let denom = match channel {
        TestChannel::Additive => capacity.exp2() - 1.0,
        TestChannel::Backward => capacity.exp2(),
    };
    Ok(signal_power / denom)
}

/// `D_m` for every AP of `plan`.
pub fn per_ap_distortions(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    plan: &FronthaulPlan,
) -> Result<Vec<f64>> {
    per_ap_distortions_with(beta, sig, plan, TestChannel::Additive)
}

pub fn per_ap_distortions_with(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    plan: &FronthaulPlan,
    channel: TestChannel,
) -> Result<Vec<f64>> {
    sig.check_dims(beta)?;
    if plan.num_aps() != beta.num_aps() {
        return Err(Error::invalid(format!(
            "plan covers {} APs, network has {}",
            plan.num_aps(),
            beta.num_aps()
        )));
    }
    (0..beta.num_aps())
        .map(|m| {
            let power = received_signal_power(beta.ap_row(m), sig, m)?;
            quantization_noise_var_with(power, plan.capacity(m), channel)
        })
        .collect()
}

pub fn distortions_to_csv(plan: &FronthaulPlan, distortions: &[f64]) -> CsvTable {
    let mut t = CsvTable::new();
    t.header(&["ap", "link", "capacity", "distortion_w"]);
    for (m, d) in distortions.iter().enumerate() {
        let link = match plan.link_types()[m] {
            LinkType::Fso => "fso",
            LinkType::Fiber => "of",
        };
        t.row(&[m.to_string(), link.to_string(), sig(plan.capacity(m), 12), sig(*d, 12)]);
    }
    t
}
