//! Network power, fronthaul deployment cost and energy efficiency.
//!
//! Traffic-dependent fronthaul power is given in Watt/Gbps while link
//! capacities are spectral efficiencies, so the carried traffic of link `m`
//! is `B_s · C_m · 1e-9` Gbps.

use crate::channel::LargeScaleFading;
use crate::error::{Error, Result};
use crate::fronthaul::{per_ap_distortions, FronthaulPlan, LinkType, UplinkSignalParams};
use crate::rate::{rates_closed_form, RateResult};

/// Gbps per bps.
pub const GBPS: f64 = 1e-9;

/// Power and cost parameters shared by every AP of a given link type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerCostParams {
    /// Circuit power per AP, Watt.
    pub p_circuit: f64,
    /// Traffic-independent fronthaul power per AP, Watt.
    pub p0: f64,
    /// FSO traffic-dependent power, Watt/Gbps.
    pub p_fh_fso: f64,
    /// Fiber traffic-dependent power, Watt/Gbps.
    pub p_fh_of: f64,
    /// FSO deployment-cost coefficient, Watt per bit/s/Hz.
    pub mu_fso: f64,
    /// Fiber deployment-cost coefficient, Watt per bit/s/Hz.
    pub mu_of: f64,
    /// System bandwidth, Hz.
    pub b_s: f64,
}

impl PowerCostParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("p_circuit", self.p_circuit),
            ("p0", self.p0),
            ("p_fh_fso", self.p_fh_fso),
            ("p_fh_of", self.p_fh_of),
            ("mu_fso", self.mu_fso),
            ("mu_of", self.mu_of),
            ("b_s", self.b_s),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.mu_fso > self.mu_of {
            return Err(Error::invalid("FSO cost coefficient must not exceed the fiber one"));
        }
        if self.p_fh_fso < self.p_fh_of {
            return Err(Error::invalid("FSO traffic power must not be below the fiber one"));
        }
        Ok(())
    }

    pub fn p_fh(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Fso => self.p_fh_fso,
            LinkType::Fiber => self.p_fh_of,
        }
    }

    pub fn mu(&self, link: LinkType) -> f64 {
        match link {
            LinkType::Fso => self.mu_fso,
            LinkType::Fiber => self.mu_of,
        }
    }
}

/// `P_net = Σ_k ρ_u η_k + Σ_m P_m + B_s Σ_m C_m P_fh,m + Σ_m P_0,m`.
pub fn network_power(sig: &UplinkSignalParams, pc: &PowerCostParams, plan: &FronthaulPlan) -> Result<f64> {
    pc.validate()?;
    if plan.num_aps() != sig.num_aps() {
        return Err(Error::invalid(format!(
            "plan covers {} APs, signal params {}",
            plan.num_aps(),
            sig.num_aps()
        )));
    }
    let ue: f64 = sig.eta.iter().map(|e| sig.rho_u * e).sum();
    let m = plan.num_aps() as f64;
    let traffic: f64 = plan
        .link_types()
        .iter()
        .map(|t| plan.capacity_of(*t) * pc.p_fh(*t))
        .sum();
    Ok(ue + m * pc.p_circuit + pc.b_s * GBPS * traffic + m * pc.p0)
}

/// Deployment cost `Ω_fh = Σ_m C_m μ_m`.
pub fn fronthaul_cost(plan: &FronthaulPlan, pc: &PowerCostParams) -> f64 {
    plan.link_types()
        .iter()
        .map(|t| plan.capacity_of(*t) * pc.mu(*t))
        .sum()
}

/// Bits per Joule: `B_s Σ_k R_k / (P_net + Ω_fh)`.
pub fn energy_efficiency(rates: &RateResult, p_net: f64, omega: f64, b_s: f64) -> Result<f64> {
    let denom = p_net + omega;
    if !(denom > 0.0) {
        return Err(Error::invalid(format!("power + cost must be positive, got {denom}")));
    }
    Ok(b_s * rates.sum_rate / denom)
}

/// Rates, power and EE of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationResult {
    pub rates: RateResult,
    pub p_net: f64,
    pub omega: f64,
    pub ee: f64,
}

/// Full pipeline: distortions → SINR → rates → power/cost → EE.
pub fn evaluate_plan(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    pc: &PowerCostParams,
    plan: &FronthaulPlan,
) -> Result<EvaluationResult> {
    let d = per_ap_distortions(beta, sig, plan)?;
    let rates = rates_closed_form(beta, sig, &d)?;
    let p_net = network_power(sig, pc, plan)?;
    let omega = fronthaul_cost(plan, pc);
    let ee = energy_efficiency(&rates, p_net, omega, pc.b_s)?;
    Ok(EvaluationResult {
        rates,
        p_net,
        omega,
        ee,
    })
}

/// Aggregate constants of the equal-fading model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggregateParams {
    pub l1: f64,
    pub l2: f64,
    pub alpha_fso: f64,
    pub alpha_of: f64,
    pub gamma_ep: f64,
    pub gamma_fso: f64,
    pub gamma_of: f64,
}

/// Inputs of [`aggregate_params`]: one `β`, one `η`, one `δ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricInputs {
    pub beta: f64,
    pub rho_u: f64,
    pub eta: f64,
    pub delta_sq: f64,
    pub m: usize,
    pub k: usize,
    pub c_fso: f64,
}

pub fn aggregate_params(inputs: &SymmetricInputs, pc: &PowerCostParams) -> Result<AggregateParams> {
    let SymmetricInputs {
        beta,
        rho_u,
        eta,
        delta_sq,
        m,
        k,
        c_fso,
    } = *inputs;
    pc.validate()?;
    if m == 0 || k == 0 {
        return Err(Error::invalid("need m >= 1 and k >= 1"));
    }
    if !(beta > 0.0 && beta.is_finite()) || !(delta_sq > 0.0) || !(rho_u >= 0.0) || !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid("beta and delta_sq must be positive, rho_u >= 0, eta in [0, 1]"));
    }
    if !(c_fso > 0.0 && c_fso.is_finite()) {
        return Err(Error::invalid(format!("FSO capacity must be positive, got {c_fso}")));
    }
    let (mf, kf) = (m as f64, k as f64);
    let p = rho_u * eta;
    let alpha_of = (kf * p * beta + delta_sq) * beta;
    Ok(AggregateParams {
        l1: mf * mf * p * beta * beta,
        l2: mf * kf * p * beta * beta + mf * delta_sq * beta,
        alpha_fso: alpha_of / (c_fso.exp2() - 1.0),
        alpha_of,
        gamma_ep: kf * p + mf * (pc.p_circuit + pc.p0),
        gamma_fso: c_fso * (pc.b_s * GBPS * pc.p_fh_fso + pc.mu_fso),
        gamma_of: c_fso * (pc.b_s * GBPS * pc.p_fh_of + pc.mu_of),
    })
}

/// Equal-fading network used by the optimiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricModel {
    pub m: usize,
    pub k: usize,
    pub c_fso: f64,
    pub b_s: f64,
    pub agg: AggregateParams,
}

impl SymmetricModel {
    pub fn new(inputs: &SymmetricInputs, pc: &PowerCostParams) -> Result<Self> {
        Ok(Self {
            m: inputs.m,
            k: inputs.k,
            c_fso: inputs.c_fso,
            b_s: pc.b_s,
            agg: aggregate_params(inputs, pc)?,
        })
    }

    fn check(&self, n: f64, m_of: usize) -> Result<()> {
        if m_of > self.m {
            return Err(Error::invalid(format!("m_of={m_of} exceeds m={}", self.m)));
        }
        if n.is_nan() || n < 0.0 {
            return Err(Error::invalid(format!("capacity coefficient must be >= 0, got {n}")));
        }
        if m_of > 0 && n == 0.0 {
            return Err(Error::invalid("n = 0 with fiber links gives zero fiber capacity"));
        }
        Ok(())
    }

    /// Common per-user SINR.
    pub fn sinr(&self, n: f64, m_of: usize) -> Result<f64> {
        self.check(n, m_of)?;
        let a = &self.agg;
        let fiber = if m_of == 0 {
            0.0
        } else {
            m_of as f64 * a.alpha_of / ((n * self.c_fso).exp2() - 1.0)
        };
        Ok(a.l1 / (a.l2 + (self.m - m_of) as f64 * a.alpha_fso + fiber))
    }

    pub fn sum_rate(&self, n: f64, m_of: usize) -> Result<f64> {
        Ok(self.k as f64 * self.sinr(n, m_of)?.ln_1p() / std::f64::consts::LN_2)
    }

    /// `P_net + Ω_fh` of the equal-fading network.
    pub fn power(&self, n: f64, m_of: usize) -> Result<f64> {
        self.check(n, m_of)?;
        let a = &self.agg;
        let fiber = if m_of == 0 { 0.0 } else { n * m_of as f64 * a.gamma_of };
        Ok(a.gamma_ep + (self.m - m_of) as f64 * a.gamma_fso + fiber)
    }

    /// Same model with every `Γ` multiplied by `c`.
    pub fn with_scaled_power(&self, c: f64) -> Self {
        let mut s = *self;
        s.agg.gamma_ep *= c;
        s.agg.gamma_fso *= c;
        s.agg.gamma_of *= c;
        s
    }
}

/// Energy efficiency of the equal-fading network with `m_of` fiber links of
/// coefficient `n`.
pub fn ee_symmetric(n: f64, m_of: usize, model: &SymmetricModel) -> Result<f64> {
    Ok(model.b_s * model.sum_rate(n, m_of)? / model.power(n, m_of)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table2_pc() -> PowerCostParams {
        PowerCostParams {
            p_circuit: 0.2,
            p0: 0.825,
            p_fh_fso: 0.3,
            p_fh_of: 0.25,
            mu_fso: 0.003,
            mu_of: 0.03,
            b_s: 20e6,
        }
    }

    #[test]
    fn ue_power_in_isolation() {
        let pc = PowerCostParams {
            p_circuit: 0.0,
            p0: 0.0,
            p_fh_fso: 0.0,
            p_fh_of: 0.0,
            mu_fso: 0.0,
            mu_of: 0.0,
            b_s: 20e6,
        };
        let sig = UplinkSignalParams::uniform(0.1, 0.5, 1e-12, 4, 3).unwrap();
        let plan = FronthaulPlan::fso_first(4, 2, 2.0, 3.0).unwrap();
        let p = network_power(&sig, &pc, &plan).unwrap();
        assert!((p - 3.0 * 0.1 * 0.5).abs() < 1e-15);
    }

    #[test]
    fn table2_all_fso_power() {
        // 0.5 + 20 + 82.5 + 100·(2·20e6·1e-9)·0.3 = 104.2
        let sig = UplinkSignalParams::uniform(0.1, 0.5, 6.36e-13, 100, 10).unwrap();
        let plan = FronthaulPlan::all_fso(100, 2.0).unwrap();
        let p = network_power(&sig, &table2_pc(), &plan).unwrap();
        assert!((p - 104.2).abs() < 1e-9, "{p}");
    }

    #[test]
    fn doubling_n_raises_power() {
        let sig = UplinkSignalParams::uniform(0.1, 0.5, 6.36e-13, 10, 2).unwrap();
        let a = FronthaulPlan::fso_first(10, 3, 2.0, 2.0).unwrap();
        let b = FronthaulPlan::fso_first(10, 3, 2.0, 4.0).unwrap();
        let pc = table2_pc();
        assert!(network_power(&sig, &pc, &b).unwrap() > network_power(&sig, &pc, &a).unwrap());
    }

    #[test]
    fn cost_examples() {
        let empty = FronthaulPlan::from_links(vec![], 2.0, 1.0).unwrap();
        assert_eq!(fronthaul_cost(&empty, &table2_pc()), 0.0);
        let all_fso = FronthaulPlan::all_fso(100, 2.0).unwrap();
        assert!((fronthaul_cost(&all_fso, &table2_pc()) - 0.6).abs() < 1e-12);

        let mut pc = table2_pc();
        pc.mu_of = pc.mu_fso;
        let costs: Vec<f64> = (0..=10)
            .map(|m_of| fronthaul_cost(&FronthaulPlan::fso_first(10, m_of, 2.0, 1.0).unwrap(), &pc))
            .collect();
        assert!(costs.iter().all(|c| (c - costs[0]).abs() < 1e-15));
    }

    #[test]
    fn ee_examples() {
        let zero = RateResult::from_per_user(vec![0.0; 3]);
        assert_eq!(energy_efficiency(&zero, 10.0, 1.0, 20e6).unwrap(), 0.0);
        let r = RateResult::from_per_user(vec![1.0, 2.0]);
        let a = energy_efficiency(&r, 10.0, 2.0, 20e6).unwrap();
        let b = energy_efficiency(&r, 20.0, 4.0, 20e6).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-6);
        assert!(energy_efficiency(&r, 0.0, 0.0, 20e6).is_err());
    }

    fn inputs(beta: f64) -> SymmetricInputs {
        SymmetricInputs {
            beta,
            rho_u: 0.1,
            eta: 0.5,
            delta_sq: 6.36e-13,
            m: 100,
            k: 10,
            c_fso: 2.0,
        }
    }

    #[test]
    fn aggregate_identities() {
        let a = aggregate_params(&inputs(7.5e-14), &table2_pc()).unwrap();
        assert!((a.alpha_fso * 3.0 - a.alpha_of).abs() <= 1e-15 * a.alpha_of);
        let (m, k, p, b, d) = (100.0, 10.0, 0.05, 7.5e-14, 6.36e-13);
        let ratio = m * p * b / (k * p * b + d);
        assert!((a.l1 / a.l2 - ratio).abs() <= 1e-12 * ratio);
        // L2 = M·α_OF in the equal-fading model
        assert!((a.l2 - 100.0 * a.alpha_of).abs() <= 1e-14 * a.l2);
    }

    #[test]
    fn aggregate_hand_values() {
        let a = aggregate_params(&inputs(1e-13), &table2_pc()).unwrap();
        // Γ_ep = 10·0.05 + 100·1.025; Γ_FSO = 2(0.006 + 0.003); Γ_OF = 2(0.005 + 0.03)
        assert!((a.gamma_ep - 103.0).abs() < 1e-12);
        assert!((a.gamma_fso - 0.018).abs() < 1e-15);
        assert!((a.gamma_of - 0.07).abs() < 1e-15);
    }

    #[test]
    fn ee_symmetric_edges() {
        let model = SymmetricModel::new(&inputs(1e-13), &table2_pc()).unwrap();
        let base = ee_symmetric(1.0, 0, &model).unwrap();
        for n in [0.0, 2.0, 7.3, 1e6] {
            assert_eq!(ee_symmetric(n, 0, &model).unwrap(), base);
        }
        assert!(ee_symmetric(0.0, 5, &model).is_err());
        assert!(ee_symmetric(1.0, 101, &model).is_err());
        let far = ee_symmetric(1e7, 100, &model).unwrap();
        assert!(far < 1e-3 * ee_symmetric(2.0, 100, &model).unwrap());
    }

    #[test]
    fn ee_decreasing_in_gamma_ep() {
        let model = SymmetricModel::new(&inputs(1e-13), &table2_pc()).unwrap();
        let mut heavier = model;
        heavier.agg.gamma_ep *= 1.01;
        assert!(ee_symmetric(2.0, 40, &heavier).unwrap() < ee_symmetric(2.0, 40, &model).unwrap());
    }

    #[test]
    fn power_cost_ordering_enforced() {
        let mut pc = table2_pc();
        pc.mu_fso = 0.05;
        assert!(pc.validate().is_err());
        let mut pc = table2_pc();
        pc.p_fh_of = 0.5;
        assert!(pc.validate().is_err());
    }
}
