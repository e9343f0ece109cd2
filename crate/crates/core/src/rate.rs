//! Uplink achievable rates under MRC combining with the use-and-then-forget
//! bound, in closed form and by Monte-Carlo simulation of the combiner.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::{sample_cn, LargeScaleFading};
use crate::csv::{sig, CsvTable};
use crate::error::{Error, Result};
use crate::fronthaul::UplinkSignalParams;
use crate::rng::{self, Component};

/// The four UatF terms for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrBreakdown {
    /// `|DS_k|²`
    pub ds_sq: f64,
    /// `E{|BU_k|²}`
    pub bu_var: f64,
    /// `E{|I_kk'|²}` for every `k'`; the entry at `k' = k` is zero.
    pub interference_var: Vec<f64>,
    /// `E{|υ_k|²}`
    pub noise_var: f64,
}

impl SinrBreakdown {
    pub fn total_interference(&self) -> f64 {
        self.interference_var.iter().sum()
    }

    pub fn effective_noise(&self) -> f64 {
        self.bu_var + self.total_interference() + self.noise_var
    }

    pub fn sinr(&self) -> f64 {
        self.ds_sq / self.effective_noise()
    }

    pub fn csv_row(&self, user: usize) -> Vec<String> {
        vec![
            user.to_string(),
            sig(self.ds_sq, 12),
            sig(self.bu_var, 12),
            sig(self.total_interference(), 12),
            sig(self.noise_var, 12),
            sig(self.sinr(), 12),
        ]
    }
}

pub fn breakdowns_to_csv(rows: &[SinrBreakdown]) -> CsvTable {
    let mut t = CsvTable::new();
    t.header(&["user", "ds_sq", "bu_var", "interference_var", "noise_var", "sinr"]);
    for (k, b) in rows.iter().enumerate() {
        t.row(&b.csv_row(k));
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateResult {
    pub per_user_rate: Vec<f64>,
    pub sum_rate: f64,
}

impl RateResult {
    pub fn from_per_user(per_user_rate: Vec<f64>) -> Self {
        let sum_rate = per_user_rate.iter().sum();
        Self {
            per_user_rate,
            sum_rate,
        }
    }
}

fn check_inputs(beta: &LargeScaleFading, sig: &UplinkSignalParams, distortions: &[f64]) -> Result<()> {
    sig.check_dims(beta)?;
    if distortions.len() != beta.num_aps() {
        return Err(Error::invalid(format!(
            "{} distortions for {} APs",
            distortions.len(),
            beta.num_aps()
        )));
    }
    if let Some(d) = distortions.iter().find(|d| !(**d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid(format!("distortions must be finite and >= 0, got {d}")));
    }
    Ok(())
}

fn check_user(beta: &LargeScaleFading, k: usize) -> Result<()> {
    if k >= beta.num_ues() {
        return Err(Error::invalid(format!("user index {k} out of range (K = {})", beta.num_ues())));
    }
    Ok(())
}

/// Closed-form UatF terms for user `k`.
pub fn sinr_closed_form(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    distortions: &[f64],
    k: usize,
) -> Result<SinrBreakdown> {
    check_inputs(beta, sig, distortions)?;
    check_user(beta, k)?;
    let (m_aps, k_ues) = (beta.num_aps(), beta.num_ues());
    let rho = sig.rho_u;

    let mut sum_b = 0.0;
    let mut sum_b2 = 0.0;
    let mut noise = 0.0;
    let mut cross = vec![0.0; k_ues];
    for m in 0..m_aps {
        let row = beta.ap_row(m);
        let b = row[k];
        sum_b += b;
        sum_b2 += b * b;
        noise += (sig.delta_sq[m] + distortions[m]) * b;
        for (kp, c) in cross.iter_mut().enumerate() {
            if kp != k {
                *c += row[kp] * b;
            }
        }
    }
    let interference_var = cross
        .iter()
        .zip(&sig.eta)
        .map(|(c, e)| rho * e * c)
        .collect();
    Ok(SinrBreakdown {
        ds_sq: rho * sig.eta[k] * sum_b * sum_b,
        bu_var: rho * sig.eta[k] * sum_b2,
        interference_var,
        noise_var: noise,
    })
}

/// `γ_k` evaluated directly from the compact ratio
/// `ρ η_k (Σ_m β_mk)² / Σ_m (ρ Σ_k' η_k' β_mk' + δ²_m + D_m) β_mk`.
pub fn sinr_compact(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    distortions: &[f64],
    k: usize,
) -> Result<f64> {
    check_inputs(beta, sig, distortions)?;
    check_user(beta, k)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for m in 0..beta.num_aps() {
        let row = beta.ap_row(m);
        let load: f64 = row.iter().zip(&sig.eta).map(|(b, e)| e * b).sum();
        num += row[k];
        den += (sig.rho_u * load + sig.delta_sq[m] + distortions[m]) * row[k];
    }
    Ok(sig.rho_u * sig.eta[k] * num * num / den)
}

pub fn rate_from_sinr(gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(Error::invalid(format!("SINR must be >= 0, got {gamma}")));
    }
    Ok(gamma.ln_1p() / std::f64::consts::LN_2)
}

/// Per-user and sum rates from the compact SINR.
pub fn rates_closed_form(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    distortions: &[f64],
) -> Result<RateResult> {
    let per_user = (0..beta.num_ues())
        .map(|k| sinr_compact(beta, sig, distortions, k).and_then(rate_from_sinr))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateResult::from_per_user(per_user))
}

/// How the Monte-Carlo combiner draws the compression noise.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantizationNoise {
    /// `n_m ~ CN(0, D_m)` with `D_m` fixed from the statistical signal power.
    Fixed(Vec<f64>),
    /// `D_m` recomputed from the signal power conditioned on each channel
    /// draw, for link capacities `C_m`. Not the default model.
    PerRealization(Vec<f64>),
}

/// Empirical estimates for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct McTerms {
    pub breakdown: SinrBreakdown,
    /// `E{|r_k − DS_k q_k|²}` measured on the combiner output.
    pub effective_noise_var: f64,
    /// `E{|g_mk|⁴}` per AP.
    pub fourth_moment: Vec<f64>,
    pub trials: usize,
}

const CHUNK: usize = 2048;

#[derive(Clone)]
struct UserAcc {
    // Welford state for S_k = Σ_m |g_mk|²
    n: f64,
    mean_s: f64,
    m2_s: f64,
    interference: Vec<f64>,
    noise: f64,
    r_sq: f64,
    r_q: f64,
    q_sq: f64,
    g4: Vec<f64>,
}

impl UserAcc {
    fn new(m: usize, k: usize) -> Self {
        Self {
            n: 0.0,
            mean_s: 0.0,
            m2_s: 0.0,
            interference: vec![0.0; k],
            noise: 0.0,
            r_sq: 0.0,
            r_q: 0.0,
            q_sq: 0.0,
            g4: vec![0.0; m],
        }
    }

    fn push_s(&mut self, s: f64) {
        self.n += 1.0;
        let d = s - self.mean_s;
        self.mean_s += d / self.n;
        self.m2_s += d * (s - self.mean_s);
    }

    fn merge(&mut self, other: &UserAcc) {
        let n = self.n + other.n;
        if n == 0.0 {
            return;
        }
        let d = other.mean_s - self.mean_s;
        self.mean_s += d * other.n / n;
        self.m2_s += other.m2_s + d * d * self.n * other.n / n;
        self.n = n;
        for (a, b) in self.interference.iter_mut().zip(&other.interference) {
            *a += b;
        }
        for (a, b) in self.g4.iter_mut().zip(&other.g4) {
            *a += b;
        }
        self.noise += other.noise;
        self.r_sq += other.r_sq;
        self.r_q += other.r_q;
        self.q_sq += other.q_sq;
    }
}

fn run_chunk(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    quant: &QuantizationNoise,
    trials: usize,
    seed: u64,
    chunk: usize,
) -> Vec<UserAcc> {
    let (m_aps, k_ues) = (beta.num_aps(), beta.num_ues());
    let mut r = rng::stream(seed, Component::MonteCarlo, chunk as u64);
    let mut acc = vec![UserAcc::new(m_aps, k_ues); k_ues];
    let sqrt_beta: Vec<f64> = beta.as_slice().iter().map(|b| b.sqrt()).collect();
    let amp: Vec<f64> = sig.eta.iter().map(|e| (sig.rho_u * e).sqrt()).collect();
    let mut g = vec![Complex64::new(0.0, 0.0); m_aps * k_ues];
    let mut q = vec![Complex64::new(0.0, 0.0); k_ues];
    let mut y_hat = vec![Complex64::new(0.0, 0.0); m_aps];
    let mut noise = vec![Complex64::new(0.0, 0.0); m_aps];

    for _ in 0..trials {
        for (gi, sb) in g.iter_mut().zip(&sqrt_beta) {
            *gi = sample_cn(&mut r, 1.0) * *sb;
        }
        for qk in q.iter_mut() {
            *qk = sample_cn(&mut r, 1.0);
        }
        for m in 0..m_aps {
            let row = &g[m * k_ues..(m + 1) * k_ues];
            let mut y = Complex64::new(0.0, 0.0);
            for kp in 0..k_ues {
                y += row[kp] * q[kp] * amp[kp];
            }
            let d_m = match quant {
                QuantizationNoise::Fixed(d) => d[m],
                QuantizationNoise::PerRealization(caps) => {
                    let p: f64 = row.iter().zip(&amp).map(|(gk, a)| a * a * gk.norm_sqr()).sum();
                    (p + sig.delta_sq[m]) / (caps[m].exp2() - 1.0)
                }
            };
            let w = sample_cn(&mut r, sig.delta_sq[m]) + sample_cn(&mut r, d_m);
            noise[m] = w;
            y_hat[m] = y + w;
        }
        for (k, a) in acc.iter_mut().enumerate() {
            let mut s = 0.0;
            let mut r_k = Complex64::new(0.0, 0.0);
            let mut v_k = Complex64::new(0.0, 0.0);
            for m in 0..m_aps {
                let gmk = g[m * k_ues + k];
                let p = gmk.norm_sqr();
                s += p;
                a.g4[m] += p * p;
                r_k += y_hat[m] * gmk.conj();
                v_k += noise[m] * gmk.conj();
            }
            a.push_s(s);
            for kp in 0..k_ues {
                if kp == k {
                    continue;
                }
                let mut c = Complex64::new(0.0, 0.0);
                for m in 0..m_aps {
                    c += g[m * k_ues + kp] * g[m * k_ues + k].conj();
                }
                a.interference[kp] += c.norm_sqr();
            }
            a.noise += v_k.norm_sqr();
            a.r_sq += r_k.norm_sqr();
            a.r_q += (r_k * q[k].conj()).re;
            a.q_sq += q[k].norm_sqr();
        }
    }
    acc
}

/// Simulate the MRC combiner and estimate every UatF term for all users.
pub fn mc_validate_all(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    quant: &QuantizationNoise,
    trials: usize,
    seed: u64,
) -> Result<Vec<McTerms>> {
    let per_ap = match quant {
        QuantizationNoise::Fixed(d) => d,
        QuantizationNoise::PerRealization(c) => {
            if let Some(bad) = c.iter().find(|c| !(**c > 0.0)) {
                return Err(Error::invalid(format!("capacities must be positive, got {bad}")));
            }
            c
        }
    };
    if let QuantizationNoise::Fixed(d) = quant {
        check_inputs(beta, sig, d)?;
    } else {
        sig.check_dims(beta)?;
        if per_ap.len() != beta.num_aps() {
            return Err(Error::invalid("one capacity per AP required"));
        }
    }
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    let (m_aps, k_ues) = (beta.num_aps(), beta.num_ues());
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<Vec<UserAcc>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let n = CHUNK.min(trials - c * CHUNK);
            run_chunk(beta, sig, quant, n, seed, c)
        })
        .collect();
    // fixed-order reduction keeps results independent of scheduling
    let mut total = vec![UserAcc::new(m_aps, k_ues); k_ues];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    let n = trials as f64;
    let rho = sig.rho_u;
    Ok(total
        .into_iter()
        .enumerate()
        .map(|(k, a)| {
            let ds = (rho * sig.eta[k]).sqrt() * a.mean_s;
            let bu_var = if trials > 1 {
                rho * sig.eta[k] * a.m2_s / (n - 1.0)
            } else {
                0.0
            };
            let interference_var = a
                .interference
                .iter()
                .zip(&sig.eta)
                .map(|(s, e)| rho * e * s / n)
                .collect();
            let eff = (a.r_sq - 2.0 * ds * a.r_q + ds * ds * a.q_sq) / n;
            McTerms {
                breakdown: SinrBreakdown {
                    ds_sq: ds * ds,
                    bu_var,
                    interference_var,
                    noise_var: a.noise / n,
                },
                effective_noise_var: eff,
                fourth_moment: a.g4.iter().map(|s| s / n).collect(),
                trials,
            }
        })
        .collect())
}

/// Monte-Carlo estimate of the UatF terms for user `k`.
pub fn mc_validate_terms(
    beta: &LargeScaleFading,
    sig: &UplinkSignalParams,
    distortions: &[f64],
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<McTerms> {
    check_user(beta, k)?;
    let mut all = mc_validate_all(beta, sig, &QuantizationNoise::Fixed(distortions.to_vec()), trials, seed)?;
    Ok(all.swap_remove(k))
}

/// One closed-form term next to its Monte-Carlo estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct TermComparison {
    pub user: usize,
    /// `ds_sq`, `bu_var`, `interference_var` or `noise_var`.
    pub term: &'static str,
    /// Interfering user for `interference_var`.
    pub other: Option<usize>,
    pub closed: f64,
    pub empirical: f64,
}

impl TermComparison {
    pub fn rel_err(&self) -> f64 {
        ((self.empirical - self.closed) / self.closed).abs()
    }
}

/// Pair every term of `closed[k]` with `mc[k]`.
pub fn compare_terms(closed: &[SinrBreakdown], mc: &[McTerms]) -> Result<Vec<TermComparison>> {
    if closed.len() != mc.len() {
        return Err(Error::invalid("closed-form and Monte-Carlo user counts differ"));
    }
    let mut out = Vec::new();
    for (k, (c, e)) in closed.iter().zip(mc).enumerate() {
        let e = &e.breakdown;
        let scalar = [
            ("ds_sq", c.ds_sq, e.ds_sq),
            ("bu_var", c.bu_var, e.bu_var),
            ("noise_var", c.noise_var, e.noise_var),
        ];
        for (term, closed, empirical) in scalar {
            out.push(TermComparison {
                user: k,
                term,
                other: None,
                closed,
                empirical,
            });
        }
        for (j, (ci, ei)) in c.interference_var.iter().zip(&e.interference_var).enumerate() {
            if j != k {
                out.push(TermComparison {
                    user: k,
                    term: "interference_var",
                    other: Some(j),
                    closed: *ci,
                    empirical: *ei,
                });
            }
        }
    }
    Ok(out)
}
