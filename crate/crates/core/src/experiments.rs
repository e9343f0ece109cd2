//! Scenario runners: EE surfaces, EE versus fiber count, rate CDFs and the
//! EE/sum-rate trade-off. Every run is a pure function of its spec and seed
//! and renders a CSV whose first line records scenario, seed and config hash.

use std::path::PathBuf;

use rayon::prelude::*;

use crate::channel::{generate_topology, large_scale_fading, LargeScaleFading};
use crate::config::SystemConfig;
use crate::csv::{sig, CsvTable};
use crate::energy::{fronthaul_cost, network_power, SymmetricModel};
use crate::error::{Error, Result};
use crate::fronthaul::{per_ap_distortions, FronthaulPlan, UplinkSignalParams};
use crate::optimizer::{argmax, best_m_of_exhaustive, grid_cells, GridCell, Method, NRange, PlanOptimum};
use crate::rate::{compare_terms, mc_validate_all, rates_closed_form, sinr_closed_form, QuantizationNoise, TermComparison};
use crate::rng::{child_seed, Component};

/// Deployment-cost sets `(μ_OF, μ_FSO)` compared in the EE surface.
pub const COST_SETS: [(f64, f64); 3] = [(0.01, 0.001), (0.03, 0.003), (0.05, 0.003)];

/// Capacity coefficients of the EE-versus-M_OF curves.
pub const MOF_CURVE_NS: [f64; 6] = [1.0, 2.0, 3.0, 4.0, 7.0, 8.0];

/// `(N, M_OF)` configurations compared in the rate CDF and trade-off runs.
pub const LEGEND_PAIRS: [(f64, usize); 5] = [(2.0, 48), (3.0, 30), (4.0, 20), (7.0, 5), (8.0, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    EeSurface,
    EeVsMof,
    RateCdf,
    EeVsSumrate,
}

impl Scenario {
    pub fn tag(&self) -> &'static str {
        match self {
            Scenario::EeSurface => "ee_surface",
            Scenario::EeVsMof => "ee_vs_mof",
            Scenario::RateCdf => "rate_cdf",
            Scenario::EeVsSumrate => "ee_vs_sumrate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    pub config: SystemConfig,
    pub drops: usize,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    /// N grid of the surface runs.
    pub n_range: NRange,
    /// `(N, M_OF)` pairs of the drop-based runs.
    pub pairs: Vec<(f64, usize)>,
    /// Swept `ρ_u η` values of the trade-off run, Watt.
    pub tx_power_sweep: Vec<f64>,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, config: SystemConfig, seed: u64) -> Self {
        Self {
            scenario,
            config,
            drops: 200,
            seed,
            output_path: None,
            n_range: NRange {
                lo: 1.0,
                hi: 10.0,
                step: 0.1,
            },
            pairs: LEGEND_PAIRS.to_vec(),
            tx_power_sweep: default_tx_power_sweep(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.drops == 0 {
            return Err(Error::invalid("drops must be >= 1"));
        }
        if self.pairs.is_empty() || self.tx_power_sweep.is_empty() {
            return Err(Error::invalid("empty pair list or power sweep"));
        }
        for &(n, m_of) in &self.pairs {
            if m_of > self.config.m || !(n >= 0.0) || (m_of > 0 && n == 0.0) {
                return Err(Error::invalid(format!("invalid pair (N={n}, M_OF={m_of})")));
            }
        }
        for &p in &self.tx_power_sweep {
            if !(0.0..=self.config.rho_u()).contains(&p) {
                return Err(Error::invalid(format!("swept power {p} W outside [0, rho_u]")));
            }
        }
        Ok(())
    }

    fn table(&self) -> CsvTable {
        let mut t = CsvTable::new();
        t.comment(&format!(
            "scenario={} seed={} config_sha={}",
            self.scenario.tag(),
            self.seed,
            self.config.sha()
        ));
        t
    }

    fn finish(&self, table: &CsvTable) -> Result<()> {
        match &self.output_path {
            Some(p) => table.write_to(p),
            None => Ok(()),
        }
    }
}

/// `0` followed by 1..=100 mW in 1 mW steps, in Watt.
pub fn default_tx_power_sweep() -> Vec<f64> {
    (0..=100).map(|i| i as f64 * 1e-3).collect()
}

/// Step-function empirical CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("empty sample"));
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::invalid("NaN in sample"));
        }
        values.sort_by(f64::total_cmp);
        let n = values.len() as f64;
        let probs = (1..=values.len()).map(|i| i as f64 / n).collect();
        Ok(Self { values, probs })
    }

    /// `P(X <= x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.values.partition_point(|v| *v <= x);
        i as f64 / self.values.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// `true` when `self` first-order dominates `other`, i.e. `F_self <= F_other`
    /// everywhere.
    pub fn dominates(&self, other: &EmpiricalCdf) -> bool {
        self.values
            .iter()
            .chain(&other.values)
            .all(|&x| self.eval(x) <= other.eval(x))
    }
}

/// Argmax of one cost set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSetOptimum {
    pub mu_of: f64,
    pub mu_fso: f64,
    pub optimum: PlanOptimum,
}

#[derive(Debug, Clone)]
pub struct SurfaceResult {
    pub beta: f64,
    pub optima: Vec<CostSetOptimum>,
    pub csv: CsvTable,
}

/// EE over the `(N, M_OF)` grid for each cost set, sharing one `β`.
pub fn run_ee_surface(spec: &ExperimentSpec) -> Result<SurfaceResult> {
    spec.validate()?;
    let beta = spec.config.resolve_beta(spec.seed)?;
    let mut table = spec.table();
    table.header(&["mu_of", "mu_fso", "n", "m_of", "ee", "sum_rate"]);
    let mut optima = Vec::new();
    for (mu_of, mu_fso) in COST_SETS {
        let mut cfg = spec.config.clone();
        cfg.mu_of = mu_of;
        cfg.mu_fso = mu_fso;
        let model = SymmetricModel::new(&cfg.symmetric_inputs(beta), &cfg.power_cost())?;
        let cells = grid_cells(&model, &spec.n_range)?;
        for c in &cells {
            table.row(&[
                sig(mu_of, 9),
                sig(mu_fso, 9),
                sig(c.n, 9),
                c.m_of.to_string(),
                sig(c.ee, 9),
                sig(c.sum_rate, 9),
            ]);
        }
        let best = argmax(&cells).ok_or_else(|| Error::invalid("empty grid"))?;
        optima.push(CostSetOptimum {
            mu_of,
            mu_fso,
            optimum: PlanOptimum {
                n_star: best.n,
                m_of_star: best.m_of,
                ee_star: best.ee,
                method: Method::Grid,
            },
        });
    }
    spec.finish(&table)?;
    Ok(SurfaceResult {
        beta,
        optima,
        csv: table,
    })
}

/// One EE-versus-M_OF curve.
#[derive(Debug, Clone, PartialEq)]
pub struct MofCurve {
    pub n: f64,
    pub cells: Vec<GridCell>,
    pub best_m_of: usize,
}

#[derive(Debug, Clone)]
pub struct MofCurvesResult {
    pub beta: f64,
    pub curves: Vec<MofCurve>,
    pub csv: CsvTable,
}

/// EE as a function of `M_OF` for each `N` in [`MOF_CURVE_NS`].
pub fn run_ee_vs_mof(spec: &ExperimentSpec) -> Result<MofCurvesResult> {
    spec.validate()?;
    let model = spec.config.symmetric_model(spec.seed)?;
    let beta = spec.config.resolve_beta(spec.seed)?;
    let mut table = spec.table();
    table.header(&["n", "m_of", "ee", "sum_rate"]);
    let mut curves = Vec::new();
    for n in MOF_CURVE_NS {
        let cells = grid_cells(&model, &NRange::point(n)?)?;
        for c in &cells {
            table.row(&[sig(c.n, 9), c.m_of.to_string(), sig(c.ee, 9), sig(c.sum_rate, 9)]);
        }
        curves.push(MofCurve {
            n,
            best_m_of: best_m_of_exhaustive(n, &model)?,
            cells,
        });
    }
    spec.finish(&table)?;
    Ok(MofCurvesResult {
        beta,
        curves,
        csv: table,
    })
}

/// Large-scale fading of drop `d`.
pub fn drop_fading(cfg: &SystemConfig, seed: u64, d: usize) -> Result<LargeScaleFading> {
    let s = child_seed(seed, Component::Experiment, d as u64);
    let topo = generate_topology(cfg.m, cfg.k, cfg.area_side, s)?;
    large_scale_fading(&topo, &cfg.path_loss()?, &cfg.shadowing()?, s)
}

fn all_drops(spec: &ExperimentSpec) -> Result<Vec<LargeScaleFading>> {
    (0..spec.drops)
        .into_par_iter()
        .map(|d| drop_fading(&spec.config, spec.seed, d))
        .collect()
}

fn plan_of(cfg: &SystemConfig, n: f64, m_of: usize) -> Result<FronthaulPlan> {
    FronthaulPlan::fso_first(cfg.m, m_of, cfg.c_fso, n)
}

/// Per-user rates of every drop for one plan, drop-major.
fn drop_rates(drops: &[LargeScaleFading], sig_p: &UplinkSignalParams, plan: &FronthaulPlan) -> Result<Vec<Vec<f64>>> {
    drops
        .par_iter()
        .map(|beta| {
            let d = per_ap_distortions(beta, sig_p, plan)?;
            Ok(rates_closed_form(beta, sig_p, &d)?.per_user_rate)
        })
        .collect()
}

/// CDFs of one `(N, M_OF)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCdf {
    pub n: f64,
    pub m_of: usize,
    pub sum_rate: EmpiricalCdf,
    pub per_user: EmpiricalCdf,
}

#[derive(Debug, Clone)]
pub struct RateCdfResult {
    pub pairs: Vec<PairCdf>,
    pub csv: CsvTable,
}

/// Sum-rate and per-user-rate CDFs over random drops, all pairs evaluated on
/// the same drops.
pub fn run_rate_cdf(spec: &ExperimentSpec) -> Result<RateCdfResult> {
    spec.validate()?;
    let drops = all_drops(spec)?;
    let sig_p = spec.config.signal_params()?;
    let mut table = spec.table();
    table.header(&["n", "m_of", "metric", "value", "cdf"]);
    let mut pairs = Vec::new();
    for &(n, m_of) in &spec.pairs {
        let rates = drop_rates(&drops, &sig_p, &plan_of(&spec.config, n, m_of)?)?;
        let sum_rate = EmpiricalCdf::new(rates.iter().map(|r| r.iter().sum()).collect())?;
        let per_user = EmpiricalCdf::new(rates.into_iter().flatten().collect())?;
        for (metric, cdf) in [("sum_rate", &sum_rate), ("per_user_rate", &per_user)] {
            for (v, p) in cdf.values.iter().zip(&cdf.probs) {
                table.row(&[sig(n, 9), m_of.to_string(), metric.to_string(), sig(*v, 9), sig(*p, 9)]);
            }
        }
        pairs.push(PairCdf {
            n,
            m_of,
            sum_rate,
            per_user,
        });
    }
    spec.finish(&table)?;
    Ok(RateCdfResult { pairs, csv: table })
}

/// One point of a trade-off curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    /// `ρ_u η`, Watt.
    pub tx_power: f64,
    /// Mean sum-rate over drops.
    pub sum_rate: f64,
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    pub n: f64,
    pub m_of: usize,
    pub points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    /// EE at sum-rate `target`, linearly interpolated between neighbouring
    /// sweep points. `None` outside the traced range.
    pub fn ee_at_sum_rate(&self, target: f64) -> Option<f64> {
        self.points.windows(2).find_map(|w| {
            let (a, b) = (w[0], w[1]);
            let (lo, hi) = if a.sum_rate <= b.sum_rate { (a, b) } else { (b, a) };
            if target < lo.sum_rate || target > hi.sum_rate {
                return None;
            }
            if hi.sum_rate == lo.sum_rate {
                return Some(lo.ee.max(hi.ee));
            }
            let t = (target - lo.sum_rate) / (hi.sum_rate - lo.sum_rate);
            Some(lo.ee + t * (hi.ee - lo.ee))
        })
    }

    pub fn sum_rate_range(&self) -> (f64, f64) {
        self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.sum_rate), hi.max(p.sum_rate))
        })
    }
}

#[derive(Debug, Clone)]
pub struct TradeoffResult {
    pub curves: Vec<TradeoffCurve>,
    pub csv: CsvTable,
}

/// EE versus mean sum-rate, traced by sweeping `ρ_u η` through `η`.
/// `EE = B_s · mean sum-rate / (P_net + Ω_fh)`.
pub fn run_ee_vs_sumrate(spec: &ExperimentSpec) -> Result<TradeoffResult> {
    spec.validate()?;
    let cfg = &spec.config;
    let drops = all_drops(spec)?;
    let pc = cfg.power_cost();
    let mut table = CsvTable::new();
    table.comment(&format!(
        "scenario={} seed={} config_sha={} sweep=rho_u_eta_watt",
        spec.scenario.tag(),
        spec.seed,
        cfg.sha()
    ));
    table.header(&["n", "m_of", "tx_power", "sum_rate", "ee"]);
    let mut curves = Vec::new();
    for &(n, m_of) in &spec.pairs {
        let plan = plan_of(cfg, n, m_of)?;
        let omega = fronthaul_cost(&plan, &pc);
        let mut points = Vec::with_capacity(spec.tx_power_sweep.len());
        for &p in &spec.tx_power_sweep {
            let eta = if cfg.rho_u() > 0.0 { p / cfg.rho_u() } else { 0.0 };
            let sig_p = UplinkSignalParams::uniform(cfg.rho_u(), eta, cfg.delta_sq(), cfg.m, cfg.k)?;
            let sum_rate = if p == 0.0 {
                0.0
            } else {
                let rates = drop_rates(&drops, &sig_p, &plan)?;
                rates.iter().map(|r| r.iter().sum::<f64>()).sum::<f64>() / drops.len() as f64
            };
            let p_net = network_power(&sig_p, &pc, &plan)?;
            let ee = pc.b_s * sum_rate / (p_net + omega);
            table.row(&[sig(n, 9), m_of.to_string(), sig(p, 9), sig(sum_rate, 9), sig(ee, 9)]);
            points.push(TradeoffPoint {
                tx_power: p,
                sum_rate,
                ee,
            });
        }
        curves.push(TradeoffCurve { n, m_of, points });
    }
    spec.finish(&table)?;
    Ok(TradeoffResult { curves, csv: table })
}

#[derive(Debug, Clone)]
pub struct ValidationResult {
    pub beta: LargeScaleFading,
    pub comparisons: Vec<TermComparison>,
    pub max_rel_err: f64,
    pub csv: CsvTable,
}

/// Closed-form UatF terms against a Monte-Carlo combiner on one random
/// `m × k` drop where half the APs use fiber with `N = 2`.
pub fn run_validation(cfg: &SystemConfig, m: usize, k: usize, trials: usize, seed: u64) -> Result<ValidationResult> {
    let sub = SystemConfig { m, k, ..cfg.clone() };
    sub.validate()?;
    let beta = drop_fading(&sub, seed, 0)?;
    let sig_p = sub.signal_params()?;
    let plan = plan_of(&sub, 2.0, m / 2)?;
    let d = per_ap_distortions(&beta, &sig_p, &plan)?;
    let closed = (0..k)
        .map(|u| sinr_closed_form(&beta, &sig_p, &d, u))
        .collect::<Result<Vec<_>>>()?;
    let mc = mc_validate_all(&beta, &sig_p, &QuantizationNoise::Fixed(d), trials, seed)?;
    let comparisons = compare_terms(&closed, &mc)?;
    let max_rel_err = comparisons.iter().map(TermComparison::rel_err).fold(0.0, f64::max);
    let mut table = CsvTable::new();
    table.comment(&format!("scenario=validate seed={seed} config_sha={} trials={trials}", sub.sha()));
    table.header(&["user", "term", "other", "closed", "monte_carlo", "rel_err"]);
    for c in &comparisons {
        table.row(&[
            c.user.to_string(),
            c.term.to_string(),
            c.other.map(|o| o.to_string()).unwrap_or_default(),
            sig(c.closed, 9),
            sig(c.empirical, 9),
            sig(c.rel_err(), 9),
        ]);
    }
    Ok(ValidationResult {
        beta,
        comparisons,
        max_rel_err,
        csv: table,
    })
}
