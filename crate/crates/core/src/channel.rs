//! Network geometry and propagation: AP/UE drops, the three-slope path-loss
//! model, correlated log-normal shadowing and Rayleigh small-scale fading.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::csv::{sig, CsvTable};
use crate::error::{Error, Result};
use crate::rng::{self, Component};

/// Planar point in meters.
pub type Point = [f64; 2];

/// AP and UE positions inside a square area.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub area_side: f64,
}

impl NetworkTopology {
    pub fn new(ap_positions: Vec<Point>, ue_positions: Vec<Point>, area_side: f64) -> Result<Self> {
        if ap_positions.is_empty() || ue_positions.is_empty() {
            return Err(Error::invalid("topology needs at least one AP and one UE"));
        }
        if !(area_side > 0.0 && area_side.is_finite()) {
            return Err(Error::invalid(format!("area side must be positive, got {area_side}")));
        }
        let inside = |p: &Point| p.iter().all(|c| (0.0..=area_side).contains(c));
        if !ap_positions.iter().chain(&ue_positions).all(inside) {
            return Err(Error::invalid("all positions must lie inside the square area"));
        }
        Ok(Self {
            ap_positions,
            ue_positions,
            area_side,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.ap_positions.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ue_positions.len()
    }

    /// Euclidean AP–UE distance in meters.
    pub fn distance(&self, ap: usize, ue: usize) -> f64 {
        let [ax, ay] = self.ap_positions[ap];
        let [ux, uy] = self.ue_positions[ue];
        (ax - ux).hypot(ay - uy)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new();
        t.header(&["kind", "index", "x_m", "y_m"]);
        for (kind, pts) in [("ap", &self.ap_positions), ("ue", &self.ue_positions)] {
            for (i, p) in pts.iter().enumerate() {
                t.row(&[kind.to_string(), i.to_string(), sig(p[0], 12), sig(p[1], 12)]);
            }
        }
        t
    }
}

/// Drop `m` APs and `k` UEs uniformly over `[0, area_side]²`.
pub fn generate_topology(m: usize, k: usize, area_side: f64, seed: u64) -> Result<NetworkTopology> {
    if m == 0 || k == 0 {
        return Err(Error::invalid(format!("need m >= 1 and k >= 1, got m={m}, k={k}")));
    }
    if !(area_side > 0.0 && area_side.is_finite()) {
        return Err(Error::invalid(format!("area side must be positive, got {area_side}")));
    }
    let mut ap_rng = rng::stream(seed, Component::Topology, 0);
    let mut ue_rng = rng::stream(seed, Component::Topology, 1);
    let draw = |r: &mut rand_chacha::ChaCha8Rng| -> Point {
        [r.random::<f64>() * area_side, r.random::<f64>() * area_side]
    };
    let aps = (0..m).map(|_| draw(&mut ap_rng)).collect();
    let ues = (0..k).map(|_| draw(&mut ue_rng)).collect();
    NetworkTopology::new(aps, ues, area_side)
}

/// Unit in which distances enter the `log10` terms of the path-loss formula.
///
/// Breakpoints and positions are always stored in meters; this only selects
/// the scale of the logarithm argument. With `L ≈ 140.7 dB` the model is
/// calibrated for kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceUnit {
    #[default]
    Kilometers,
    Meters,
}

impl DistanceUnit {
    fn scale_meters(self, d: f64) -> f64 {
        match self {
            DistanceUnit::Kilometers => d / 1000.0,
            DistanceUnit::Meters => d,
        }
    }
}

/// Three-slope path-loss model with a Hata-style constant `L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub f_mhz: f64,
    pub h_ap: f64,
    pub h_ue: f64,
    /// Flat-region breakpoint, meters.
    pub d0: f64,
    /// Two-slope/three-slope breakpoint, meters.
    pub d1: f64,
    pub distance_unit: DistanceUnit,
}

impl PathLossModel {
    pub fn new(f_mhz: f64, h_ap: f64, h_ue: f64, d0: f64, d1: f64, distance_unit: DistanceUnit) -> Result<Self> {
        let model = Self {
            f_mhz,
            h_ap,
            h_ue,
            d0,
            d1,
            distance_unit,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.f_mhz) || !positive(self.h_ap) || !positive(self.h_ue) {
            return Err(Error::invalid("frequency and antenna heights must be positive"));
        }
        if !(positive(self.d0) && self.d0 < self.d1 && self.d1.is_finite()) {
            return Err(Error::invalid(format!(
                "breakpoints must satisfy 0 < d0 < d1, got d0={}, d1={}",
                self.d0, self.d1
            )));
        }
        Ok(())
    }

    /// The constant `L` in dB (frequency in MHz, heights in meters).
    pub fn l_db(&self) -> f64 {
        let lf = self.f_mhz.log10();
        46.3 + 33.9 * lf - 13.82 * self.h_ap.log10() - (1.1 * lf - 0.7) * self.h_ue + (1.56 * lf - 0.8)
    }
}

/// Path loss in dB (a negative number) at AP–UE distance `d` meters.
///
/// `d == d1` falls in the middle branch and `d == d0` in the flat branch.
pub fn path_loss_db(d: f64, model: &PathLossModel) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::invalid(format!("distance must be positive, got {d}")));
    }
    let u = |x: f64| model.distance_unit.scale_meters(x).log10();
    let l = model.l_db();
    let pl = if d > model.d1 {
        -l - 35.0 * u(d)
    } else if d > model.d0 {
        -l - 15.0 * u(model.d1) - 20.0 * u(d)
    } else {
        -l - 15.0 * u(model.d1) - 20.0 * u(model.d0)
    };
    Ok(pl)
}

/// Correlated shadowing `z_mk = √ϑ a_m + √(1−ϑ) b_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowingModel {
    pub sigma_sh_db: f64,
    pub theta: f64,
}

impl ShadowingModel {
    pub fn new(sigma_sh_db: f64, theta: f64) -> Result<Self> {
        let s = Self { sigma_sh_db, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_sh_db >= 0.0 && self.sigma_sh_db.is_finite()) {
            return Err(Error::invalid("shadowing deviation must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::invalid(format!("theta must be in [0, 1], got {}", self.theta)));
        }
        Ok(())
    }
}

/// Large-scale fading coefficients, `M × K`, row-major (one row per AP).
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleFading {
    m: usize,
    k: usize,
    beta: Vec<f64>,
}

impl LargeScaleFading {
    pub fn from_vec(m: usize, k: usize, beta: Vec<f64>) -> Result<Self> {
        if m == 0 || k == 0 || beta.len() != m * k {
            return Err(Error::invalid(format!(
                "fading matrix must be {m}x{k} with m, k >= 1 (got {} entries)",
                beta.len()
            )));
        }
        if let Some(bad) = beta.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::invalid(format!("fading coefficients must be positive and finite, got {bad}")));
        }
        Ok(Self { m, k, beta })
    }

    /// Every entry equal to `beta`.
    pub fn uniform(m: usize, k: usize, beta: f64) -> Result<Self> {
        Self::from_vec(m, k, vec![beta; m * k])
    }

    pub fn num_aps(&self) -> usize {
        self.m
    }

    pub fn num_ues(&self) -> usize {
        self.k
    }

    pub fn get(&self, ap: usize, ue: usize) -> f64 {
        self.beta[ap * self.k + ue]
    }

    /// `β_m·`, the coefficients from AP `ap` to every UE.
    pub fn ap_row(&self, ap: usize) -> &[f64] {
        &self.beta[ap * self.k..(ap + 1) * self.k]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.beta
    }

    /// `exp(mean(ln β))`.
    pub fn geometric_mean(&self) -> f64 {
        let s: f64 = self.beta.iter().map(|b| b.ln()).sum();
        (s / self.beta.len() as f64).exp()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new();
        let mut header = vec!["ap".to_string()];
        header.extend((0..self.k).map(|k| format!("ue_{k}")));
        t.header(&header);
        for m in 0..self.m {
            let mut row = vec![m.to_string()];
            row.extend(self.ap_row(m).iter().map(|b| sig(*b, 12)));
            t.row(&row);
        }
        t
    }
}

/// Shadowing factors `z_mk` for an `m × k` network.
pub fn shadowing_factors(m: usize, k: usize, sh: &ShadowingModel, seed: u64) -> Vec<f64> {
    let mut ap_rng = rng::stream(seed, Component::Shadowing, 0);
    let mut ue_rng = rng::stream(seed, Component::Shadowing, 1);
    let a: Vec<f64> = (0..m).map(|_| ap_rng.sample(StandardNormal)).collect();
    let b: Vec<f64> = (0..k).map(|_| ue_rng.sample(StandardNormal)).collect();
    let (wa, wb) = (sh.theta.sqrt(), (1.0 - sh.theta).sqrt());
    let mut z = Vec::with_capacity(m * k);
    for am in &a {
        z.extend(b.iter().map(|bk| wa * am + wb * bk));
    }
    z
}

/// `β_mk = 10^(PL_mk/10) · 10^(σ_sh z_mk / 10)`.
pub fn large_scale_fading(
    topology: &NetworkTopology,
    pl: &PathLossModel,
    sh: &ShadowingModel,
    seed: u64,
) -> Result<LargeScaleFading> {
    pl.validate()?;
    sh.validate()?;
    let (m, k) = (topology.num_aps(), topology.num_ues());
    let z = shadowing_factors(m, k, sh, seed);
    let mut beta = Vec::with_capacity(m * k);
    for ap in 0..m {
        for ue in 0..k {
            // co-located points hit the flat branch
            let d = topology.distance(ap, ue).max(f64::MIN_POSITIVE);
            let pl_db = path_loss_db(d, pl)?;
            let shadow_db = if sh.sigma_sh_db == 0.0 { 0.0 } else { sh.sigma_sh_db * z[ap * k + ue] };
            beta.push(10f64.powf(pl_db / 10.0) * 10f64.powf(shadow_db / 10.0));
        }
    }
    LargeScaleFading::from_vec(m, k, beta)
}

/// Small-scale Rayleigh coefficients, `M × K`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SmallScaleFading {
    pub m: usize,
    pub k: usize,
    pub h: Vec<Complex64>,
}

impl SmallScaleFading {
    pub fn get(&self, ap: usize, ue: usize) -> Complex64 {
        self.h[ap * self.k + ue]
    }
}

/// One `CN(0, variance)` sample.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// I.i.d. `CN(0, 1)` draws for an `m × k` network.
pub fn draw_small_scale(m: usize, k: usize, seed: u64) -> Result<SmallScaleFading> {
    if m == 0 || k == 0 {
        return Err(Error::invalid(format!("need m >= 1 and k >= 1, got m={m}, k={k}")));
    }
    let mut r = rng::stream(seed, Component::SmallScale, 0);
    let h = (0..m * k).map(|_| sample_cn(&mut r, 1.0)).collect();
    Ok(SmallScaleFading { m, k, h })
}
