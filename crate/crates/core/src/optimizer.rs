//! Closed-form optima of the equal-fading EE problem, a brute-force grid
//! oracle and an alternating refinement loop.

use std::cmp::Ordering;
use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::csv::{sig, CsvTable};
use crate::energy::{ee_symmetric, SymmetricModel};
use crate::error::{Error, Result};

/// Quantities behind the closed-form optimal `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop1Intermediates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    /// Selected root `χ = 2^{-N C_FSO}` in `(0, 1]`, if any.
    pub chi: Option<f64>,
}

/// Result of [`optimal_n_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NOptimum {
    pub n_star: f64,
    pub intermediates: Prop1Intermediates,
    /// No root in `(0, 1]`; `n_star` comes from grid refinement.
    pub fallback_used: bool,
    /// The root lay below the lower bound and was clamped.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NSolveOptions {
    /// Smallest admissible `N`. The system model needs `N >= 1`; `0` opens
    /// the full `N >= 0` domain.
    pub n_floor: f64,
    /// Upper end of the fallback search.
    pub n_ceiling: f64,
}

impl Default for NSolveOptions {
    fn default() -> Self {
        Self {
            n_floor: 1.0,
            n_ceiling: 10.0,
        }
    }
}

/// `λ1..λ4` and the coefficients of `u1 χ² + u2 χ + u3 = 0`.
pub fn prop1_coefficients(m_of: usize, model: &SymmetricModel) -> Result<Prop1Intermediates> {
    if m_of == 0 || m_of > model.m {
        return Err(Error::invalid(format!("need 1 <= m_of <= {}, got {m_of}", model.m)));
    }
    let a = &model.agg;
    let mo = m_of as f64;
    let rest = (model.m - m_of) as f64;
    let c = model.c_fso;
    let lambda2 = a.l2 + rest * a.alpha_fso;
    let lambda4 = a.gamma_ep + rest * a.gamma_fso;
    let log_ratio = (lambda2 / a.l1).log2();
    let lambda1 = 1.0 + 1.0 / LN_2 + log_ratio + lambda4 * c / (a.gamma_of * mo);
    let lambda3 = lambda2 / (a.alpha_of * mo * LN_2);
    let g = a.gamma_of * a.alpha_of * mo;
    Ok(Prop1Intermediates {
        lambda1,
        lambda2,
        lambda3,
        lambda4,
        u1: g * (a.alpha_of * mo / lambda2 - 1.0 / LN_2),
        u2: g * lambda1,
        u3: g * (lambda2 / (a.alpha_of * mo)) * log_ratio,
        chi: None,
    })
}

/// Real roots of `u1 x² + u2 x + u3`, ascending.
fn quadratic_roots(u1: f64, u2: f64, u3: f64) -> Vec<f64> {
    let scale = u1.abs().max(u2.abs()).max(u3.abs());
    if scale == 0.0 {
        return vec![];
    }
    if u1.abs() <= 1e-14 * scale {
        return if u2 == 0.0 { vec![] } else { vec![-u3 / u2] };
    }
    let disc = u2 * u2 - 4.0 * u1 * u3;
    if disc < 0.0 {
        return vec![];
    }
    let q = -0.5 * (u2 + u2.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0]
    } else {
        vec![q / u1, u3 / q]
    };
    r.sort_by(f64::total_cmp);
    r
}

fn refine_n(model: &SymmetricModel, m_of: usize, lo: f64, hi: f64) -> Result<f64> {
    let coarse = NRange::new(lo, hi, 0.1)?;
    let mut best = (f64::NEG_INFINITY, lo);
    for n in coarse.values() {
        let ee = ee_symmetric(n, m_of, model)?;
        if ee > best.0 {
            best = (ee, n);
        }
    }
    let fine = NRange::new((best.1 - 0.1).max(lo), (best.1 + 0.1).min(hi), 0.001)?;
    for n in fine.values() {
        let ee = ee_symmetric(n, m_of, model)?;
        if ee > best.0 {
            best = (ee, n);
        }
    }
    Ok(best.1)
}

/// Optimal fiber capacity coefficient for `m_of` fiber APs. `Ok(None)` when
/// `m_of == 0`, where `N` has no effect.
pub fn optimal_n_closed_form(m_of: usize, model: &SymmetricModel, opts: &NSolveOptions) -> Result<Option<NOptimum>> {
    if m_of == 0 {
        return Ok(None);
    }
    if !(opts.n_floor >= 0.0 && opts.n_ceiling > opts.n_floor) {
        return Err(Error::invalid("need 0 <= n_floor < n_ceiling"));
    }
    let mut inter = prop1_coefficients(m_of, model)?;
    let c = model.c_fso;
    let mut best: Option<(f64, f64, f64)> = None;
    for chi in quadratic_roots(inter.u1, inter.u2, inter.u3) {
        if !(chi > 0.0 && chi <= 1.0) {
            continue;
        }
        let n = -chi.log2() / c;
        let n_eval = n.max(opts.n_floor).max(f64::MIN_POSITIVE);
        let ee = ee_symmetric(n_eval, m_of, model)?;
        if best.is_none_or(|(_, _, b)| ee > b) {
            best = Some((chi, n, ee));
        }
    }
    let lo = opts.n_floor.max(0.01);
    match best {
        Some((chi, n, _)) => {
            inter.chi = Some(chi);
            Ok(Some(NOptimum {
                n_star: n.max(opts.n_floor),
                intermediates: inter,
                fallback_used: false,
                clamped: n < opts.n_floor,
            }))
        }
        None => Ok(Some(NOptimum {
            n_star: refine_n(model, m_of, lo, opts.n_ceiling)?,
            intermediates: inter,
            fallback_used: true,
            clamped: false,
        })),
    }
}

/// Explicit expression for `N*` in terms of `λ1..λ4`, evaluated literally.
/// `None` when the square root or logarithm is undefined.
pub fn explicit_n_formula(m_of: usize, model: &SymmetricModel) -> Result<Option<f64>> {
    let p = prop1_coefficients(m_of, model)?;
    let a = &model.agg;
    let g = a.gamma_of * a.alpha_of * m_of as f64;
    let log_ratio = (p.lambda2 / a.l1).log2();
    let disc = p.lambda1 * p.lambda1 - 4.0 * (1.0 - p.lambda3) * log_ratio;
    if disc < 0.0 {
        return Ok(None);
    }
    let x = (-g * p.lambda1 + disc.sqrt()) / (2.885 * (1.0 - 1.0 / p.lambda3));
    if !(x > 0.0) || !x.is_finite() {
        return Ok(None);
    }
    Ok(Some(-x.log2() / model.c_fso))
}

/// Quantities behind the closed-form optimal `M_OF`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prop2Intermediates {
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub kappa4: f64,
    /// Alternative `κ1 = L2 + M α_OF`.
    pub kappa1_alt: f64,
    /// Stationary point `(κ1κ4 − κ2κ3)/(2κ2κ4)` of the linearised
    /// objective, when `κ2κ4 ≠ 0`.
    pub stationary: Option<f64>,
}

pub fn prop2_coefficients(n: f64, model: &SymmetricModel) -> Result<Prop2Intermediates> {
    if !(n > 0.0) {
        return Err(Error::invalid(format!("capacity coefficient must be > 0, got {n}")));
    }
    let a = &model.agg;
    let m = model.m as f64;
    let kappa1 = a.l2 + m * a.alpha_fso;
    let kappa2 = a.alpha_fso - a.alpha_of / ((n * model.c_fso).exp2() - 1.0);
    let kappa3 = a.gamma_ep + m * a.gamma_fso;
    let kappa4 = n * a.gamma_of - a.gamma_fso;
    let stationary = (kappa2 != 0.0 && kappa4 != 0.0)
        .then(|| (kappa1 * kappa4 - kappa2 * kappa3) / (2.0 * kappa2 * kappa4));
    Ok(Prop2Intermediates {
        kappa1,
        kappa2,
        kappa3,
        kappa4,
        kappa1_alt: a.l2 + m * a.alpha_of,
        stationary,
    })
}

/// Result of [`optimal_m_of_closed_form`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MofOptimum {
    pub m_of_star: usize,
    pub intermediates: Prop2Intermediates,
    /// `max{0, round(stationary)}` clamped to `[0, M]`.
    pub rounded_stationary: usize,
}

fn best_of(model: &SymmetricModel, n: f64, candidates: &[usize]) -> Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for &c in candidates {
        let ee = ee_symmetric(n, c, model)?;
        match best {
            Some((b, bc)) if ee < b || (ee == b && c >= bc) => {}
            _ => best = Some((ee, c)),
        }
    }
    Ok(best.map(|b| b.1).unwrap_or(0))
}

/// Optimal number of fiber APs at coefficient `n`.
///
/// The stationary point is compared against both endpoints by exact EE,
/// together with its floor and ceiling; ties go to fewer fiber links.
pub fn optimal_m_of_closed_form(n: f64, model: &SymmetricModel) -> Result<MofOptimum> {
    let k = prop2_coefficients(n, model)?;
    let m = model.m;
    let rounded_stationary = match k.stationary {
        Some(x) if x.is_finite() => x.round().clamp(0.0, m as f64) as usize,
        _ => 0,
    };
    let mut candidates = vec![0, m];
    if let Some(x) = k.stationary {
        if x > 0.0 && x < m as f64 {
            candidates.push(x.floor() as usize);
            candidates.push(x.ceil() as usize);
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    Ok(MofOptimum {
        m_of_star: best_of(model, n, &candidates)?,
        intermediates: k,
        rounded_stationary,
    })
}

/// Integer scan over `{0..M}` at fixed `n`; ties go to the smaller count.
pub fn best_m_of_exhaustive(n: f64, model: &SymmetricModel) -> Result<usize> {
    let all: Vec<usize> = (0..=model.m).collect();
    best_of(model, n, &all)
}

/// Inclusive arithmetic range `lo, lo+step, ..., <= hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NRange {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl NRange {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
            return Err(Error::invalid(format!("bad range {lo}:{hi}")));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::invalid(format!("step must be > 0, got {step}")));
        }
        Ok(Self { lo, hi, step })
    }

    /// A single point.
    pub fn point(n: f64) -> Result<Self> {
        Self::new(n, n, 1.0)
    }

    pub fn len(&self) -> usize {
        ((self.hi - self.lo) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid values, snapped to 1e-9 so printed values stay clean.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| ((self.lo + i as f64 * self.step) * 1e9).round() / 1e9)
            .collect()
    }
}

impl std::str::FromStr for NRange {
    type Err = Error;

    /// `lo:hi:step`, or a single value.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number '{p}' in range '{s}'")))
        };
        match parts.as_slice() {
            [v] => Self::point(num(v)?),
            [lo, hi, step] => Self::new(num(lo)?, num(hi)?, num(step)?),
            _ => Err(Error::invalid(format!("range must be lo:hi:step, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Grid,
    Alternating,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed-form",
            Method::Grid => "grid",
            Method::Alternating => "alternating",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptimum {
    pub n_star: f64,
    pub m_of_star: usize,
    pub ee_star: f64,
    pub method: Method,
}

/// One evaluated grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub n: f64,
    pub m_of: usize,
    pub ee: f64,
    pub sum_rate: f64,
}

/// `a` beats `b`: higher EE, then smaller N, then smaller M_OF.
fn better(a: &GridCell, b: &GridCell) -> bool {
    match a.ee.total_cmp(&b.ee) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a.n, a.m_of) < (b.n, b.m_of),
    }
}

/// EE and sum-rate on `n_range × {0..M}`, N-major. Cells with `N = 0` and
/// fiber links are skipped.
pub fn grid_cells(model: &SymmetricModel, n_range: &NRange) -> Result<Vec<GridCell>> {
    let rows: Vec<Result<Vec<GridCell>>> = n_range
        .values()
        .into_par_iter()
        .map(|n| {
            let mut row = Vec::with_capacity(model.m + 1);
            for m_of in 0..=model.m {
                if n == 0.0 && m_of > 0 {
                    continue;
                }
                row.push(GridCell {
                    n,
                    m_of,
                    ee: ee_symmetric(n, m_of, model)?,
                    sum_rate: model.sum_rate(n, m_of)?,
                });
            }
            Ok(row)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

pub fn argmax(cells: &[GridCell]) -> Option<GridCell> {
    cells.iter().fold(None, |best, c| match best {
        Some(b) if !better(c, &b) => Some(b),
        _ => Some(*c),
    })
}

/// Exhaustive oracle over `n_range × {0..M}`.
pub fn grid_search(model: &SymmetricModel, n_range: &NRange) -> Result<PlanOptimum> {
    let cells = grid_cells(model, n_range)?;
    let best = argmax(&cells).ok_or_else(|| Error::invalid("empty grid"))?;
    Ok(PlanOptimum {
        n_star: best.n,
        m_of_star: best.m_of,
        ee_star: best.ee,
        method: Method::Grid,
    })
}

pub fn grid_to_csv(cells: &[GridCell], table: &mut CsvTable) {
    table.header(&["n", "m_of", "ee", "sum_rate"]);
    for c in cells {
        table.row(&[sig(c.n, 9), c.m_of.to_string(), sig(c.ee, 9), sig(c.sum_rate, 9)]);
    }
}

/// One accepted point of the alternating loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterPoint {
    pub n: f64,
    pub m_of: usize,
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternatingResult {
    pub optimum: PlanOptimum,
    pub history: Vec<IterPoint>,
    pub converged: bool,
    /// Stopped on max_iters without reaching a fixed point.
    pub warning: bool,
}

/// Alternate the two closed forms from `(init_n, init_m_of)` until a fixed
/// point. A step that lowers EE is rejected and ends the loop.
pub fn alternating_optimize(
    model: &SymmetricModel,
    init_n: f64,
    init_m_of: usize,
    max_iters: usize,
    tol: f64,
    opts: &NSolveOptions,
) -> Result<AlternatingResult> {
    if init_m_of > model.m || !(init_n > 0.0) {
        return Err(Error::invalid("infeasible initial point"));
    }
    let mut cur = IterPoint {
        n: init_n,
        m_of: init_m_of,
        ee: ee_symmetric(init_n, init_m_of, model)?,
    };
    let mut history = vec![cur];
    let mut converged = false;
    let mut rejected = false;
    for _ in 0..max_iters {
        let n = match optimal_n_closed_form(cur.m_of, model, opts)? {
            Some(o) => o.n_star,
            None => cur.n,
        };
        let m_of = optimal_m_of_closed_form(n, model)?.m_of_star;
        let ee = ee_symmetric(n, m_of, model)?;
        if ee < cur.ee {
            rejected = true;
            break;
        }
        let fixed = m_of == cur.m_of && (m_of == 0 || (n - cur.n).abs() <= tol);
        cur = IterPoint { n, m_of, ee };
        history.push(cur);
        if fixed {
            converged = true;
            break;
        }
    }
    Ok(AlternatingResult {
        optimum: PlanOptimum {
            n_star: cur.n,
            m_of_star: cur.m_of,
            ee_star: cur.ee,
            method: Method::Alternating,
        },
        history,
        converged,
        warning: !converged && !rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{PowerCostParams, SymmetricInputs};

    fn model(beta: f64) -> SymmetricModel {
        let pc = PowerCostParams {
            p_circuit: 0.2,
            p0: 0.825,
            p_fh_fso: 0.3,
            p_fh_of: 0.25,
            mu_fso: 0.003,
            mu_of: 0.03,
            b_s: 20e6,
        };
        let inputs = SymmetricInputs {
            beta,
            rho_u: 0.1,
            eta: 0.5,
            delta_sq: 6.362_410_294_494_55e-13,
            m: 100,
            k: 10,
            c_fso: 2.0,
        };
        SymmetricModel::new(&inputs, &pc).unwrap()
    }

    #[test]
    fn quadratic_residual() {
        let md = model(1e-13);
        for m_of in [1, 10, 48, 100] {
            let o = optimal_n_closed_form(m_of, &md, &NSolveOptions::default()).unwrap().unwrap();
            if let Some(chi) = o.intermediates.chi {
                let p = o.intermediates;
                let r = p.u1 * chi * chi + p.u2 * chi + p.u3;
                let scale = p.u1.abs().max(p.u2.abs()).max(p.u3.abs());
                assert!(r.abs() < 1e-9 * scale, "m_of={m_of} residual {r}");
            }
        }
    }

    #[test]
    fn n_irrelevant_without_fiber() {
        assert!(optimal_n_closed_form(0, &model(1e-13), &NSolveOptions::default()).unwrap().is_none());
    }

    #[test]
    fn kappa2_vanishes_at_n1() {
        let md = model(1e-13);
        let k = prop2_coefficients(1.0, &md).unwrap();
        assert_eq!(k.kappa2, 0.0);
        assert!(k.stationary.is_none());
        assert_eq!(optimal_m_of_closed_form(1.0, &md).unwrap().m_of_star, 0);
    }

    #[test]
    fn closed_form_m_of_matches_scan() {
        for beta in [1e-14, 1e-13, 1e-12, 1e-11] {
            let md = model(beta);
            for n in [1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 10.0] {
                let a = optimal_m_of_closed_form(n, &md).unwrap().m_of_star;
                let b = best_m_of_exhaustive(n, &md).unwrap();
                assert!((a as i64 - b as i64).abs() <= 2, "beta={beta} n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn range_parsing() {
        let r: NRange = "1:10:0.1".parse().unwrap();
        assert_eq!(r.len(), 91);
        let v = r.values();
        assert_eq!(v[10], 2.0);
        assert_eq!(*v.last().unwrap(), 10.0);
        assert_eq!("2.5".parse::<NRange>().unwrap().values(), vec![2.5]);
        assert!("1:2".parse::<NRange>().is_err());
        assert!("1:2:0".parse::<NRange>().is_err());
    }

    #[test]
    fn single_point_grid() {
        let md = model(1e-13);
        let tiny = SymmetricModel { m: 0, ..md };
        let opt = grid_search(&tiny, &NRange::point(3.0).unwrap()).unwrap();
        assert_eq!((opt.n_star, opt.m_of_star), (3.0, 0));
    }

    #[test]
    fn tie_break_prefers_small() {
        let a = GridCell { n: 1.0, m_of: 3, ee: 1.0, sum_rate: 0.0 };
        let b = GridCell { n: 2.0, m_of: 0, ee: 1.0, sum_rate: 0.0 };
        let c = GridCell { n: 1.0, m_of: 1, ee: 1.0, sum_rate: 0.0 };
        assert_eq!(argmax(&[b, a, c]).unwrap(), c);
    }

    #[test]
    fn alternating_monotone() {
        let md = model(1e-13);
        let r = alternating_optimize(&md, 5.0, 10, 50, 1e-6, &NSolveOptions::default()).unwrap();
        for w in r.history.windows(2) {
            assert!(w[1].ee >= w[0].ee);
        }
        let again = alternating_optimize(
            &md,
            r.optimum.n_star,
            r.optimum.m_of_star,
            50,
            1e-6,
            &NSolveOptions::default(),
        )
        .unwrap();
        assert!(again.converged);
        assert!(again.history.len() <= 2);
    }

    #[test]
    fn gamma_scaling_keeps_argmax() {
        let md = model(1e-13);
        let r = NRange::new(1.0, 10.0, 0.5).unwrap();
        let a = grid_search(&md, &r).unwrap();
        let b = grid_search(&md.with_scaled_power(3.7), &r).unwrap();
        assert_eq!((a.n_star, a.m_of_star), (b.n_star, b.m_of_star));
    }
}
