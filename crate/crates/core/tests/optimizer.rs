#![allow(clippy::neg_cmp_op_on_partial_ord)]

use cellfree_core::config::SystemConfig;
use cellfree_core::energy::{ee_symmetric, PowerCostParams, SymmetricInputs, SymmetricModel};
use cellfree_core::optimizer::*;

fn model(beta: f64, mu_fso: f64, mu_of: f64) -> SymmetricModel {
    let cfg = SystemConfig {
        beta: Some(beta),
        mu_fso,
        mu_of,
        ..SystemConfig::default()
    };
    cfg.symmetric_model(0).unwrap()
}

fn betas() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-14.0 + 0.25 * i as f64)).collect()
}

#[test]
fn quadratic_roots_satisfy_equation() {
    for beta in betas() {
        let md = model(beta, 0.003, 0.03);
        for m_of in [1, 5, 20, 48, 80, 100] {
            let o = optimal_n_closed_form(m_of, &md, &NSolveOptions::default()).unwrap().unwrap();
            assert!(o.n_star >= 1.0);
            if let Some(chi) = o.intermediates.chi {
                assert!(chi > 0.0 && chi <= 1.0);
                let p = o.intermediates;
                let scale = p.u1.abs().max(p.u2.abs()).max(p.u3.abs());
                assert!((p.u1 * chi * chi + p.u2 * chi + p.u3).abs() < 1e-9 * scale);
            } else {
                assert!(o.fallback_used);
            }
        }
    }
}

#[test]
fn quadratic_route_no_worse_than_explicit_formula() {
    let grid = NRange::new(1.0, 10.0, 0.01).unwrap();
    for beta in betas() {
        let md = model(beta, 0.003, 0.03);
        for m_of in [1, 10, 48, 100] {
            let Some(explicit) = explicit_n_formula(m_of, &md).unwrap() else { continue };
            if !(1.0..=10.0).contains(&explicit) {
                continue;
            }
            let q = optimal_n_closed_form(m_of, &md, &NSolveOptions::default()).unwrap().unwrap();
            let snap = |n: f64| grid.values().into_iter().min_by(|a, b| (a - n).abs().total_cmp(&(b - n).abs())).unwrap();
            let eq = ee_symmetric(snap(q.n_star.min(10.0)), m_of, &md).unwrap();
            let ep = ee_symmetric(snap(explicit), m_of, &md).unwrap();
            assert!(eq >= ep, "beta={beta:e} m_of={m_of}: {eq} < {ep}");
        }
    }
}

#[test]
fn research_floor_allows_small_n() {
    let md = model(1e-13, 0.003, 0.03);
    let opts = NSolveOptions {
        n_floor: 0.0,
        ..NSolveOptions::default()
    };
    let o = optimal_n_closed_form(48, &md, &opts).unwrap().unwrap();
    assert!(o.n_star > 0.0);
}

#[test]
fn coarse_grid_within_fine_spread() {
    let md = model(1e-13, 0.003, 0.03);
    let coarse = grid_search(&md, &NRange::new(1.0, 10.0, 0.1).unwrap()).unwrap();
    let fine_cells = grid_cells(&md, &NRange::new(1.0, 10.0, 0.01).unwrap()).unwrap();
    let fine = argmax(&fine_cells).unwrap();
    let cell: Vec<f64> = fine_cells
        .iter()
        .filter(|c| (c.n - coarse.n_star).abs() <= 0.1 + 1e-9 && c.m_of == coarse.m_of_star)
        .map(|c| c.ee)
        .collect();
    let lo = cell.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(coarse.ee_star >= lo && coarse.ee_star <= fine.ee);
}

#[test]
fn grid_optimum_matches_ee_symmetric() {
    let md = model(1e-13, 0.003, 0.03);
    let g = grid_search(&md, &NRange::new(1.0, 10.0, 0.1).unwrap()).unwrap();
    assert_eq!(g.ee_star, ee_symmetric(g.n_star, g.m_of_star, &md).unwrap());
    assert!(g.m_of_star <= md.m);
}

#[test]
fn alternating_reaches_grid_optimum() {
    for beta in betas() {
        let md = model(beta, 0.003, 0.03);
        let g = grid_search(&md, &NRange::new(1.0, 10.0, 0.01).unwrap()).unwrap();
        let a = alternating_optimize(&md, 5.0, 10, 50, 1e-6, &NSolveOptions::default()).unwrap();
        for w in a.history.windows(2) {
            assert!(w[1].ee >= w[0].ee);
        }
        assert!(a.optimum.ee_star <= g.ee_star * (1.0 + 1e-4));
        if a.optimum.m_of_star > 0 {
            assert!((a.optimum.m_of_star as i64 - g.m_of_star as i64).abs() <= 1, "beta={beta:e}");
        }
    }
}

#[test]
fn grid_csv_layout() {
    let md = model(1e-13, 0.003, 0.03);
    let cells = grid_cells(&md, &NRange::new(1.0, 2.0, 0.5).unwrap()).unwrap();
    assert_eq!(cells.len(), 3 * 101);
    let mut t = cellfree_core::csv::CsvTable::new();
    grid_to_csv(&cells, &mut t);
    let mut lines = t.as_str().lines();
    assert_eq!(lines.next(), Some("n,m_of,ee,sum_rate"));
    assert_eq!(lines.count(), cells.len());
}

#[test]
fn degenerate_kappa4_handled() {
    // fiber deployment exactly as cheap as N FSO links at N = 1
    let p = PowerCostParams {
        p_circuit: 0.2,
        p0: 0.825,
        p_fh_fso: 0.3,
        p_fh_of: 0.3,
        mu_fso: 0.003,
        mu_of: 0.003,
        b_s: 20e6,
    };
    let inputs = SymmetricInputs {
        beta: 1e-13,
        rho_u: 0.1,
        eta: 0.5,
        delta_sq: 6.36e-13,
        m: 100,
        k: 10,
        c_fso: 2.0,
    };
    let md = SymmetricModel::new(&inputs, &p).unwrap();
    let k = prop2_coefficients(1.0, &md).unwrap();
    assert_eq!(k.kappa4, 0.0);
    let r = optimal_m_of_closed_form(1.0, &md).unwrap();
    assert!(r.intermediates.stationary.is_none());
    assert!(r.m_of_star == 0 || r.m_of_star == md.m);
    let other = md.m - r.m_of_star;
    assert!(ee_symmetric(1.0, r.m_of_star, &md).unwrap() >= ee_symmetric(1.0, other, &md).unwrap());
}
