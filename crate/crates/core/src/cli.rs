//! Command-line front end. Summaries go to stdout, the effective
//! configuration to stderr and tables to CSV files in the output directory.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{load_config, SystemConfig};
use crate::csv::CsvTable;
use crate::error::Result;
use crate::experiments::{
    run_ee_surface, run_ee_vs_mof, run_ee_vs_sumrate, run_rate_cdf, run_validation, ExperimentSpec, Scenario,
};
use crate::optimizer::{
    alternating_optimize, grid_cells, grid_to_csv, argmax, optimal_m_of_closed_form, optimal_n_closed_form,
    NRange, NSolveOptions,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CELLFREE_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "cellfree-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cellfree", version, about = "Fiber/FSO fronthaul planner for cell-free massive MIMO")]
pub struct Cli {
    /// TOML config file, or `default`.
    #[arg(long, global = true, default_value = "default")]
    pub config: PathBuf,
    /// Master seed; per-component streams are derived from it.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (defaults to $CELLFREE_OUT_DIR, then ./cellfree-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form optimum refined by alternating the two closed forms.
    Optimize {
        #[arg(long, default_value_t = 5.0)]
        init_n: f64,
        #[arg(long, default_value_t = 10)]
        init_m_of: usize,
        #[arg(long, default_value_t = 50)]
        max_iters: usize,
        /// Search N >= 0 instead of N >= 1.
        #[arg(long)]
        allow_n_below_one: bool,
    },
    /// Exhaustive grid over N and M_OF.
    Grid {
        #[arg(long = "n", default_value = "1:10:0.1")]
        n_range: NRange,
    },
    /// EE surfaces for the three cost sets plus EE-vs-M_OF curves.
    Surface {
        #[arg(long = "n", default_value = "1:10:0.1")]
        n_range: NRange,
    },
    /// Sum-rate and per-user rate CDFs over random drops.
    Cdf {
        #[arg(long, default_value_t = 200)]
        drops: usize,
    },
    /// EE versus sum-rate, sweeping the UE transmit power.
    Tradeoff {
        #[arg(long, default_value_t = 200)]
        drops: usize,
    },
    /// Closed-form SINR terms against Monte-Carlo simulation.
    Validate {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn save(dir: &Path, name: &str, table: &CsvTable, out: &mut dyn Write) -> Result<()> {
    let path = dir.join(name);
    table.write_to(&path)?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn log_config(cfg: &SystemConfig, seed: u64, err: &mut dyn Write) {
    let _ = writeln!(err, "# seed = {seed}");
    let _ = writeln!(err, "# config_sha = {}", cfg.sha());
    for line in cfg.to_toml().lines() {
        let _ = writeln!(err, "# {line}");
    }
}

/// Outcome of a command: `Ok(true)` success, `Ok(false)` failed check.
fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<bool> {
    let cfg = load_config(&cli.config)?;
    log_config(&cfg, cli.seed, err);
    let dir = out_dir(&cli.out);
    let seed = cli.seed;
    match &cli.command {
        Command::Optimize {
            init_n,
            init_m_of,
            max_iters,
            allow_n_below_one,
        } => {
            let model = cfg.symmetric_model(seed)?;
            let beta = cfg.resolve_beta(seed)?;
            let opts = NSolveOptions {
                n_floor: if *allow_n_below_one { 0.0 } else { 1.0 },
                ..NSolveOptions::default()
            };
            let _ = writeln!(out, "beta = {beta:.6e}");
            let r = alternating_optimize(&model, *init_n, (*init_m_of).min(cfg.m), *max_iters, 1e-6, &opts)?;
            let o = r.optimum;
            let _ = writeln!(
                out,
                "optimum ({}): N* = {:.4}, M_OF* = {}, EE* = {:.6e} bits/J",
                o.method.as_str(),
                o.n_star,
                o.m_of_star,
                o.ee_star
            );
            let _ = writeln!(
                out,
                "iterations = {}, converged = {}{}",
                r.history.len() - 1,
                r.converged,
                if r.warning { " (warning: no fixed point within max_iters)" } else { "" }
            );
            if let Some(n) = optimal_n_closed_form(o.m_of_star, &model, &opts)? {
                if n.fallback_used {
                    let _ = writeln!(out, "note: no valid quadratic root at M_OF* = {}; N* from grid refinement", o.m_of_star);
                }
            }
            let k = optimal_m_of_closed_form(o.n_star.max(f64::MIN_POSITIVE), &model)?.intermediates;
            if let Some(x) = k.stationary {
                let _ = writeln!(out, "linearised stationary point at N*: {x:.4}");
            }
            let mut t = CsvTable::new();
            t.comment(&format!("scenario=optimize seed={seed} config_sha={}", cfg.sha()));
            t.header(&["iter", "n", "m_of", "ee"]);
            for (i, p) in r.history.iter().enumerate() {
                t.row(&[i.to_string(), crate::csv::sig(p.n, 9), p.m_of.to_string(), crate::csv::sig(p.ee, 9)]);
            }
            save(&dir, "optimize.csv", &t, out)?;
        }
        Command::Grid { n_range } => {
            let model = cfg.symmetric_model(seed)?;
            let cells = grid_cells(&model, n_range)?;
            let best = argmax(&cells).expect("grid always has a cell");
            let _ = writeln!(out, "beta = {:.6e}", cfg.resolve_beta(seed)?);
            let _ = writeln!(
                out,
                "grid argmax: N* = {}, M_OF* = {}, EE* = {:.6e} bits/J",
                best.n, best.m_of, best.ee
            );
            let mut t = CsvTable::new();
            t.comment(&format!("scenario=grid seed={seed} config_sha={}", cfg.sha()));
            grid_to_csv(&cells, &mut t);
            save(&dir, "grid.csv", &t, out)?;
        }
        Command::Surface { n_range } => {
            let mut spec = ExperimentSpec::new(Scenario::EeSurface, cfg.clone(), seed);
            spec.n_range = *n_range;
            let s = run_ee_surface(&spec)?;
            let _ = writeln!(out, "beta = {:.6e}", s.beta);
            for c in &s.optima {
                let _ = writeln!(
                    out,
                    "mu_of = {}, mu_fso = {}: N* = {}, M_OF* = {}, EE* = {:.6e} bits/J",
                    c.mu_of, c.mu_fso, c.optimum.n_star, c.optimum.m_of_star, c.optimum.ee_star
                );
            }
            save(&dir, "ee_surface.csv", &s.csv, out)?;
            spec.scenario = Scenario::EeVsMof;
            let m = run_ee_vs_mof(&spec)?;
            for c in &m.curves {
                let _ = writeln!(out, "N = {}: best M_OF = {}", c.n, c.best_m_of);
            }
            save(&dir, "ee_vs_mof.csv", &m.csv, out)?;
        }
        Command::Cdf { drops } => {
            let mut spec = ExperimentSpec::new(Scenario::RateCdf, cfg.clone(), seed);
            spec.drops = *drops;
            let r = run_rate_cdf(&spec)?;
            for p in &r.pairs {
                let _ = writeln!(
                    out,
                    "N = {}, M_OF = {}: mean sum-rate = {:.4}, mean per-user rate = {:.4} bits/s/Hz",
                    p.n,
                    p.m_of,
                    p.sum_rate.mean(),
                    p.per_user.mean()
                );
            }
            save(&dir, "rate_cdf.csv", &r.csv, out)?;
        }
        Command::Tradeoff { drops } => {
            let mut spec = ExperimentSpec::new(Scenario::EeVsSumrate, cfg.clone(), seed);
            spec.drops = *drops;
            let r = run_ee_vs_sumrate(&spec)?;
            for c in &r.curves {
                let best = c.points.iter().fold(c.points[0], |b, p| if p.ee > b.ee { *p } else { b });
                let _ = writeln!(
                    out,
                    "N = {}, M_OF = {}: peak EE = {:.6e} bits/J at sum-rate {:.4}",
                    c.n, c.m_of, best.ee, best.sum_rate
                );
            }
            save(&dir, "ee_vs_sumrate.csv", &r.csv, out)?;
        }
        Command::Validate {
            trials,
            m,
            k,
            tolerance,
        } => {
            let v = run_validation(&cfg, *m, *k, *trials, seed)?;
            let _ = writeln!(out, "terms compared = {}", v.comparisons.len());
            let _ = writeln!(out, "max relative term error = {:.4e}", v.max_rel_err);
            save(&dir, "validate.csv", &v.csv, out)?;
            if v.max_rel_err >= *tolerance {
                let _ = writeln!(err, "error: max relative error {:.4e} >= {tolerance}", v.max_rel_err);
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
                return EXIT_OK;
            }
            let _ = write!(err, "{text}");
            return EXIT_USAGE;
        }
    };
    match execute(&cli, out, err) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_FAILURE,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FAILURE
        }
    }
}
