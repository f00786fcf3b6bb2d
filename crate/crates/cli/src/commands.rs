//! Execution of resolved commands.

use geostep_core::greeks::{diff_surfaces, greeks, spot_grid};
use geostep_core::mc::{verify_duality, PathConfig};
use geostep_core::tables::generate_table;
use geostep_core::{find_roots, gs_weights, price_time_domain, price_time_domain_many, Result};

use crate::manifest::Command;
use crate::report::{NamedValue, PriceReport, Report, RootLine, TableLine, VerifyReport};

const ALL: [&str; 5] = ["euro", "amer", "eep", "eep_diffusion", "eep_jump"];

fn pct(num: f64, den: f64) -> Option<f64> {
    (den.abs() > 1e-12).then(|| 100.0 * num / den)
}

pub fn execute(command: &Command, gs_order: usize) -> Result<Report> {
    let gs = gs_weights(gs_order)?;
    match command {
        Command::Price { config, t, x, quantity } => {
            let model = config.model()?;
            let spec = config.spec()?;
            let names: Vec<&str> = if quantity == "all" { ALL.to_vec() } else { vec![quantity.as_str()] };
            let values = price_time_domain_many(&model, &spec, *t, *x, &names, &gs)?;
            let get = |n: &str| names.iter().position(|q| *q == n).map(|i| values[i]);
            let (eep_pct, dc_pct) = match (get("eep"), get("amer"), get("eep_diffusion")) {
                (Some(e), Some(a), Some(d)) => (pct(e, a), pct(d, e)),
                _ => (None, None),
            };
            Ok(Report::Price(PriceReport {
                t: *t,
                x: *x,
                values: names
                    .iter()
                    .zip(&values)
                    .map(|(q, v)| NamedValue { quantity: q.to_string(), value: *v })
                    .collect(),
                eep_pct,
                dc_pct,
            }))
        }
        Command::Table { id } => {
            let rows = generate_table(*id, &gs)?;
            Ok(Report::Table(rows.iter().map(|r| TableLine::from_row(r, gs_order)).collect()))
        }
        Command::Greeks { config, diff_against, t, x_lo, x_hi, n, quantity, bump } => {
            let xs = spot_grid(*x_lo, *x_hi, *n)?;
            let surface = greeks(&config.model()?, &config.spec()?, *t, &xs, quantity, *bump, &gs)?;
            match diff_against {
                None => Ok(Report::Greeks(surface)),
                Some(other) => {
                    let base = greeks(&other.model()?, &other.spec()?, *t, &xs, quantity, *bump, &gs)?;
                    Ok(Report::Greeks(diff_surfaces(&surface, &base)?))
                }
            }
        }
        Command::Roots { config, alpha } => {
            let model = config.model()?;
            let rs = find_roots(&model, *alpha)?;
            let residual = |t: f64| model.laplace_exponent(t).map(|v| (v - alpha).abs());
            let mut roots = Vec::new();
            let up: Vec<f64> = model.up().iter().map(|c| c.rate).collect();
            let down: Vec<f64> = model.down().iter().map(|c| c.rate).collect();
            for (i, &b) in rs.beta.iter().enumerate() {
                roots.push(RootLine {
                    side: "beta",
                    index: i + 1,
                    root: b,
                    lower: Some(if i == 0 { 0.0 } else { up[i - 1] }),
                    upper: up.get(i).copied(),
                    residual: residual(b)?,
                });
            }
            for (i, &g) in rs.gamma.iter().enumerate() {
                roots.push(RootLine {
                    side: "gamma",
                    index: i + 1,
                    root: g,
                    lower: down.get(i).map(|e| -e),
                    upper: Some(if i == 0 { 0.0 } else { -down[i - 1] }),
                    residual: residual(g)?,
                });
            }
            Ok(Report::Roots { alpha: *alpha, roots })
        }
        Command::Verify { config, t, x, paths, dt, seed, antithetic } => {
            let model = config.model()?;
            let spec = config.spec()?;
            let cfg = PathConfig { n_paths: *paths, dt: *dt, seed: *seed, antithetic: *antithetic, ..PathConfig::default() };
            let engine = price_time_domain(&model, &spec, *t, *x, "euro", &gs)?;
            let dual = verify_duality(&model, &spec, *t, *x, &cfg)?;
            let mc = dual.call;
            Ok(Report::Verify(VerifyReport {
                engine,
                mc_value: mc.value,
                mc_std_error: mc.std_error,
                deviation_se: if mc.std_error > 0.0 { (mc.value - engine) / mc.std_error } else { 0.0 },
                dual_call: mc.value,
                dual_put: dual.put.value,
                dual_difference: dual.difference,
                pooled_se: dual.pooled_se,
                duality_z: dual.z_score,
                n_paths: mc.n_paths,
                dt: *dt,
                seed: *seed,
            }))
        }
    }
}
