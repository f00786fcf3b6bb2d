use super::{MrAmericanSolution, MrEuropeanSolution};
use crate::error::Result;
use crate::model::{DownOutStepSpec, HejdModel};
use crate::quadrature::QuadConfig;

/// Solution whose ordinary integro-differential equation is checked.
#[derive(Debug, Clone, Copy)]
pub enum OideTarget<'a> {
    European(&'a MrEuropeanSolution),
    American(&'a MrAmericanSolution),
}

/// Largest residual of
/// `theta (x - K)^+ + A f(x) - (r + theta - rho_L 1{x < L}) f(x)`
/// over `x_grid`, divided by `theta K`. `f` maps spot to value. The difference
/// step is shortened so that no stencil straddles a kink.
pub fn oide_residual_with(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    theta: f64,
    f: &(dyn Fn(f64) -> f64 + Sync),
    kinks: &[f64],
    x_grid: &[f64],
    quad: &QuadConfig,
) -> Result<f64> {
    let cfg = QuadConfig {
        breakpoints: kinks.iter().filter(|&&x| x > 0.0).map(|x| x.ln()).collect(),
        ..quad.clone()
    };
    let v = |y: f64| f(y.exp());
    let mut worst: f64 = 0.0;
    for &x in x_grid {
        let y = x.ln();
        let gap = cfg.breakpoints.iter().map(|b| (y - b).abs()).filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
        let local = QuadConfig { fd_step: quad.fd_step.min(gap / 3.0).max(1e-6), ..cfg.clone() };
        let gen = model.generator_apply(&v, y, &local)?;
        let kill = if x < spec.barrier { spec.knock_rate } else { 0.0 };
        let res = theta * (x - spec.strike).max(0.0) + gen - (model.r() + theta - kill) * f(x);
        worst = worst.max(res.abs());
    }
    Ok(worst / (theta * spec.strike))
}

/// OIDE residual of a European or American maturity-randomized solution.
pub fn oide_residual(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    theta: f64,
    sol: OideTarget<'_>,
    x_grid: &[f64],
    quad: &QuadConfig,
) -> Result<f64> {
    match sol {
        OideTarget::European(eu) => {
            let f = |x: f64| super::eval_european_mr(eu, x);
            let kinks = [eu.spec.barrier, eu.spec.strike];
            oide_residual_with(model, spec, theta, &f, &kinks, x_grid, quad)
        }
        OideTarget::American(am) => {
            let f = |x: f64| am.price(x);
            let kinks = [am.european.spec.barrier, am.european.spec.strike, am.boundary];
            oide_residual_with(model, spec, theta, &f, &kinks, x_grid, quad)
        }
    }
}
