//! Gaver-Stehfest inversion of Laplace-Carson transforms.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{DownOutStepSpec, HejdModel};
use crate::quantity::{MrPoint, QuantityRegistry, Regime};

pub const MAX_ORDER: usize = 10;
pub const DEFAULT_ORDER: usize = 7;

/// Inversion order and its `2N` weights. Each weight is carried as an
/// unevaluated sum `zeta[k] + zeta_lo[k]` of two doubles.
#[derive(Debug, Clone, PartialEq)]
pub struct GsConfig {
    pub order: usize,
    pub zeta: Vec<f64>,
    pub zeta_lo: Vec<f64>,
}

/// Double-double accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    hi: f64,
    lo: f64,
}

impl Acc {
    fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let bp = s - self.hi;
        let err = (self.hi - (s - bp)) + (x - bp);
        self.hi = s;
        self.lo += err;
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.lo += a.mul_add(b, -p);
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

impl GsConfig {
    /// Nodes `k log 2 / t`, `k = 1..2N`.
    pub fn nodes(&self, t: f64) -> Vec<f64> {
        (1..=2 * self.order)
            .map(|k| k as f64 * std::f64::consts::LN_2 / t)
            .collect()
    }

    /// Sum of the weights, accumulated in double-double arithmetic.
    pub fn weight_sum(&self) -> f64 {
        let mut acc = Acc::default();
        for (hi, lo) in self.zeta.iter().zip(&self.zeta_lo) {
            acc.add(*hi);
            acc.add(*lo);
        }
        acc.value()
    }

    /// `sum zeta_k v_k`, accumulated in double-double arithmetic.
    pub fn combine(&self, values: &[f64]) -> f64 {
        let mut acc = Acc::default();
        for ((hi, lo), v) in self.zeta.iter().zip(&self.zeta_lo).zip(values) {
            acc.add_product(*hi, *v);
            acc.add_product(*lo, *v);
        }
        acc.value()
    }
}

impl Default for GsConfig {
    fn default() -> Self {
        gs_weights(DEFAULT_ORDER).expect("default order is valid")
    }
}

fn binomial(n: u32, k: u32) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i128, |acc, i| acc * (n - i) as i128 / (i + 1) as i128)
}

fn exact_weights(order: usize) -> Vec<(f64, f64)> {
    let n = order as u32;
    let n_fact: i128 = (1..=n as i128).product();
    (1..=2 * n)
        .map(|k| {
            let num: i128 = ((k + 1) / 2..=k.min(n))
                .map(|j| (j as i128).pow(n + 1) * binomial(n, j) * binomial(2 * j, j) * binomial(j, k - j))
                .sum();
            let sign = if (n + k) % 2 == 0 { 1 } else { -1 };
            split_ratio(sign * num, k as i128 * n_fact)
        })
        .collect()
}

/// `num / den` as `hi + lo` with `hi` the nearest double.
fn split_ratio(num: i128, den: i128) -> (f64, f64) {
    let q = num / den;
    let r = num % den;
    let hi = q as f64 + r as f64 / den as f64;
    // hi = m 2^e exactly; the remainder num - hi den is formed in integers.
    let bits = hi.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = (bits & 0x000f_ffff_ffff_ffff) as i128;
    let (m, e) = if raw_exp == 0 { (frac << 1, -1075) } else { (frac | (1 << 52), raw_exp - 1075) };
    let m = if hi < 0.0 { -m } else { m };
    let (rem, scale) = if e >= 0 {
        (num - (m * den << e), den as f64)
    } else {
        ((num << -e) - m * den, den as f64 * 2f64.powi(-e))
    };
    (hi, rem as f64 / scale)
}

/// Weights for order `n` (1..=10), computed once and cached.
pub fn gs_weights(n: usize) -> Result<GsConfig> {
    static CACHE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::Order(n));
    }
    let all = CACHE.get_or_init(|| (1..=MAX_ORDER).map(exact_weights).collect());
    let (zeta, zeta_lo) = all[n - 1].iter().copied().unzip();
    Ok(GsConfig { order: n, zeta, zeta_lo })
}

/// Approximates `g(t)` from its Laplace-Carson transform `f`.
/// Node evaluations run in parallel; the sum is taken in node order.
pub fn gs_invert<F>(f: F, t: f64, cfg: &GsConfig) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    Ok(gs_invert_many(|theta| f(theta).map(|v| vec![v]), t, cfg)?[0])
}

/// Vector-valued variant of [`gs_invert`].
pub fn gs_invert_many<F>(f: F, t: f64, cfg: &GsConfig) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidSpec(format!("maturity must be positive, got {t}")));
    }
    let nodes = cfg.nodes(t);
    let values: Vec<Result<Vec<f64>>> = nodes
        .par_iter()
        .map(|&theta| {
            f(theta).map_err(|e| Error::Inversion { theta, source: Box::new(e) })
        })
        .collect();
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let width = values.first().map_or(0, Vec::len);
    Ok((0..width)
        .map(|i| cfg.combine(&values.iter().map(|v| v[i]).collect::<Vec<_>>()))
        .collect())
}

/// Calendar-time value of a registered quantity at maturity `t` and spot `x`,
/// seasoned by the accumulated occupation time.
pub fn price_time_domain(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    x: f64,
    quantity: &str,
    cfg: &GsConfig,
) -> Result<f64> {
    Ok(price_time_domain_many(model, spec, t, x, &[quantity], cfg)?[0])
}

/// Several quantities sharing one maturity-randomized solve per node.
///
/// American-family quantities are inverted heuristically. When the spot lies
/// below the free boundary at any node, every node is evaluated with the
/// continuation-region representation, continued past its own boundary where
/// necessary; this keeps the transform smooth in `theta`. Otherwise every node
/// is in its exercise region and the exercise values are used.
pub fn price_time_domain_many(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    x: f64,
    quantities: &[&str],
    cfg: &GsConfig,
) -> Result<Vec<f64>> {
    let grid = price_time_domain_grid(model, spec, t, &[x], quantities, cfg)?;
    Ok(grid.into_iter().next().unwrap_or_default())
}

/// Values of several quantities at several spots, `result[spot][quantity]`,
/// from a single set of node solves.
pub fn price_time_domain_grid(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    xs: &[f64],
    quantities: &[&str],
    cfg: &GsConfig,
) -> Result<Vec<Vec<f64>>> {
    let registry = QuantityRegistry::standard();
    let selected = quantities
        .iter()
        .map(|name| {
            registry
                .get(name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown quantity '{name}'")))
        })
        .collect::<Result<Vec<_>>>()?;
    spec.validate()?;
    if let Some(x) = xs.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidSpec(format!("spot must be non-negative, got {x}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidSpec(format!("maturity must be positive, got {t}")));
    }
    let needs_american = selected.iter().any(|q| q.needs_american());
    let points: Vec<MrPoint> = cfg
        .nodes(t)
        .par_iter()
        .map(|&theta| {
            MrPoint::solve(model, spec, theta, needs_american)
                .map_err(|e| Error::Inversion { theta, source: Box::new(e) })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<_>>()?;
    Ok(xs
        .iter()
        .map(|&x| {
            let regime = if points
                .iter()
                .filter_map(|p| p.american.as_ref())
                .any(|a| x < a.boundary)
            {
                Regime::Continued
            } else {
                Regime::Exact
            };
            selected
                .iter()
                .map(|q| {
                    let values: Vec<f64> = points.iter().map(|p| q.eval(p, x, regime)).collect();
                    crate::mr::seasoned_price(cfg.combine(&values), spec)
                })
                .collect()
        })
        .collect())
}
