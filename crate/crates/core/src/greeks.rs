//! Finite-difference price sensitivities in calendar time.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gs::{price_time_domain_grid, GsConfig};
use crate::model::{DownOutStepSpec, HejdModel};

pub const DEFAULT_BUMP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreekPoint {
    pub x: f64,
    pub value: f64,
    pub delta: f64,
    pub gamma: f64,
}

/// `n` equally spaced spots from `lo` to `hi` inclusive.
pub fn spot_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || lo < 0.0 {
        return Err(Error::InvalidSpec(format!("need 0 <= x_lo < x_hi, got [{lo}, {hi}]")));
    }
    if n < 3 {
        return Err(Error::InvalidSpec(format!("need at least 3 spots, got {n}")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

/// Value, delta and gamma at each spot by central differences with step
/// `bump * x`.
pub fn greeks(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    xs: &[f64],
    quantity: &str,
    bump: f64,
    cfg: &GsConfig,
) -> Result<Vec<GreekPoint>> {
    if !(bump > 0.0 && bump < 0.5) {
        return Err(Error::InvalidSpec(format!("bump must lie in (0, 0.5), got {bump}")));
    }
    let spots: Vec<f64> = xs
        .iter()
        .flat_map(|&x| [x * (1.0 - bump), x, x * (1.0 + bump)])
        .collect();
    let values = price_time_domain_grid(model, spec, t, &spots, &[quantity], cfg)?;
    Ok(xs
        .iter()
        .zip(values.chunks(3))
        .map(|(&x, v)| {
            let (down, mid, up) = (v[0][0], v[1][0], v[2][0]);
            let h = bump * x;
            let (delta, gamma) = if h > 0.0 {
                ((up - down) / (2.0 * h), (up - 2.0 * mid + down) / (h * h))
            } else {
                (0.0, 0.0)
            };
            GreekPoint { x, value: mid, delta, gamma }
        })
        .collect())
}

/// Pointwise `a - b` of two surfaces on the same spots.
pub fn diff_surfaces(a: &[GreekPoint], b: &[GreekPoint]) -> Result<Vec<GreekPoint>> {
    if a.len() != b.len() || a.iter().zip(b).any(|(p, q)| p.x != q.x) {
        return Err(Error::InvalidSpec("surfaces are on different spot grids".into()));
    }
    Ok(a.iter()
        .zip(b)
        .map(|(p, q)| GreekPoint {
            x: p.x,
            value: p.value - q.value,
            delta: p.delta - q.delta,
            gamma: p.gamma - q.gamma,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let g = spot_grid(85.0, 115.0, 7).unwrap();
        assert_eq!(g.first(), Some(&85.0));
        assert_eq!(g.last(), Some(&115.0));
        assert!(spot_grid(1.0, 1.0, 5).is_err());
        assert!(spot_grid(1.0, 2.0, 2).is_err());
    }

    #[test]
    fn gamma_is_second_difference_of_values() {
        let m = HejdModel::kou(0.05, 0.07, 0.2, 1.0, 0.7, 25.0, 50.0).unwrap();
        let s = DownOutStepSpec::new(100.0, 95.0, -26.34, 0.0).unwrap();
        let cfg = GsConfig::default();
        let g = greeks(&m, &s, 1.0, &[100.0], "euro", 1e-3, &cfg).unwrap()[0];
        let v = price_time_domain_grid(&m, &s, 1.0, &[99.9, 100.0, 100.1], &["euro"], &cfg).unwrap();
        let second = (v[2][0] - 2.0 * v[1][0] + v[0][0]) / (0.1 * 0.1);
        assert!((g.gamma - second).abs() < 1e-9);
        assert!(g.delta > 0.0 && g.delta < 1.05);
    }
}
