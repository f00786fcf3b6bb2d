//! Real roots of `Phi(theta) = alpha` for `alpha > 0`.
//!
//! There are exactly `m + 1` positive roots interlacing the up-rates and
//! `n + 1` negative roots interlacing the negated down-rates. Each is isolated
//! in its own bracket and polished by safeguarded Newton iteration.

use crate::error::{Error, Result};
use crate::model::HejdModel;

const POLE_OFFSET: f64 = 1e-9;
const OUTER_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60
const MAX_ITER: usize = 200;

/// Roots at one level `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub alpha: f64,
    /// Positive roots, increasing: `beta_1 < xi_1 < beta_2 < ... < beta_{m+1}`.
    pub beta: Vec<f64>,
    /// Negative roots, decreasing: `gamma_1 > -eta_1 > gamma_2 > ... > gamma_{n+1}`.
    pub gamma: Vec<f64>,
}

impl RootSet {
    /// Largest `|Phi(theta) - alpha|` over all roots.
    pub fn max_residual(&self, model: &HejdModel) -> f64 {
        self.beta
            .iter()
            .chain(&self.gamma)
            .map(|&t| (model.phi(t) - self.alpha).abs())
            .fold(0.0, f64::max)
    }
}

/// Finds all `m + n + 2` real roots of `Phi(theta) = alpha`.
pub fn find_roots(model: &HejdModel, alpha: f64) -> Result<RootSet> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidModel(format!("root level must be positive, got {alpha}")));
    }
    let f = |t: f64| model.phi(t) - alpha;
    let tol = 1e-12 * alpha.max(1.0);

    let xi: Vec<f64> = model.up().iter().map(|c| c.rate).collect();
    let eta: Vec<f64> = model.down().iter().map(|c| c.rate).collect();

    let mut beta = Vec::with_capacity(xi.len() + 1);
    let mut left = 0.0;
    let mut left_is_pole = false;
    for &pole in &xi {
        let lo = if left_is_pole { approach(&f, left, pole, alpha)? } else { left };
        let hi = approach(&f, pole, left, alpha)?;
        beta.push(solve(model, alpha, lo, hi, tol)?);
        left = pole;
        left_is_pole = true;
    }
    let lo = if left_is_pole { approach(&f, left, f64::INFINITY, alpha)? } else { 0.0 };
    let hi = expand(&f, lo, 1.0, alpha)?;
    beta.push(solve(model, alpha, lo, hi, tol)?);

    let mut gamma = Vec::with_capacity(eta.len() + 1);
    let mut right = 0.0;
    let mut right_is_pole = false;
    for &e in &eta {
        let pole = -e;
        let hi = if right_is_pole { approach(&f, right, pole, alpha)? } else { right };
        let lo = approach(&f, pole, right, alpha)?;
        gamma.push(solve(model, alpha, lo, hi, tol)?);
        right = pole;
        right_is_pole = true;
    }
    let hi = if right_is_pole { approach(&f, right, f64::NEG_INFINITY, alpha)? } else { 0.0 };
    let lo = expand(&f, hi, -1.0, alpha)?;
    gamma.push(solve(model, alpha, lo, hi, tol)?);

    Ok(RootSet { alpha, beta, gamma })
}

/// Returns a point strictly between `pole` and `toward` at which `f` has the
/// sign of the pole's blow-up from that side. The offset
/// starts at `1e-9` of the gap and shrinks toward a few ulps.
fn approach(f: &dyn Fn(f64) -> f64, pole: f64, toward: f64, alpha: f64) -> Result<f64> {
    let dir = if toward > pole { 1.0 } else { -1.0 };
    let gap = if toward.is_finite() { (toward - pole).abs() } else { pole.abs().max(1.0) };
    let floor = 4.0 * f64::EPSILON * pole.abs().max(f64::MIN_POSITIVE);
    let mut d = POLE_OFFSET * gap;
    // Blow-up is +inf to the left of an up-pole and to the right of a down-pole.
    let target = if (pole > 0.0) == (dir < 0.0) { 1.0 } else { -1.0 };
    loop {
        let t = pole + dir * d.max(floor);
        let v = f(t);
        if v * target > 0.0 {
            return Ok(t);
        }
        if d <= floor {
            return Err(Error::Bracket { alpha, lo: pole.min(t), hi: pole.max(t) });
        }
        d *= 1e-3;
    }
}

/// Doubles outward from `start` until `f` becomes positive (it tends to
/// `+inf` at both ends of the real line).
fn expand(f: &dyn Fn(f64) -> f64, start: f64, dir: f64, alpha: f64) -> Result<f64> {
    let mut t = dir * (2.0 * start.abs()).max(1.0);
    loop {
        if f(t) > 0.0 {
            return Ok(t);
        }
        if t.abs() >= OUTER_CAP {
            return Err(Error::Bracket { alpha, lo: start.min(t), hi: start.max(t) });
        }
        t *= 2.0;
    }
}

/// Safeguarded Newton on a sign-changing bracket.
fn solve(model: &HejdModel, alpha: f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let f = |t: f64| model.phi(t) - alpha;
    let (mut lo, mut hi) = if a < b { (a, b) } else { (b, a) };
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo * fhi > 0.0 {
        return Err(Error::Bracket { alpha, lo, hi });
    }
    // Orient so that f(neg) < 0 < f(pos).
    let increasing = flo < 0.0;
    let mut x = 0.5 * (lo + hi);
    let mut best = (f64::INFINITY, x);
    for _ in 0..MAX_ITER {
        let fx = f(x);
        if fx.abs() < best.0 {
            best = (fx.abs(), x);
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(best.1);
        }
        let d = model.phi_prime(x);
        let newton = x - fx / d;
        x = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if x <= lo || x >= hi {
            x = 0.5 * (lo + hi);
        }
    }
    Err(Error::Convergence { alpha, residual: best.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn black_scholes_roots_match_quadratic() {
        let m = HejdModel::black_scholes(0.05, 0.07, 0.2).unwrap();
        let alpha = 0.05 + 1.0;
        let s2 = 0.04;
        let b = m.drift();
        let disc = (b * b + 2.0 * s2 * alpha).sqrt();
        let roots = find_roots(&m, alpha).unwrap();
        assert!((roots.beta[0] - (-b + disc) / s2).abs() < 1e-10);
        assert!((roots.gamma[0] - (-b - disc) / s2).abs() < 1e-10);
    }

    #[test]
    fn kou_roots_interlace() {
        let m = HejdModel::kou(0.05, 0.07, 0.2, 1.0, 0.7, 25.0, 50.0).unwrap();
        for alpha in [0.05, 1.0, 10.0, 100.0, 1e4] {
            let r = find_roots(&m, alpha).unwrap();
            assert_eq!(r.beta.len(), 2);
            assert_eq!(r.gamma.len(), 2);
            assert!(0.0 < r.beta[0] && r.beta[0] < 25.0 && 25.0 < r.beta[1]);
            assert!(r.gamma[0] < 0.0 && -50.0 < r.gamma[0] && r.gamma[1] < -50.0);
            assert!(r.max_residual(&m) <= 1e-10 * alpha.max(1.0));
        }
    }

    #[test]
    fn tiny_intensity_roots_hug_the_poles() {
        let m = HejdModel::kou(0.05, 0.07, 0.2, 1e-12, 0.7, 25.0, 50.0).unwrap();
        let r = find_roots(&m, 1.05).unwrap();
        assert!(r.beta[0] < 25.0 && r.beta[1] > 25.0);
        assert!((r.beta[0] - 25.0).abs() > 0.0);
        assert!(r.gamma[1] < -50.0 && r.gamma[0] > -50.0);
        let bs = HejdModel::black_scholes(0.05, 0.07, 0.2).unwrap();
        let r0 = find_roots(&bs, 1.05).unwrap();
        assert!((r.beta[0] - r0.beta[0]).abs() < 1e-9);
    }

    #[test]
    fn non_positive_level_is_rejected() {
        let m = HejdModel::black_scholes(0.05, 0.07, 0.2).unwrap();
        assert!(find_roots(&m, 0.0).is_err());
        assert!(find_roots(&m, -1.0).is_err());
    }
}
