//! Hyper-exponential jump-diffusion market and down-and-out step contracts.
//!
//! The log-price is `X_t = b t + sigma W_t + sum J_i` where the jumps have the
//! mixture density `sum p_i xi_i e^{-xi_i y} 1{y >= 0} + sum q_j eta_j e^{eta_j y} 1{y < 0}`
//! and arrive at rate `lambda`. The drift `b` is never an input: it is fixed
//! by `Phi(1) = r - delta`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadConfig};

const WEIGHT_SUM_TOL: f64 = 1e-12;
const POLE_REL_TOL: f64 = 1e-14;

/// One exponential component of the jump-size mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpComponent {
    pub weight: f64,
    pub rate: f64,
}

/// Market parameters of a hyper-exponential jump-diffusion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HejdModel {
    r: f64,
    delta: f64,
    sigma: f64,
    lambda: f64,
    up: Vec<JumpComponent>,
    down: Vec<JumpComponent>,
}

impl HejdModel {
    /// Builds and validates a model. Weights/rates are given per side, rates
    /// strictly increasing, up-rates above one.
    pub fn new(
        r: f64,
        delta: f64,
        sigma: f64,
        lambda: f64,
        up_weights: &[f64],
        up_rates: &[f64],
        down_weights: &[f64],
        down_rates: &[f64],
    ) -> Result<Self> {
        if up_weights.len() != up_rates.len() || down_weights.len() != down_rates.len() {
            return Err(Error::InvalidModel(
                "weight and rate vectors must have equal length".into(),
            ));
        }
        let zip = |w: &[f64], a: &[f64]| {
            w.iter()
                .zip(a)
                .map(|(&weight, &rate)| JumpComponent { weight, rate })
                .collect::<Vec<_>>()
        };
        let model = HejdModel {
            r,
            delta,
            sigma,
            lambda,
            up: zip(up_weights, up_rates),
            down: zip(down_weights, down_rates),
        };
        model.validate()?;
        Ok(model)
    }

    /// Kou double-exponential model: one up component (prob. `p`, rate `xi`)
    /// and one down component (prob. `1 - p`, rate `eta`).
    pub fn kou(r: f64, delta: f64, sigma: f64, lambda: f64, p: f64, xi: f64, eta: f64) -> Result<Self> {
        Self::new(r, delta, sigma, lambda, &[p], &[xi], &[1.0 - p], &[eta])
    }

    /// Pure diffusion (Black-Scholes) market.
    pub fn black_scholes(r: f64, delta: f64, sigma: f64) -> Result<Self> {
        Self::new(r, delta, sigma, 0.0, &[], &[], &[], &[])
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        for (name, v) in [("r", self.r), ("delta", self.delta), ("sigma", self.sigma), ("lambda", self.lambda)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.r < 0.0 || self.delta < 0.0 {
            return bad("r and delta must be non-negative".into());
        }
        if self.sigma <= 0.0 {
            return bad("sigma must be positive".into());
        }
        if self.lambda < 0.0 {
            return bad("lambda must be non-negative".into());
        }
        if self.lambda > 0.0 && self.up.is_empty() && self.down.is_empty() {
            return bad("lambda > 0 requires at least one jump component".into());
        }
        for c in self.up.iter().chain(&self.down) {
            if !(c.weight > 0.0) || !c.weight.is_finite() || !c.rate.is_finite() {
                return bad("jump weights must be positive and finite".into());
            }
        }
        if !self.up.is_empty() || !self.down.is_empty() {
            let total: f64 = self.up.iter().chain(&self.down).map(|c| c.weight).sum();
            if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                return bad(format!("jump weights sum to {total}, expected 1"));
            }
        }
        if let Some(first) = self.up.first() {
            if first.rate <= 1.0 {
                return bad("up-jump rates must exceed 1".into());
            }
        }
        if let Some(first) = self.down.first() {
            if first.rate <= 0.0 {
                return bad("down-jump rates must be positive".into());
            }
        }
        for side in [&self.up, &self.down] {
            if side.windows(2).any(|w| w[1].rate <= w[0].rate) {
                return bad("jump rates must be strictly increasing".into());
            }
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Up-jump components that are active (empty when `lambda == 0`).
    pub fn up(&self) -> &[JumpComponent] {
        if self.lambda > 0.0 {
            &self.up
        } else {
            &[]
        }
    }

    /// Down-jump components that are active (empty when `lambda == 0`).
    pub fn down(&self) -> &[JumpComponent] {
        if self.lambda > 0.0 {
            &self.down
        } else {
            &[]
        }
    }

    /// Up components as configured, regardless of `lambda`.
    pub fn up_components(&self) -> &[JumpComponent] {
        &self.up
    }

    pub fn down_components(&self) -> &[JumpComponent] {
        &self.down
    }

    /// Same market with a different jump intensity.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        let mut m = self.clone();
        m.lambda = lambda;
        m.validate()?;
        Ok(m)
    }

    /// Mean percentage jump size `E[e^J - 1]`.
    pub fn mean_jump(&self) -> f64 {
        self.jump_transform(1.0)
    }

    /// `sum p xi/(xi-theta) + sum q eta/(eta+theta) - 1`, written without the
    /// constant so that it vanishes exactly at zero.
    fn jump_transform(&self, theta: f64) -> f64 {
        let up: f64 = self.up.iter().map(|c| c.weight * theta / (c.rate - theta)).sum();
        let down: f64 = self.down.iter().map(|c| c.weight * theta / (c.rate + theta)).sum();
        up - down
    }

    /// Drift of the log-price, `r - delta - lambda*zeta - sigma^2/2`.
    pub fn drift(&self) -> f64 {
        self.r - self.delta - self.lambda * self.mean_jump() - 0.5 * self.sigma * self.sigma
    }

    /// Poles of the Laplace exponent on the extended real line.
    pub fn poles(&self) -> impl Iterator<Item = f64> + '_ {
        self.up()
            .iter()
            .map(|c| c.rate)
            .chain(self.down().iter().map(|c| -c.rate))
    }

    /// `Phi(theta) = log E[e^{theta X_1}]`, continued to the whole real line
    /// minus the poles.
    pub fn laplace_exponent(&self, theta: f64) -> Result<f64> {
        for pole in self.poles() {
            if (theta - pole).abs() <= POLE_REL_TOL * pole.abs() {
                return Err(Error::Pole { theta, pole });
            }
        }
        Ok(self.phi(theta))
    }

    /// Unchecked Laplace exponent.
    pub(crate) fn phi(&self, theta: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let diffusion = self.drift() * theta + 0.5 * s2 * theta * theta;
        if self.lambda == 0.0 {
            return diffusion;
        }
        diffusion + self.lambda * self.jump_transform(theta)
    }

    /// Derivative of the Laplace exponent.
    pub(crate) fn phi_prime(&self, theta: f64) -> f64 {
        let base = self.drift() + self.sigma * self.sigma * theta;
        if self.lambda == 0.0 {
            return base;
        }
        let up: f64 = self
            .up
            .iter()
            .map(|c| c.weight * c.rate / ((c.rate - theta) * (c.rate - theta)))
            .sum();
        let down: f64 = self
            .down
            .iter()
            .map(|c| c.weight * c.rate / ((c.rate + theta) * (c.rate + theta)))
            .sum();
        base + self.lambda * (up - down)
    }

    /// Characteristic exponent `Psi(theta) = -log E[e^{i theta X_1}]`.
    pub fn levy_exponent(&self, theta: f64) -> Complex64 {
        let i = Complex64::i();
        let s2 = self.sigma * self.sigma;
        let mut psi = -i * self.drift() * theta + Complex64::from(0.5 * s2 * theta * theta);
        if self.lambda > 0.0 {
            let up: Complex64 = self
                .up
                .iter()
                .map(|c| c.weight * i * theta / (c.rate - i * theta))
                .sum();
            let down: Complex64 = self
                .down
                .iter()
                .map(|c| c.weight * i * theta / (c.rate + i * theta))
                .sum();
            psi -= self.lambda * (up - down);
        }
        psi
    }

    /// Jump-size density `f(y)` (zero when there are no jumps).
    pub fn jump_density(&self, y: f64) -> f64 {
        if y >= 0.0 {
            self.up().iter().map(|c| c.weight * c.rate * (-c.rate * y).exp()).sum()
        } else {
            self.down().iter().map(|c| c.weight * c.rate * (c.rate * y).exp()).sum()
        }
    }

    /// Parameters of the dual market obtained by the Esscher change of
    /// measure: `Pi_Y(dy) = e^{-y} Pi_X(-dy)`, same sigma, `r` and `delta`
    /// exchanged.
    pub fn dual_model(&self) -> DualModelReport {
        let up_mass: Vec<f64> = self
            .down
            .iter()
            .map(|c| c.weight * c.rate / (c.rate + 1.0))
            .collect();
        let down_mass: Vec<f64> = self
            .up
            .iter()
            .map(|c| c.weight * c.rate / (c.rate - 1.0))
            .collect();
        let total: f64 = up_mass.iter().chain(&down_mass).sum();
        let (scale, intensity) = if total > 0.0 {
            (1.0 / total, self.lambda * total)
        } else {
            (0.0, 0.0)
        };
        let dual = HejdModel {
            r: self.delta,
            delta: self.r,
            sigma: self.sigma,
            lambda: intensity,
            up: self
                .down
                .iter()
                .zip(&up_mass)
                .map(|(c, m)| JumpComponent { weight: m * scale, rate: c.rate + 1.0 })
                .collect(),
            down: self
                .up
                .iter()
                .zip(&down_mass)
                .map(|(c, m)| JumpComponent { weight: m * scale, rate: c.rate - 1.0 })
                .collect(),
        };
        DualModelReport { dual, intensity, up_mass, down_mass }
    }

    /// Infinitesimal generator of `X` applied to `v` (a function of the
    /// log-price) at `x`.
    ///
    /// Derivatives use five-point central differences with step
    /// `cfg.fd_step`; the jump integral is split at `y = 0` and at every
    /// `cfg.breakpoints - x`, and truncated where the mixture density times
    /// `e^{|y|}` falls below `1e-16` of its peak.
    pub fn generator_apply(&self, v: &dyn Fn(f64) -> f64, x: f64, cfg: &QuadConfig) -> Result<f64> {
        let h = cfg.fd_step;
        let (vm2, vm1, v0, vp1, vp2) = (v(x - 2.0 * h), v(x - h), v(x), v(x + h), v(x + 2.0 * h));
        let d1 = (-vp2 + 8.0 * vp1 - 8.0 * vm1 + vm2) / (12.0 * h);
        let d2 = (-vp2 + 16.0 * vp1 - 30.0 * v0 + 16.0 * vm1 - vm2) / (12.0 * h * h);
        let s2 = self.sigma * self.sigma;
        let mut out = 0.5 * s2 * d2 + self.drift() * d1;
        if self.lambda == 0.0 {
            return Ok(out);
        }

        let integrand = |y: f64| (v(x + y) - v0) * self.jump_density(y);
        let (y_lo, y_hi) = self.jump_truncation();
        let mut jump = 0.0;
        for (lo, hi) in [(y_lo, 0.0), (0.0, y_hi)] {
            if hi <= lo {
                continue;
            }
            let mut cuts = vec![lo];
            cuts.extend(
                cfg.breakpoints
                    .iter()
                    .map(|b| b - x)
                    .filter(|&y| y > lo && y < hi),
            );
            cuts.push(hi);
            cuts.sort_by(f64::total_cmp);
            jump += quadrature::integrate(&integrand, &cuts, cfg)?.value;
        }
        out += self.lambda * jump;
        Ok(out)
    }

    /// Integration limits `(y_lo, y_hi)` for the jump integral.
    fn jump_truncation(&self) -> (f64, f64) {
        let peak_up: f64 = self.up().iter().map(|c| c.weight * c.rate).sum();
        let peak_down: f64 = self.down().iter().map(|c| c.weight * c.rate).sum();
        let peak = peak_up.max(peak_down);
        let cut = 1e-16 * peak;
        let hi = self
            .up()
            .iter()
            .map(|c| {
                let count = self.up().len() as f64;
                ((count * c.weight * c.rate / cut).ln() / (c.rate - 1.0)).max(0.0)
            })
            .fold(0.0_f64, f64::max)
            .min(600.0);
        let lo = self
            .down()
            .iter()
            .map(|c| {
                let count = self.down().len() as f64;
                -((count * c.weight * c.rate / cut).ln() / c.rate).max(0.0)
            })
            .fold(0.0_f64, f64::min);
        (lo, hi)
    }
}

/// Result of the duality transform.
#[derive(Debug, Clone, PartialEq)]
pub struct DualModelReport {
    /// The dual market (rates swapped, jump mixture mapped and renormalized).
    pub dual: HejdModel,
    /// Jump intensity of the dual market, `lambda * (1 + zeta)`.
    pub intensity: f64,
    /// Unnormalized masses of the dual up components (from original down components).
    pub up_mass: Vec<f64>,
    /// Unnormalized masses of the dual down components (from original up components).
    pub down_mass: Vec<f64>,
}

/// Geometric down-and-out step call: strike `K`, lower barrier `L`,
/// knock-out rate `rho_L <= 0` and accumulated occupation time `gamma_L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DownOutStepSpec {
    pub strike: f64,
    pub barrier: f64,
    pub knock_rate: f64,
    pub seasoning: f64,
}

impl DownOutStepSpec {
    pub fn new(strike: f64, barrier: f64, knock_rate: f64, seasoning: f64) -> Result<Self> {
        let spec = DownOutStepSpec { strike, barrier, knock_rate, seasoning };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSpec(msg.into()));
        if ![self.strike, self.barrier, self.knock_rate, self.seasoning]
            .iter()
            .all(|v| v.is_finite())
        {
            return bad("contract parameters must be finite");
        }
        if self.barrier < 0.0 || self.barrier > self.strike {
            return bad("barrier must satisfy 0 <= L <= K");
        }
        if self.knock_rate > 0.0 {
            return bad("knock-out rate must be <= 0");
        }
        if self.seasoning < 0.0 {
            return bad("seasoning occupation time must be >= 0");
        }
        Ok(())
    }

    /// Discount for occupation time already accumulated below the barrier.
    pub fn seasoning_factor(&self) -> f64 {
        (self.knock_rate * self.seasoning).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kou() -> HejdModel {
        HejdModel::kou(0.05, 0.07, 0.2, 1.0, 0.7, 25.0, 50.0).unwrap()
    }

    #[test]
    fn exponent_vanishes_at_zero_and_prices_forward() {
        let m = kou();
        assert_eq!(m.laplace_exponent(0.0).unwrap(), 0.0);
        assert!((m.laplace_exponent(1.0).unwrap() - (0.05 - 0.07)).abs() < 1e-12);
    }

    #[test]
    fn exponent_at_half_matches_direct_sum() {
        // term-by-term evaluation of the mixture, accumulated in a different order
        let m = kou();
        let zeta = 0.7 * 25.0 / 24.0 + 0.3 * 50.0 / 51.0 - 1.0;
        let b = 0.05 - 0.07 - zeta - 0.02;
        let jumps = 0.7 * 25.0 / 24.5 + 0.3 * 50.0 / 50.5 - 1.0;
        let expected = jumps + 0.02 * 0.25 + b * 0.5;
        assert!((m.laplace_exponent(0.5).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn pole_is_rejected() {
        let m = kou();
        assert!(matches!(m.laplace_exponent(25.0), Err(Error::Pole { .. })));
        assert!(matches!(m.laplace_exponent(-50.0), Err(Error::Pole { .. })));
        assert!(m.laplace_exponent(25.0 + 1e-9).is_ok());
    }

    #[test]
    fn levy_exponent_links_to_laplace_exponent() {
        let m = kou();
        assert!(m.levy_exponent(0.0).norm() < 1e-15);
        for theta in [-3.0, -0.5, 0.5, 1.0, 4.0] {
            let psi = m.levy_exponent(theta);
            assert!(psi.re >= 0.0);
        }
    }

    #[test]
    fn invalid_models_are_rejected() {
        assert!(HejdModel::kou(0.05, 0.07, 0.0, 1.0, 0.7, 25.0, 50.0).is_err());
        assert!(HejdModel::kou(0.05, 0.07, 0.2, 1.0, 0.7, 0.9, 50.0).is_err());
        assert!(HejdModel::new(0.05, 0.07, 0.2, 1.0, &[0.5], &[25.0], &[0.4], &[50.0]).is_err());
        assert!(HejdModel::new(0.05, 0.07, 0.2, 1.0, &[0.3, 0.3], &[30.0, 20.0], &[0.4], &[5.0]).is_err());
        assert!(HejdModel::kou(0.05, 0.07, 0.2, -1.0, 0.7, 25.0, 50.0).is_err());
    }

    #[test]
    fn kou_dual_rates() {
        let d = kou().dual_model();
        assert_eq!(d.dual.up_components()[0].rate, 51.0);
        assert_eq!(d.dual.down_components()[0].rate, 24.0);
        assert_eq!(d.dual.r(), 0.07);
        assert_eq!(d.dual.delta(), 0.05);
        let w: f64 = d.dual.up_components().iter().chain(d.dual.down_components()).map(|c| c.weight).sum();
        assert!((w - 1.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_model_is_fixed_point_up_to_weights() {
        let m = HejdModel::kou(0.03, 0.03, 0.25, 2.0, 0.5, 11.0, 10.0).unwrap();
        let d = m.dual_model().dual;
        assert_eq!(d.up_components()[0].rate, 11.0);
        assert_eq!(d.down_components()[0].rate, 10.0);
        assert_eq!(d.sigma(), m.sigma());
    }

    #[test]
    fn generator_kills_constants() {
        let m = kou();
        let cfg = QuadConfig::default();
        let g = m.generator_apply(&|_| 3.0, 0.2, &cfg).unwrap();
        assert!(g.abs() < 1e-9);
    }

    #[test]
    fn generator_on_exponentials_returns_exponent() {
        let m = kou();
        let cfg = QuadConfig::default();
        for theta in [-25.0, 0.5, 1.0, 13.0] {
            let x = 0.3;
            let g = m.generator_apply(&|y: f64| (theta * y).exp(), x, &cfg).unwrap();
            let expected = (theta * x).exp() * m.laplace_exponent(theta).unwrap();
            assert!(
                (g - expected).abs() < 1e-6 * expected.abs().max(1.0),
                "theta={theta}: {g} vs {expected}"
            );
        }
        let g = m.generator_apply(&|y: f64| y.exp(), 0.0, &cfg).unwrap();
        assert!((g - (0.05 - 0.07)).abs() < 1e-8);
    }

    #[test]
    fn seasoning_factor() {
        let s = DownOutStepSpec::new(100.0, 95.0, -26.34, 0.1).unwrap();
        assert!((s.seasoning_factor() - (-2.634_f64).exp()).abs() < 1e-15);
        assert_eq!(DownOutStepSpec::new(100.0, 95.0, 0.0, 0.3).unwrap().seasoning_factor(), 1.0);
        assert!(DownOutStepSpec::new(100.0, 101.0, -1.0, 0.0).is_err());
        assert!(DownOutStepSpec::new(100.0, 95.0, 1.0, 0.0).is_err());
        assert!(DownOutStepSpec::new(100.0, 95.0, -1.0, -0.1).is_err());
    }
}
