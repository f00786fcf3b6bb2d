use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::linalg::Factored;
use crate::model::{DownOutStepSpec, HejdModel};
use crate::roots::{find_roots, RootSet};

/// Smallest admissible relative gap between barrier and strike.
pub const MIN_BARRIER_GAP: f64 = 1e-9;

/// Maturity-randomized European down-and-out step call.
///
/// In log-price `y` the value is
/// `sum A_s e^{beta'_s (y - l)}` below `l = log L`,
/// `sum B+_s e^{beta_s (y - k)} + sum B-_u e^{gamma_u (y - l)}` on `[l, k]`,
/// `sum C_u e^{gamma_u (y - k)} + slope e^y - level` above `k = log K`.
/// Every exponential is at most one on its own region.
#[derive(Debug, Clone)]
pub struct MrEuropeanSolution {
    pub theta: f64,
    pub model: HejdModel,
    /// Contract actually solved (barrier possibly nudged below the strike).
    pub spec: DownOutStepSpec,
    /// Roots at level `r + theta - rho_L`; `None` when `L = 0`.
    pub roots_below: Option<RootSet>,
    /// Roots at level `r + theta`.
    pub roots: RootSet,
    pub a_plus: Vec<f64>,
    pub b_plus: Vec<f64>,
    pub b_minus: Vec<f64>,
    pub c_minus: Vec<f64>,
    /// `theta / (delta + theta)`.
    pub slope: f64,
    /// `theta K / (r + theta)`.
    pub level: f64,
    /// `||Q v - q||_inf / ||q||_inf`.
    pub linear_residual: f64,
    pub condition: f64,
}

impl MrEuropeanSolution {
    pub fn log_strike(&self) -> f64 {
        self.spec.strike.ln()
    }

    pub fn log_barrier(&self) -> Option<f64> {
        (self.spec.barrier > 0.0).then(|| self.spec.barrier.ln())
    }

    /// Value and first derivative with respect to the log-price.
    pub fn value_log(&self, y: f64) -> (f64, f64) {
        let k = self.log_strike();
        if let (Some(l), Some(below)) = (self.log_barrier(), &self.roots_below) {
            if y < l {
                return exp_sum(&self.a_plus, &below.beta, y - l);
            }
        }
        if y <= k {
            let (v1, d1) = exp_sum(&self.b_plus, &self.roots.beta, y - k);
            let l = self.log_barrier().unwrap_or(k);
            let (v2, d2) = exp_sum(&self.b_minus, &self.roots.gamma, y - l);
            (v1 + v2, d1 + d2)
        } else {
            let (v, d) = exp_sum(&self.c_minus, &self.roots.gamma, y - k);
            let ey = y.exp();
            (v + self.slope * ey - self.level, d + self.slope * ey)
        }
    }

    /// Derivative with respect to the spot.
    pub fn delta(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.value_log(x.ln()).1 / x
    }

    /// Part of the value above the strike that is not the particular solution:
    /// `sum C_u (x/K)^gamma_u`.
    pub(crate) fn c_sum(&self, y: f64) -> (f64, f64) {
        exp_sum(&self.c_minus, &self.roots.gamma, y - self.log_strike())
    }
}

/// `(sum c_i e^{r_i d}, sum c_i r_i e^{r_i d})`.
pub(crate) fn exp_sum(c: &[f64], rates: &[f64], d: f64) -> (f64, f64) {
    c.iter().zip(rates).fold((0.0, 0.0), |(v, dv), (&ci, &ri)| {
        let e = ci * (ri * d).exp();
        (v + e, dv + ri * e)
    })
}

/// `(1 - e^{-a d}) / a`, stable for small `a d`.
pub(crate) fn one_minus_exp_over(a: f64, d: f64) -> f64 {
    -(-a * d).exp_m1() / a
}

/// Applies the barrier-at-strike nudge.
pub(crate) fn effective_spec(spec: &DownOutStepSpec) -> Result<DownOutStepSpec> {
    spec.validate()?;
    let mut s = *spec;
    let cap = s.strike * (1.0 - MIN_BARRIER_GAP);
    if s.barrier > cap {
        s.barrier = cap;
    }
    Ok(s)
}

/// Solves the maturity-randomized European problem at intensity `theta`.
pub fn solve_european_mr(model: &HejdModel, spec: &DownOutStepSpec, theta: f64) -> Result<MrEuropeanSolution> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(crate::Error::InvalidSpec(format!("theta must be positive, got {theta}")));
    }
    if !(spec.strike > 0.0) {
        return Err(crate::Error::InvalidSpec("strike must be positive".into()));
    }
    let spec = effective_spec(spec)?;
    let r = model.r();
    let d = model.delta();
    let kk = spec.strike;
    let k = kk.ln();
    let slope = theta / (d + theta);
    let level = theta * kk / (r + theta);
    let roots = find_roots(model, r + theta)?;
    let xi: Vec<f64> = model.up().iter().map(|c| c.rate).collect();
    let eta: Vec<f64> = model.down().iter().map(|c| c.rate).collect();
    let (beta, gamma) = (&roots.beta, &roots.gamma);
    let nb = beta.len();
    let ng = gamma.len();

    // Jump-integral constants of the particular solution.
    let p_up = |x: f64| theta * kk / (x * (r + theta)) - theta * kk / ((x - 1.0) * (d + theta));
    let p_down = |e: f64| theta * kk / ((e + 1.0) * (d + theta)) - theta * kk / (e * (r + theta));

    if spec.barrier <= 0.0 {
        // Region below the barrier is empty; B- vanishes and B+ is anchored at k.
        let size = nb + ng;
        let mut q = DMatrix::zeros(size, size);
        let mut rhs = DVector::zeros(size);
        let mut row = 0;
        for &x in &xi {
            for s in 0..nb {
                q[(row, s)] = -1.0 / (x - beta[s]);
            }
            for u in 0..ng {
                q[(row, nb + u)] = 1.0 / (x - gamma[u]);
            }
            rhs[row] = p_up(x);
            row += 1;
        }
        for &e in &eta {
            for s in 0..nb {
                q[(row, s)] = 1.0 / (e + beta[s]);
            }
            for u in 0..ng {
                q[(row, nb + u)] = -1.0 / (e + gamma[u]);
            }
            rhs[row] = p_down(e);
            row += 1;
        }
        for s in 0..nb {
            q[(row, s)] = 1.0;
            q[(row + 1, s)] = beta[s];
        }
        for u in 0..ng {
            q[(row, nb + u)] = -1.0;
            q[(row + 1, nb + u)] = -gamma[u];
        }
        rhs[row] = slope * kk - level;
        rhs[row + 1] = slope * kk;
        let f = Factored::new(q)?;
        let v = f.solve(&rhs);
        let linear_residual = relative_residual(f.matrix(), &v, &rhs);
        return Ok(MrEuropeanSolution {
            theta,
            model: model.clone(),
            spec,
            roots_below: None,
            roots: roots.clone(),
            a_plus: Vec::new(),
            b_plus: v.rows(0, nb).iter().copied().collect(),
            b_minus: Vec::new(),
            c_minus: v.rows(nb, ng).iter().copied().collect(),
            slope,
            level,
            linear_residual,
            condition: f.condition(),
        });
    }

    let below = find_roots(model, r + theta - spec.knock_rate)?;
    let bp = &below.beta;
    let dd = k - spec.barrier.ln();
    let (ia, ib, ic, id) = (0, nb, 2 * nb, 2 * nb + ng);
    let size = 2 * nb + 2 * ng;
    let mut q = DMatrix::zeros(size, size);
    let mut rhs = DVector::zeros(size);
    let mut row = 0;
    for &x in &xi {
        let ex = (-x * dd).exp();
        for s in 0..nb {
            q[(row, ia + s)] = -1.0 / (x - bp[s]);
            q[(row, ib + s)] = (-beta[s] * dd).exp() * one_minus_exp_over(x - beta[s], dd);
        }
        for u in 0..ng {
            q[(row, ic + u)] = one_minus_exp_over(x - gamma[u], dd);
            q[(row, id + u)] = ex / (x - gamma[u]);
        }
        rhs[row] = ex * p_up(x);
        row += 1;
    }
    for &x in &xi {
        for s in 0..nb {
            q[(row, ib + s)] = -1.0 / (x - beta[s]);
        }
        for u in 0..ng {
            q[(row, ic + u)] = -(gamma[u] * dd).exp() / (x - gamma[u]);
            q[(row, id + u)] = 1.0 / (x - gamma[u]);
        }
        rhs[row] = p_up(x);
        row += 1;
    }
    for &e in &eta {
        for s in 0..nb {
            q[(row, ia + s)] = 1.0 / (e + bp[s]);
            q[(row, ib + s)] = -(-beta[s] * dd).exp() / (e + beta[s]);
        }
        for u in 0..ng {
            q[(row, ic + u)] = -1.0 / (e + gamma[u]);
        }
        row += 1;
    }
    for &e in &eta {
        for s in 0..nb {
            q[(row, ia + s)] = (-e * dd).exp() / (e + bp[s]);
            q[(row, ib + s)] = one_minus_exp_over(e + beta[s], dd);
        }
        for u in 0..ng {
            q[(row, ic + u)] = (gamma[u] * dd).exp() * one_minus_exp_over(e + gamma[u], dd);
            q[(row, id + u)] = -1.0 / (e + gamma[u]);
        }
        rhs[row] = p_down(e);
        row += 1;
    }
    // Value and slope continuity at l and k.
    for s in 0..nb {
        let eb = (-beta[s] * dd).exp();
        q[(row, ia + s)] = 1.0;
        q[(row, ib + s)] = -eb;
        q[(row + 1, ib + s)] = 1.0;
        q[(row + 2, ia + s)] = bp[s];
        q[(row + 2, ib + s)] = -beta[s] * eb;
        q[(row + 3, ib + s)] = beta[s];
    }
    for u in 0..ng {
        let eg = (gamma[u] * dd).exp();
        q[(row, ic + u)] = -1.0;
        q[(row + 1, ic + u)] = eg;
        q[(row + 1, id + u)] = -1.0;
        q[(row + 2, ic + u)] = -gamma[u];
        q[(row + 3, ic + u)] = gamma[u] * eg;
        q[(row + 3, id + u)] = -gamma[u];
    }
    rhs[row + 1] = slope * kk - level;
    rhs[row + 3] = slope * kk;

    let f = Factored::new(q)?;
    let v = f.solve(&rhs);
    let linear_residual = relative_residual(f.matrix(), &v, &rhs);
    let take = |start: usize, len: usize| v.rows(start, len).iter().copied().collect::<Vec<_>>();
    Ok(MrEuropeanSolution {
        theta,
        model: model.clone(),
        spec,
        roots_below: Some(below.clone()),
        roots: roots.clone(),
        a_plus: take(ia, nb),
        b_plus: take(ib, nb),
        b_minus: take(ic, ng),
        c_minus: take(id, ng),
        slope,
        level,
        linear_residual,
        condition: f.condition(),
    })
}

pub(crate) fn relative_residual(q: &DMatrix<f64>, v: &DVector<f64>, rhs: &DVector<f64>) -> f64 {
    let r = q * v - rhs;
    let scale = rhs.amax();
    if scale > 0.0 {
        r.amax() / scale
    } else {
        r.amax()
    }
}

/// Evaluates the European solution at spot `x >= 0`.
pub fn eval_european_mr(sol: &MrEuropeanSolution, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    sol.value_log(x.ln()).0
}
