use nalgebra::{DMatrix, DVector};

use super::european::{exp_sum, one_minus_exp_over, relative_residual, solve_european_mr, MrEuropeanSolution};
use crate::error::{Error, Result};
use crate::linalg::Factored;
use crate::model::{DownOutStepSpec, HejdModel};

const SCAN_POINTS: usize = 64;
const SCAN_LO: f64 = 1e-6;
const SCAN_HI_LOG: f64 = 5.0;
const SCAN_MAX_LOG: f64 = 20.0;

/// Maturity-randomized American down-and-out step call, represented as the
/// European value plus an early-exercise premium.
///
/// For `y = log x` below the boundary `c = log b*` the premium is
/// `sum D_s e^{beta'_s (y - l)}` below `l` and
/// `sum F+_s e^{beta_s (y - c)} + sum F-_u e^{gamma_u (y - l)}` on `[l, c)`,
/// with no `F-` terms when `L = 0`. Above the boundary the premium is
/// `x - K - Euro(x)`.
#[derive(Debug, Clone)]
pub struct MrAmericanSolution {
    pub european: MrEuropeanSolution,
    /// Free boundary in currency units.
    pub boundary: f64,
    pub d_plus: Vec<f64>,
    pub f_plus: Vec<f64>,
    pub f_minus: Vec<f64>,
    /// Coefficients `(D+, F+, F-)` driven only by the value-matching row.
    pub w_diffusion: Vec<f64>,
    /// Coefficients `(D+, F+, F-)` driven only by the jump rows.
    pub w_jump: Vec<f64>,
    /// Smooth-fit residual at the boundary, relative to the exercise-payoff slope.
    pub smooth_fit_residual: f64,
    pub linear_residual: f64,
    pub condition: f64,
}

/// Per-candidate system at a trial boundary.
struct Trial {
    factored: Factored,
    w: DVector<f64>,
    w0: DVector<f64>,
    wj: DVector<f64>,
    residual: f64,
    scale: f64,
}

struct Layout {
    nd: usize,
    nb: usize,
    ng: usize,
}

impl Layout {
    fn of(sol: &MrEuropeanSolution) -> Self {
        let nb = sol.roots.beta.len();
        match sol.log_barrier() {
            Some(_) => Layout { nd: nb, nb, ng: sol.roots.gamma.len() },
            None => Layout { nd: 0, nb, ng: 0 },
        }
    }

    fn size(&self) -> usize {
        self.nd + self.nb + self.ng
    }
}

/// Exercise payoff minus European value above the strike, and its log-derivative.
fn gain(eu: &MrEuropeanSolution, c: f64) -> (f64, f64) {
    let m = &eu.model;
    let (r, d, t) = (m.r(), m.delta(), eu.theta);
    let kk = eu.spec.strike;
    let ec = c.exp();
    let (cs, dcs) = eu.c_sum(c);
    (
        d * ec / (d + t) - r * kk / (r + t) - cs,
        d * ec / (d + t) - dcs,
    )
}

fn assemble(eu: &MrEuropeanSolution, c: f64) -> Result<Trial> {
    let lay = Layout::of(eu);
    let m = &eu.model;
    let (r, d, t) = (m.r(), m.delta(), eu.theta);
    let kk = eu.spec.strike;
    let k = kk.ln();
    let beta = &eu.roots.beta;
    let gamma = &eu.roots.gamma;
    let xi: Vec<f64> = m.up().iter().map(|x| x.rate).collect();
    let eta: Vec<f64> = m.down().iter().map(|x| x.rate).collect();
    let ec = c.exp();
    let size = lay.size();
    let mut q = DMatrix::zeros(size, size);
    let mut q0 = DVector::zeros(size);
    let mut qj = DVector::zeros(size);

    // Integral of the gain against e^{-xi (z - c)} over z > c.
    let gain_up = |x: f64| {
        let cs: f64 = eu
            .c_minus
            .iter()
            .zip(gamma)
            .map(|(&cu, &g)| cu * (g * (c - k)).exp() / (x - g))
            .sum();
        d * ec / ((x - 1.0) * (d + t)) - r * kk / (x * (r + t)) - cs
    };
    let (g0, _) = gain(eu, c);

    let (ia, ib, ic) = (0, lay.nd, lay.nd + lay.nb);
    let mut row = 0;
    match eu.log_barrier() {
        None => {
            for &x in &xi {
                for s in 0..lay.nb {
                    q[(row, ib + s)] = -1.0 / (x - beta[s]);
                }
                qj[row] = -gain_up(x);
                row += 1;
            }
            for s in 0..lay.nb {
                q[(row, ib + s)] = 1.0;
            }
            q0[row] = g0;
        }
        Some(l) => {
            let bp = &eu.roots_below.as_ref().expect("barrier implies lower roots").beta;
            let db = c - l;
            for &x in &xi {
                let ex = (-x * db).exp();
                for s in 0..lay.nb {
                    q[(row, ia + s)] = -1.0 / (x - bp[s]);
                    q[(row, ib + s)] = (-beta[s] * db).exp() * one_minus_exp_over(x - beta[s], db);
                }
                for u in 0..lay.ng {
                    q[(row, ic + u)] = one_minus_exp_over(x - gamma[u], db);
                }
                qj[row] = -ex * gain_up(x);
                row += 1;
            }
            for &x in &xi {
                for s in 0..lay.nb {
                    q[(row, ib + s)] = -1.0 / (x - beta[s]);
                }
                for u in 0..lay.ng {
                    q[(row, ic + u)] = -(gamma[u] * db).exp() / (x - gamma[u]);
                }
                qj[row] = -gain_up(x);
                row += 1;
            }
            for &e in &eta {
                for s in 0..lay.nb {
                    q[(row, ia + s)] = 1.0 / (e + bp[s]);
                    q[(row, ib + s)] = -(-beta[s] * db).exp() / (e + beta[s]);
                }
                for u in 0..lay.ng {
                    q[(row, ic + u)] = -1.0 / (e + gamma[u]);
                }
                row += 1;
            }
            for s in 0..lay.nb {
                let eb = (-beta[s] * db).exp();
                q[(row, ia + s)] = 1.0;
                q[(row, ib + s)] = -eb;
                q[(row + 1, ib + s)] = 1.0;
                q[(row + 2, ia + s)] = bp[s];
                q[(row + 2, ib + s)] = -beta[s] * eb;
            }
            for u in 0..lay.ng {
                let eg = (gamma[u] * db).exp();
                q[(row, ic + u)] = -1.0;
                q[(row + 1, ic + u)] = eg;
                q[(row + 2, ic + u)] = -gamma[u];
            }
            q0[row + 1] = g0;
        }
    }

    let factored = Factored::new(q)?;
    let w0 = factored.solve(&q0);
    let wj = factored.solve(&qj);
    let rhs = &q0 + &qj;
    let w = factored.solve(&rhs);
    let residual = relative_residual(factored.matrix(), &w, &rhs);
    let scale = d * ec / (d + t);
    Ok(Trial { factored, w, w0, wj, residual, scale })
}

/// Premium (and log-derivative) just left of the boundary from coefficients `w`.
fn premium_at_boundary(eu: &MrEuropeanSolution, lay: &Layout, w: &[f64], c: f64) -> (f64, f64) {
    let beta = &eu.roots.beta;
    let gamma = &eu.roots.gamma;
    let fp = &w[lay.nd..lay.nd + lay.nb];
    let fm = &w[lay.nd + lay.nb..];
    let l = eu.log_barrier().unwrap_or(c);
    let (v1, d1) = exp_sum(fp, beta, 0.0);
    let (v2, d2) = exp_sum(fm, gamma, c - l);
    (v1 + v2, d1 + d2)
}

/// Smooth-fit residual `R(c)` and its normalization at trial log-boundary `c`.
fn smooth_fit(eu: &MrEuropeanSolution, c: f64) -> Result<(f64, f64, Trial)> {
    let trial = assemble(eu, c)?;
    let lay = Layout::of(eu);
    let (_, dprem) = premium_at_boundary(eu, &lay, trial.w.as_slice(), c);
    let (_, dgain) = gain(eu, c);
    Ok((dprem - dgain, trial.scale, trial))
}

/// Solves the maturity-randomized American problem at intensity `theta`.
pub fn solve_american_mr(model: &HejdModel, spec: &DownOutStepSpec, theta: f64) -> Result<MrAmericanSolution> {
    let european = solve_european_mr(model, spec, theta)?;
    solve_american_from(european)
}

/// Builds the American solution on top of an already solved European one.
pub fn solve_american_from(european: MrEuropeanSolution) -> Result<MrAmericanSolution> {
    let k = european.log_strike();
    let lo = k + SCAN_LO.ln_1p();
    let mut hi = k + SCAN_HI_LOG;
    let r_at = |c: f64| smooth_fit(&european, c).ok().map(|(r, s, _)| r / s);

    let mut samples: Vec<(f64, f64)> = Vec::new();
    let scan = |a: f64, b: f64, n: usize, samples: &mut Vec<(f64, f64)>| {
        // Log-spaced in b*, i.e. the offsets above K are geometric.
        let (oa, ob) = ((a - k).ln(), (b - k).ln());
        for i in 0..n {
            let c = k + (oa + (ob - oa) * i as f64 / (n - 1) as f64).exp();
            if samples.last().is_some_and(|&(prev, _)| c <= prev) {
                continue;
            }
            if let Some(v) = r_at(c) {
                if v.is_finite() {
                    samples.push((c, v));
                }
            }
        }
    };
    scan(lo, hi, SCAN_POINTS, &mut samples);
    let mut brackets = sign_changes(&samples);
    while brackets.is_empty() && hi - k < SCAN_MAX_LOG {
        let next = (k + 2.0 * (hi - k)).min(k + SCAN_MAX_LOG);
        scan(hi, next, SCAN_POINTS / 4, &mut samples);
        hi = next;
        brackets = sign_changes(&samples);
    }
    let strike = european.spec.strike;
    match brackets.len() {
        0 => {
            return Err(Error::NoBoundary { lo: lo.exp(), hi: hi.exp() });
        }
        1 => {}
        count => {
            return Err(Error::MultipleBoundaries {
                count,
                candidates: brackets.iter().map(|&(a, b)| (0.5 * (a + b)).exp()).collect(),
            });
        }
    }
    let (a, b) = brackets[0];
    let c = brent(|c| r_at(c).unwrap_or(f64::NAN), a, b, 1e-15 * strike.ln().abs().max(1.0), 200)
        .ok_or(Error::NoBoundary { lo: a.exp(), hi: b.exp() })?;
    let (res, scale, trial) = smooth_fit(&european, c)?;
    let lay = Layout::of(&european);
    let w = trial.w.as_slice().to_vec();
    Ok(MrAmericanSolution {
        boundary: c.exp(),
        d_plus: w[..lay.nd].to_vec(),
        f_plus: w[lay.nd..lay.nd + lay.nb].to_vec(),
        f_minus: w[lay.nd + lay.nb..].to_vec(),
        w_diffusion: trial.w0.as_slice().to_vec(),
        w_jump: trial.wj.as_slice().to_vec(),
        smooth_fit_residual: (res / scale).abs(),
        linear_residual: trial.residual,
        condition: trial.factored.condition(),
        european,
    })
}

fn sign_changes(samples: &[(f64, f64)]) -> Vec<(f64, f64)> {
    samples
        .windows(2)
        .filter(|w| w[0].1 == 0.0 || (w[0].1 < 0.0) != (w[1].1 < 0.0))
        .map(|w| (w[0].0, w[1].0))
        .collect()
}

/// Brent's method on a sign-changing bracket.
pub(crate) fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64, max_iter: usize) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return None;
    }
    if fa == 0.0 {
        return Some(a);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    Some(b)
}

impl MrAmericanSolution {
    fn layout(&self) -> Layout {
        Layout::of(&self.european)
    }

    fn premium_from(&self, w: &[f64], y: f64) -> f64 {
        let eu = &self.european;
        let lay = self.layout();
        let c = self.boundary.ln();
        if let (Some(l), Some(below)) = (eu.log_barrier(), &eu.roots_below) {
            if y < l {
                return exp_sum(&w[..lay.nd], &below.beta, y - l).0;
            }
        }
        let l = eu.log_barrier().unwrap_or(c);
        let fp = &w[lay.nd..lay.nd + lay.nb];
        let fm = &w[lay.nd + lay.nb..];
        exp_sum(fp, &eu.roots.beta, y - c).0 + exp_sum(fm, &eu.roots.gamma, y - l).0
    }

    /// Continuation-region formulas evaluated at `x` regardless of the
    /// boundary: `(total, diffusion, jump)`.
    pub fn continuation_premium(&self, x: f64) -> (f64, f64, f64) {
        if x <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let y = x.ln();
        let d = self.premium_from(&self.w_diffusion, y);
        let j = self.premium_from(&self.w_jump, y);
        (d + j, d, j)
    }

    /// Full coefficient vector `w = (D+, F+, F-)`.
    pub fn w(&self) -> Vec<f64> {
        let mut w = self.d_plus.clone();
        w.extend(&self.f_plus);
        w.extend(&self.f_minus);
        w
    }

    /// `x - K - Euro(x)`.
    pub fn exercise_gain(&self, x: f64) -> f64 {
        x - self.european.spec.strike - super::eval_european_mr(&self.european, x)
    }

    /// American value `Euro(x) + EEP(x)`.
    pub fn price(&self, x: f64) -> f64 {
        if x >= self.boundary {
            return x - self.european.spec.strike;
        }
        super::eval_european_mr(&self.european, x) + eval_eep_split_mr(self, x).0
    }

    /// American value as a function of the log-price.
    pub fn price_log(&self, y: f64) -> f64 {
        self.price(y.exp())
    }
}

/// Early-exercise premium and its diffusion and jump contributions at spot `x`.
pub fn eval_eep_split_mr(sol: &MrAmericanSolution, x: f64) -> (f64, f64, f64) {
    if x <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if x > sol.boundary {
        let g = sol.exercise_gain(x);
        return (g, 0.0, g);
    }
    if x == sol.boundary {
        let g = sol.exercise_gain(x);
        return (g, g, 0.0);
    }
    let y = x.ln();
    let diffusion = sol.premium_from(&sol.w_diffusion, y);
    let jump = sol.premium_from(&sol.w_jump, y);
    (diffusion + jump, diffusion, jump)
}
