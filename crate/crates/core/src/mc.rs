//! Monte Carlo simulation of the log-price and its occupation times.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DownOutStepSpec, HejdModel};

/// Paths per RNG stream; blocks are reduced in index order.
const BLOCK: usize = 4096;

/// Default cap on `n_paths * T / dt`.
pub const DEFAULT_BUDGET: u128 = 2_000_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n_paths: usize,
    /// Occupation-time grid step in years.
    pub dt: f64,
    pub seed: u64,
    /// Pair each Brownian path with its reflection (jumps are shared).
    pub antithetic: bool,
    /// Maximum `n_paths * T / dt`.
    pub budget: u128,
}

impl Default for PathConfig {
    fn default() -> Self {
        PathConfig { n_paths: 100_000, dt: 1e-3, seed: 42, antithetic: true, budget: DEFAULT_BUDGET }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub dt: f64,
}

/// Side of the barrier whose occupation time is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Below,
    Above,
}

/// Terminal log-return and occupation time of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalSample {
    /// `log(S_T / S_0)`.
    pub log_return: f64,
    /// Time spent on the recorded side of the barrier.
    pub occupation: f64,
}

struct Sampler<'a> {
    model: &'a HejdModel,
    t: f64,
    dt: f64,
    jump_clock: Option<Exp<f64>>,
    cumulative: Vec<(f64, f64, bool)>,
}

impl<'a> Sampler<'a> {
    fn new(model: &'a HejdModel, t: f64, dt: f64) -> Self {
        let jump_clock = (model.lambda() > 0.0).then(|| Exp::new(model.lambda()).expect("positive rate"));
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        for c in model.up() {
            acc += c.weight;
            cumulative.push((acc, c.rate, true));
        }
        for c in model.down() {
            acc += c.weight;
            cumulative.push((acc, c.rate, false));
        }
        Sampler { model, t, dt, jump_clock, cumulative }
    }

    fn jump_times<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        let mut times = Vec::new();
        if let Some(clock) = &self.jump_clock {
            let mut s = clock.sample(rng);
            while s < self.t {
                times.push(s);
                s += clock.sample(rng);
            }
        }
        times
    }

    fn jump_size<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        let &(_, rate, up) = self
            .cumulative
            .iter()
            .find(|c| u < c.0)
            .unwrap_or_else(|| self.cumulative.last().expect("jumps imply components"));
        let size = Exp::new(rate).expect("positive rate").sample(rng);
        if up {
            size
        } else {
            -size
        }
    }

    /// Walks the merged grid; `normals` supplies the Brownian increments.
    fn walk(
        &self,
        jumps: &[(f64, f64)],
        normals: &[f64],
        sign: f64,
        log_barrier: f64,
        side: Side,
    ) -> TerminalSample {
        let b = self.model.drift();
        let s = self.model.sigma();
        let mut x = 0.0;
        let mut now = 0.0;
        let mut occ = 0.0;
        let mut z = normals.iter();
        let mut next_jump = jumps.iter().peekable();
        let mut k = 1usize;
        loop {
            let grid = (k as f64 * self.dt).min(self.t);
            let (until, jump) = match next_jump.peek() {
                Some(&&(tj, size)) if tj < grid => {
                    next_jump.next();
                    (tj, Some(size))
                }
                _ => {
                    k += 1;
                    (grid, None)
                }
            };
            let h = until - now;
            let inside = match side {
                Side::Below => x < log_barrier,
                Side::Above => x > log_barrier,
            };
            if inside {
                occ += h;
            }
            let n = *z.next().expect("enough normals");
            x += b * h + s * h.sqrt() * sign * n;
            if let Some(size) = jump {
                x += size;
            }
            now = until;
            if jump.is_none() && until >= self.t {
                break;
            }
        }
        TerminalSample { log_return: x, occupation: occ }
    }

    fn steps(&self, n_jumps: usize) -> usize {
        (self.t / self.dt).ceil() as usize + n_jumps + 1
    }
}

fn check_budget(cfg: &PathConfig, t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidSpec(format!("maturity must be positive, got {t}")));
    }
    if !(cfg.dt > 0.0) || cfg.n_paths == 0 {
        return Err(Error::InvalidSpec("paths and dt must be positive".into()));
    }
    let requested = cfg.n_paths as u128 * (t / cfg.dt).ceil() as u128;
    if requested > cfg.budget {
        return Err(Error::Budget { requested, budget: cfg.budget });
    }
    Ok(())
}

/// Runs `f` on every simulated path (antithetic partners consecutively),
/// block by block, and returns the per-block outputs in block order.
fn run_blocks<T, F>(model: &HejdModel, t: f64, cfg: &PathConfig, log_barrier: f64, side: Side, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[TerminalSample]) -> T + Sync,
{
    check_budget(cfg, t)?;
    let sampler = Sampler::new(model, t, cfg.dt);
    let n_blocks = cfg.n_paths.div_ceil(BLOCK);
    let out = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(block as u64);
            let count = BLOCK.min(cfg.n_paths - block * BLOCK);
            let mut samples = Vec::with_capacity(count);
            let mut normals = Vec::new();
            while samples.len() < count {
                let times = sampler.jump_times(&mut rng);
                let jumps: Vec<(f64, f64)> = times.iter().map(|&tj| (tj, sampler.jump_size(&mut rng))).collect();
                normals.clear();
                normals.extend((0..sampler.steps(jumps.len())).map(|_| rng.sample::<f64, _>(StandardNormal)));
                samples.push(sampler.walk(&jumps, &normals, 1.0, log_barrier, side));
                if cfg.antithetic && samples.len() < count {
                    samples.push(sampler.walk(&jumps, &normals, -1.0, log_barrier, side));
                }
            }
            f(&samples)
        })
        .collect();
    Ok(out)
}

/// Simulates `(log(S_T/S_0), occupation time below log(L/S_0))` per path.
pub fn simulate_terminal(
    model: &HejdModel,
    t: f64,
    log_barrier: f64,
    cfg: &PathConfig,
) -> Result<Vec<TerminalSample>> {
    let blocks = run_blocks(model, t, cfg, log_barrier, Side::Below, |s| s.to_vec())?;
    Ok(blocks.into_iter().flatten().collect())
}

/// Mean and standard error of `payoff` over simulated paths. With antithetic
/// sampling, each pair is averaged before the variance is taken.
fn estimate<P>(model: &HejdModel, t: f64, cfg: &PathConfig, log_barrier: f64, side: Side, payoff: P) -> Result<McEstimate>
where
    P: Fn(&TerminalSample) -> f64 + Sync,
{
    let group = if cfg.antithetic { 2 } else { 1 };
    let partial = run_blocks(model, t, cfg, log_barrier, side, |samples| {
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let mut n = 0usize;
        for chunk in samples.chunks(group) {
            let v = chunk.iter().map(&payoff).sum::<f64>() / chunk.len() as f64;
            sum += v;
            sum_sq += v * v;
            n += 1;
        }
        (sum, sum_sq, n)
    })?;
    let (sum, sum_sq, n) = partial
        .into_iter()
        .fold((0.0, 0.0, 0usize), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let mean = sum / n as f64;
    let var = ((sum_sq - n as f64 * mean * mean) / (n as f64 - 1.0)).max(0.0);
    Ok(McEstimate {
        value: mean,
        std_error: (var / n as f64).sqrt().max(f64::MIN_POSITIVE),
        n_paths: cfg.n_paths,
        dt: cfg.dt,
    })
}

/// European down-and-out step call
/// `E[e^{-rT} e^{rho_L Gamma^-_{T,L}} (S_T - K)^+]` started at spot `x`,
/// seasoned by the contract's accumulated occupation time.
pub fn mc_euro_step_price(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    x: f64,
    cfg: &PathConfig,
) -> Result<McEstimate> {
    spec.validate()?;
    let disc = (-model.r() * t).exp() * spec.seasoning_factor();
    let log_barrier = if spec.barrier > 0.0 { (spec.barrier / x).ln() } else { f64::NEG_INFINITY };
    let (k, rho) = (spec.strike, spec.knock_rate);
    let mut est = estimate(model, t, cfg, log_barrier, Side::Below, |s| {
        let payoff = (x * s.log_return.exp() - k).max(0.0);
        if payoff == 0.0 {
            0.0
        } else {
            disc * (rho * s.occupation).exp() * payoff
        }
    })?;
    if x <= 0.0 {
        est.value = 0.0;
    }
    Ok(est)
}

/// Both sides of the call-put duality for a down-and-out step call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Step call under the original market.
    pub call: McEstimate,
    /// Dual step put under the dual market (strike `x`, spot `K`, knock-out
    /// on occupation time above `x K / L`, discounted at `delta`).
    pub put: McEstimate,
    pub difference: f64,
    pub pooled_se: f64,
    /// `|difference| / pooled_se`.
    pub z_score: f64,
}

/// Estimates the call under `model` and the dual put under the dual market
/// with independent random streams.
pub fn verify_duality(
    model: &HejdModel,
    spec: &DownOutStepSpec,
    t: f64,
    x: f64,
    cfg: &PathConfig,
) -> Result<DualityReport> {
    spec.validate()?;
    if !(x > 0.0) || !(spec.strike > 0.0) {
        return Err(Error::InvalidSpec("duality check needs positive spot and strike".into()));
    }
    let call = mc_euro_step_price(model, spec, t, x, cfg)?;
    let dual = model.dual_model().dual;
    let put_cfg = PathConfig { seed: cfg.seed ^ 0x9E37_79B9_7F4A_7C15, ..cfg.clone() };
    let k = spec.strike;
    let disc = (-dual.r() * t).exp() * spec.seasoning_factor();
    let rho = spec.knock_rate;
    // Upper barrier x K / L relative to the put's spot K.
    let log_upper = if spec.barrier > 0.0 { (x / spec.barrier).ln() } else { f64::INFINITY };
    let put = estimate(&dual, t, &put_cfg, log_upper, Side::Above, |s| {
        let payoff = (x - k * s.log_return.exp()).max(0.0);
        if payoff == 0.0 {
            0.0
        } else {
            disc * (rho * s.occupation).exp() * payoff
        }
    })?;
    let difference = call.value - put.value;
    let pooled_se = (call.std_error.powi(2) + put.std_error.powi(2)).sqrt();
    Ok(DualityReport { call, put, difference, pooled_se, z_score: difference.abs() / pooled_se })
}
