//! Monte-Carlo engine for the threshold-switching surplus process under a
//! two-barrier impulse strategy.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::numerics::NeumaierSum;
use crate::scale::value_upper_bound;
use crate::solver::BarrierPair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Pair path `2k` with path `2k + 1` driven by the negated normals.
    pub antithetic: bool,
    pub store_paths: bool,
}

impl SimConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64, antithetic: bool, store_paths: bool) -> Result<Self> {
        let cfg = Self {
            dt,
            horizon,
            n_paths,
            seed,
            antithetic,
            store_paths,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `dt = 1e-3`, horizon `max(20 / q, 50)`, `10^5` antithetic paths.
    pub fn default_for(q: f64) -> Self {
        Self {
            dt: 1e-3,
            horizon: default_horizon(q),
            n_paths: 100_000,
            seed: 0,
            antithetic: true,
            store_paths: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::SimConfig(format!("dt must be positive and finite, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::SimConfig(format!(
                "horizon must be finite and at least dt = {}, got {}",
                self.dt, self.horizon
            )));
        }
        if self.n_paths == 0 {
            return Err(Error::SimConfig("n_paths must be at least 1".into()));
        }
        if self.antithetic && self.n_paths % 2 == 1 {
            return Err(Error::SimConfig(format!(
                "antithetic sampling needs an even number of paths, got {}",
                self.n_paths
            )));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil() as usize
    }

    fn rng_for(&self, path: usize) -> (ChaCha8Rng, f64) {
        let (stream, sign) = if self.antithetic {
            ((path / 2) as u64, if path % 2 == 0 { 1.0 } else { -1.0 })
        } else {
            (path as u64, 1.0)
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        (rng, sign)
    }
}

pub fn default_horizon(q: f64) -> f64 {
    (20.0 / q).max(50.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub path_id: usize,
    /// Sample times; an impulse at time `t` appears as two entries at `t`,
    /// the state before and after the payment.
    pub times: Vec<f64>,
    pub surplus: Vec<f64>,
    /// `(time, amount)` of every dividend paid, recorded whether or not the path is stored.
    pub dividends: Vec<(f64, f64)>,
    pub ruin_time: Option<f64>,
    /// `sum e^{-q t} (amount - beta)` over the dividends of the path.
    pub discounted_reward: f64,
    /// Sum of the diffusion increments applied along the path.
    pub net_increments: f64,
    pub final_surplus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95: (f64, f64),
    pub n_paths: usize,
    pub truncation_bias_bound: f64,
}

impl MCEstimate {
    fn from_samples(samples: &[f64], n_paths: usize, truncation_bias_bound: f64) -> Self {
        let n = samples.len() as f64;
        let mut s = NeumaierSum::new();
        s.extend(samples.iter().copied());
        let mean = s.value() / n;
        let mut ss = NeumaierSum::new();
        ss.extend(samples.iter().map(|v| (v - mean) * (v - mean)));
        let var = if samples.len() > 1 { ss.value() / (n - 1.0) } else { 0.0 };
        let std_error = (var / n).sqrt();
        Self {
            mean,
            std_error,
            ci95: (mean - 1.96 * std_error, mean + 1.96 * std_error),
            n_paths,
            truncation_bias_bound,
        }
    }

    /// Whether `value` lies in the 95% interval widened by the truncation bias bound.
    pub fn covers(&self, value: f64) -> bool {
        value >= self.ci95.0 - self.truncation_bias_bound && value <= self.ci95.1 + self.truncation_bias_bound
    }

    /// `|value - mean|` in standard errors.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if self.std_error > 0.0 {
            d / self.std_error
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

fn check_pair(params: &ModelParams<f64>, pair: &BarrierPair<f64>, x0: f64) -> Result<()> {
    if !(x0 >= 0.0 && x0.is_finite()) {
        return Err(Error::Domain {
            what: "initial surplus",
            x: x0,
            domain: "[0, inf)".into(),
        });
    }
    if !(pair.z1 >= 0.0 && pair.z2 >= pair.z1 + params.beta) {
        return Err(Error::Ordering(format!(
            "barrier pair needs 0 <= z1 and z2 >= z1 + beta, got z1 = {}, z2 = {}, beta = {}",
            pair.z1, pair.z2, params.beta
        )));
    }
    Ok(())
}

#[inline]
fn coefficients(params: &ModelParams<f64>, x: f64) -> (f64, f64) {
    if x <= params.a {
        (params.mu_minus, params.sigma_minus)
    } else {
        (params.mu_plus, params.sigma_plus)
    }
}

fn run_path(params: &ModelParams<f64>, pair: &BarrierPair<f64>, cfg: &SimConfig, x0: f64, path_id: usize) -> PathRecord {
    let (mut rng, sign) = cfg.rng_for(path_id);
    let sqdt = cfg.dt.sqrt();
    let q = params.q;
    let keep = cfg.store_paths;
    let mut rec = PathRecord {
        path_id,
        times: Vec::new(),
        surplus: Vec::new(),
        dividends: Vec::new(),
        ruin_time: None,
        discounted_reward: 0.0,
        net_increments: 0.0,
        final_surplus: x0,
    };
    let mut reward = 0.0;
    let mut x = x0;
    if keep {
        rec.times.push(0.0);
        rec.surplus.push(x);
    }
    if x >= pair.z2 {
        let amount = x - pair.z1;
        reward += amount - params.beta;
        x = pair.z1;
        rec.dividends.push((0.0, amount));
        if keep {
            rec.times.push(0.0);
            rec.surplus.push(x);
        }
    }
    for step in 1..=cfg.n_steps() {
        let (mu, sigma) = coefficients(params, x);
        let z: f64 = rng.sample(StandardNormal);
        let dx = mu * cfg.dt + sigma * sqdt * sign * z;
        x += dx;
        rec.net_increments += dx;
        let t = step as f64 * cfg.dt;
        if keep {
            rec.times.push(t);
            rec.surplus.push(x);
        }
        if x < 0.0 {
            rec.ruin_time = Some(t);
            break;
        }
        if x >= pair.z2 {
            let amount = x - pair.z1;
            reward += (-q * t).exp() * (amount - params.beta);
            x = pair.z1;
            rec.dividends.push((t, amount));
            if keep {
                rec.times.push(t);
                rec.surplus.push(x);
            }
        }
    }
    rec.discounted_reward = reward;
    rec.final_surplus = x;
    rec
}

/// Controlled paths started at `x0`, generated lazily in path order.
pub fn simulate_controlled<'a>(
    params: &'a ModelParams<f64>,
    pair: &'a BarrierPair<f64>,
    cfg: &'a SimConfig,
    x0: f64,
) -> Result<impl Iterator<Item = PathRecord> + 'a> {
    cfg.validate()?;
    params.validate()?;
    check_pair(params, pair, x0)?;
    Ok((0..cfg.n_paths).map(move |i| run_path(params, pair, cfg, x0, i)))
}

/// Samples grouped into antithetic pairs when enabled, evaluated in parallel
/// and returned in path order.
fn paired_samples<F: Fn(usize) -> f64 + Sync + Send>(cfg: &SimConfig, f: F) -> Vec<f64> {
    if cfg.antithetic {
        (0..cfg.n_paths / 2)
            .into_par_iter()
            .map(|k| 0.5 * (f(2 * k) + f(2 * k + 1)))
            .collect()
    } else {
        (0..cfg.n_paths).into_par_iter().map(f).collect()
    }
}

/// Expected discounted net dividends of the `(z1, z2)` strategy from `x0`.
pub fn estimate_value_mc(params: &ModelParams<f64>, pair: &BarrierPair<f64>, cfg: &SimConfig, x0: f64) -> Result<MCEstimate> {
    let mut lean = *cfg;
    lean.store_paths = false;
    lean.validate()?;
    params.validate()?;
    check_pair(params, pair, x0)?;
    let samples = paired_samples(&lean, |i| run_path(params, pair, &lean, x0, i).discounted_reward);
    let bias = (-params.q * lean.n_steps() as f64 * lean.dt).exp() * value_upper_bound(params, pair.z2);
    Ok(MCEstimate::from_samples(&samples, cfg.n_paths, bias))
}

/// Which boundary of the exit interval is rewarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitSide {
    /// `E_x[e^{-q T_y} 1{T_y < T_z}]`.
    Down,
    /// `E_x[e^{-q T_z} 1{T_z < T_y}]`.
    Up,
}

/// One step of the uncontrolled process from `s`. The distance to the
/// threshold, measured in units of the local volatility, is advanced as a
/// skew Brownian motion (sampled exactly: reflected increment, and a fresh
/// side with probability `sigma_- / (sigma_+ + sigma_-)` of landing above
/// when the step touches the threshold); the drift of the starting regime is
/// added afterwards.
fn exit_step(params: &ModelParams<f64>, rng: &mut ChaCha8Rng, sign: f64, s: f64, h: f64) -> f64 {
    let a = params.a;
    let (mu, sigma) = coefficients(params, s);
    let sh = h.sqrt();
    let n: f64 = rng.sample(StandardNormal);
    let up = s > a;
    let r = (s - a).abs() / sigma;
    let d = r + sh * sign * n * if up { 1.0 } else { -1.0 };
    let crossed = d <= 0.0 || (r < 8.0 * sh && mirror(rng.random(), sign) < (-2.0 * r * d / h).exp());
    let up = if crossed {
        mirror(rng.random(), sign) < params.sigma_minus / (params.sigma_plus + params.sigma_minus)
    } else {
        up
    };
    let (offset, scale) = if up { (d.abs(), params.sigma_plus) } else { (-d.abs(), params.sigma_minus) };
    a + scale * offset + mu * h
}

#[inline]
fn mirror(u: f64, sign: f64) -> f64 {
    if sign < 0.0 {
        1.0 - u
    } else {
        u
    }
}

/// Monte-Carlo estimate of a two-sided exit functional of the uncontrolled
/// process. Steps across the threshold use an exact skew Brownian kernel for
/// the volatility jump, and crossings of `y` and `z` between grid points are
/// detected with the Brownian-bridge probability for the regime of the barrier.
pub fn estimate_exit_mc(params: &ModelParams<f64>, cfg: &SimConfig, x: f64, y: f64, z: f64, side: ExitSide) -> Result<MCEstimate> {
    cfg.validate()?;
    params.validate()?;
    if !(y <= x && x <= z) || y == z {
        return Err(Error::Ordering(format!(
            "exit functionals need y <= x <= z with y != z, got y = {y}, x = {x}, z = {z}"
        )));
    }
    let n_steps = cfg.n_steps();
    let bias = (-params.q * n_steps as f64 * cfg.dt).exp();
    let (hit_y, hit_z) = match side {
        ExitSide::Down => (1.0, 0.0),
        ExitSide::Up => (0.0, 1.0),
    };
    if x == y {
        return Ok(MCEstimate::from_samples(&[hit_y], cfg.n_paths, 0.0));
    }
    if x == z {
        return Ok(MCEstimate::from_samples(&[hit_z], cfg.n_paths, 0.0));
    }
    let h = cfg.dt;
    let var_y = coefficients(params, y).1.powi(2) * h;
    let var_z = coefficients(params, z).1.powi(2) * h;
    let one_path = |i: usize| -> f64 {
        let (mut rng, sign) = cfg.rng_for(i);
        let mut s = x;
        for step in 1..=n_steps {
            let next = exit_step(params, &mut rng, sign, s, h);
            let disc = (-params.q * step as f64 * h).exp();
            if next <= y {
                return disc * hit_y;
            }
            if next >= z {
                return disc * hit_z;
            }
            let u = mirror(rng.random(), sign);
            let p_y = (-2.0 * (s - y) * (next - y) / var_y).exp();
            if u < p_y {
                return disc * hit_y;
            }
            if u < p_y + (-2.0 * (z - s) * (z - next) / var_z).exp() {
                return disc * hit_z;
            }
            s = next;
        }
        0.0
    };
    let samples = paired_samples(cfg, one_path);
    Ok(MCEstimate::from_samples(&samples, cfg.n_paths, bias))
}
