//! Seeded Monte Carlo oracle.
//!
//! Draws user placements per trial, evaluates the scheme's rate equations
//! directly (no closed forms), and estimates outage probabilities and ergodic
//! rates with standard errors. Each trial derives its own RNG stream from
//! `(seed, trial index)`, so results are independent of how trials are
//! sharded across workers: trials are processed in fixed-size chunks whose
//! partial sums are reduced in chunk order, making the output bitwise stable
//! for any worker count.

use crate::error::{Error, Result};
use crate::model::{NomaPowerAllocation, RateTargets, SystemGeometry};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_2;

/// Multiple-access scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Oma,
    Noma,
}

/// Transmission direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Downlink,
    Uplink,
}

/// One simulation scenario at a single SNR point.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub geometry: SystemGeometry,
    pub users: usize,
    pub scheme: Scheme,
    pub direction: Direction,
    /// Power allocation; required for downlink NOMA, unused otherwise
    /// (uplink users transmit at full power).
    pub alloc: Option<NomaPowerAllocation>,
    /// Per-user targets; required for outage runs, unused for rate runs.
    pub targets: Option<RateTargets>,
    /// Transmit SNR, linear.
    pub snr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimConfig {
    fn validate(&self, needs_targets: bool) -> Result<()> {
        if self.users == 0 {
            return Err(Error::InvalidConfig("user count must be at least one"));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trial count must be at least one"));
        }
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::InvalidConfig("SNR must be finite and > 0"));
        }
        if self.scheme == Scheme::Noma && self.direction == Direction::Downlink {
            match &self.alloc {
                Some(a) if a.users() == self.users => {}
                Some(_) => {
                    return Err(Error::InvalidConfig(
                        "allocation must cover every user",
                    ))
                }
                None => {
                    return Err(Error::InvalidConfig(
                        "downlink NOMA needs a power allocation",
                    ))
                }
            }
        }
        if needs_targets {
            match &self.targets {
                Some(t) if t.users() == self.users => {}
                Some(_) => {
                    return Err(Error::InvalidConfig("targets must cover every user"))
                }
                None => return Err(Error::InvalidConfig("outage runs need targets")),
            }
        }
        Ok(())
    }
}

/// Sample statistic with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Draws the channel gains of `users` independently placed users: the
/// lateral offset is uniform on `[-D/2, D/2]` and the gain is
/// `eta / (offset^2 + d^2)`.
pub fn sample_gains<R: Rng>(geometry: &SystemGeometry, users: usize, rng: &mut R) -> Vec<f64> {
    let mut gains = vec![0.0; users];
    fill_gains(geometry, rng, &mut gains);
    gains
}

fn fill_gains<R: Rng>(geometry: &SystemGeometry, rng: &mut R, out: &mut [f64]) {
    let eta = geometry.path_gain_constant();
    let d2 = geometry.waveguide_height() * geometry.waveguide_height();
    let room = geometry.room_side();
    for g in out.iter_mut() {
        let offset = (rng.gen::<f64>() - 0.5) * room;
        *g = eta / (offset * offset + d2);
    }
}

/// Estimates the outage probability of every user in one pass.
///
/// Outage events evaluate the scheme's decoding chain directly: an OMA user
/// is in outage when its slot rate misses its target; a downlink NOMA user
/// when any of its SIC decode steps (weaker users first, then its own signal)
/// misses that user's target; an uplink NOMA user when its own or any
/// stronger user's decode misses its target.
pub fn simulate_outage(cfg: &SimConfig) -> Result<Vec<Estimate>> {
    cfg.validate(true)?;
    let counts = run_trials(cfg, |scratch, ctx, hit: &mut [bool]| {
        outage_flags(ctx, scratch, hit)
    })?;
    let n = cfg.trials as f64;
    Ok(counts
        .into_iter()
        .map(|c| {
            let p = c as f64 / n;
            Estimate {
                mean: p,
                std_error: (p * (1.0 - p) / n).sqrt(),
                trials: cfg.trials,
            }
        })
        .collect())
}

/// Estimate for a single user rank (1-based); see [`simulate_outage`].
pub fn simulate_outage_for(cfg: &SimConfig, rank: usize) -> Result<Estimate> {
    let all = simulate_outage(cfg)?;
    all.get(rank.wrapping_sub(1)).copied().ok_or(Error::RankOutOfRange {
        rank,
        users: cfg.users,
    })
}

/// Estimates the achievable rate of every user in one pass (bits/s/Hz).
pub fn simulate_rate(cfg: &SimConfig) -> Result<Vec<Estimate>> {
    cfg.validate(false)?;
    let stats = run_rate_trials(cfg)?;
    let n = cfg.trials as f64;
    Ok(stats
        .into_iter()
        .map(|(sum, sumsq)| {
            let mean = sum / n;
            let var = if cfg.trials > 1 {
                ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            Estimate {
                mean,
                std_error: (var / n).sqrt(),
                trials: cfg.trials,
            }
        })
        .collect())
}

/// Estimate for a single user rank (1-based); see [`simulate_rate`].
pub fn simulate_rate_for(cfg: &SimConfig, rank: usize) -> Result<Estimate> {
    let all = simulate_rate(cfg)?;
    all.get(rank.wrapping_sub(1)).copied().ok_or(Error::RankOutOfRange {
        rank,
        users: cfg.users,
    })
}

const CHUNK: u64 = 1 << 14;

struct TrialContext<'a> {
    cfg: &'a SimConfig,
    /// residual allocation sums for downlink NOMA, indexed by rank-1
    residuals: Vec<f64>,
    coefficients: Vec<f64>,
    targets: Vec<f64>,
}

impl<'a> TrialContext<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let (coefficients, residuals) = match &cfg.alloc {
            Some(a) => (
                a.coefficients().to_vec(),
                (1..=cfg.users)
                    .map(|m| a.residual_after(m).expect("validated"))
                    .collect(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        let targets = cfg
            .targets
            .as_ref()
            .map(|t| t.as_slice().to_vec())
            .unwrap_or_default();
        Self {
            cfg,
            residuals,
            coefficients,
            targets,
        }
    }
}

fn sort_gains(gains: &mut [f64]) {
    // ties (probability zero under continuous sampling) keep draw order,
    // which the value-based ordering below cannot distinguish anyway
    gains.sort_unstable_by(f64::total_cmp);
}

fn outage_flags(ctx: &TrialContext<'_>, gains: &mut [f64], hit: &mut [bool]) {
    let cfg = ctx.cfg;
    let users = cfg.users;
    let rho = cfg.snr;
    match (cfg.scheme, cfg.direction) {
        (Scheme::Oma, _) => {
            let inv_users = 1.0 / users as f64;
            for i in 0..users {
                let rate = (rho * gains[i]).ln_1p() / LN_2 * inv_users;
                hit[i] = rate < ctx.targets[i];
            }
        }
        (Scheme::Noma, Direction::Downlink) => {
            sort_gains(gains);
            let scale = rho / users as f64;
            for m in 0..users {
                let x = gains[m] * scale;
                let mut outage = false;
                for k in 0..=m {
                    let rate = (x * ctx.coefficients[k] / (x * ctx.residuals[k] + 1.0)).ln_1p()
                        / LN_2;
                    if rate < ctx.targets[k] {
                        outage = true;
                        break;
                    }
                }
                hit[m] = outage;
            }
        }
        (Scheme::Noma, Direction::Uplink) => {
            sort_gains(gains);
            // decode from the strongest down; user m fails if any decode at
            // or above its own rank fails
            let inv_rho = 1.0 / rho;
            let mut prefix = 0.0;
            let mut rate_ok = vec![true; users];
            for m in 0..users {
                let rate = (gains[m] / (prefix + inv_rho)).ln_1p() / LN_2;
                rate_ok[m] = rate >= ctx.targets[m];
                prefix += gains[m];
            }
            let mut chain_ok = true;
            for m in (0..users).rev() {
                chain_ok &= rate_ok[m];
                hit[m] = !chain_ok;
            }
        }
    }
}

fn trial_rates(ctx: &TrialContext<'_>, gains: &mut [f64], rates: &mut [f64]) {
    let cfg = ctx.cfg;
    let users = cfg.users;
    let rho = cfg.snr;
    match (cfg.scheme, cfg.direction) {
        (Scheme::Oma, _) => {
            let inv_users = 1.0 / users as f64;
            for i in 0..users {
                rates[i] = (rho * gains[i]).ln_1p() / LN_2 * inv_users;
            }
        }
        (Scheme::Noma, Direction::Downlink) => {
            sort_gains(gains);
            let scale = rho / users as f64;
            for m in 0..users {
                let x = gains[m] * scale;
                rates[m] =
                    (x * ctx.coefficients[m] / (x * ctx.residuals[m] + 1.0)).ln_1p() / LN_2;
            }
        }
        (Scheme::Noma, Direction::Uplink) => {
            sort_gains(gains);
            let inv_rho = 1.0 / rho;
            let mut prefix = 0.0;
            for m in 0..users {
                rates[m] = (gains[m] / (prefix + inv_rho)).ln_1p() / LN_2;
                prefix += gains[m];
            }
        }
    }
}

fn chunk_ranges(trials: u64) -> Vec<(u64, u64)> {
    let mut ranges = Vec::with_capacity((trials / CHUNK + 1) as usize);
    let mut start = 0;
    while start < trials {
        let len = CHUNK.min(trials - start);
        ranges.push((start, len));
        start += len;
    }
    ranges
}

fn run_trials<F>(cfg: &SimConfig, eval: F) -> Result<Vec<u64>>
where
    F: Fn(&mut [f64], &TrialContext<'_>, &mut [bool]) + Sync,
{
    let ctx = TrialContext::new(cfg);
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let partials: Vec<Vec<u64>> = chunk_ranges(cfg.trials)
        .par_iter()
        .map(|&(start, len)| {
            let mut counts = vec![0u64; cfg.users];
            let mut gains = vec![0.0; cfg.users];
            let mut hit = vec![false; cfg.users];
            for trial in start..start + len {
                let mut rng = base.clone();
                rng.set_stream(trial);
                fill_gains(&cfg.geometry, &mut rng, &mut gains);
                eval(&mut gains, &ctx, &mut hit);
                for (c, h) in counts.iter_mut().zip(&hit) {
                    *c += *h as u64;
                }
            }
            counts
        })
        .collect();
    let mut totals = vec![0u64; cfg.users];
    for p in partials {
        for (t, v) in totals.iter_mut().zip(p) {
            *t += v;
        }
    }
    Ok(totals)
}

#[derive(Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }
}

fn run_rate_trials(cfg: &SimConfig) -> Result<Vec<(f64, f64)>> {
    let ctx = TrialContext::new(cfg);
    let base = ChaCha8Rng::seed_from_u64(cfg.seed);
    let partials: Vec<Vec<(f64, f64)>> = chunk_ranges(cfg.trials)
        .par_iter()
        .map(|&(start, len)| {
            let mut sums = vec![(Kahan::default(), Kahan::default()); cfg.users];
            let mut gains = vec![0.0; cfg.users];
            let mut rates = vec![0.0; cfg.users];
            for trial in start..start + len {
                let mut rng = base.clone();
                rng.set_stream(trial);
                fill_gains(&cfg.geometry, &mut rng, &mut gains);
                trial_rates(&ctx, &mut gains, &mut rates);
                for (s, r) in sums.iter_mut().zip(&rates) {
                    s.0.add(*r);
                    s.1.add(r * r);
                }
            }
            sums.into_iter().map(|(a, b)| (a.sum, b.sum)).collect()
        })
        .collect();
    // chunk order is fixed, so this reduction is worker-count independent
    let mut totals = vec![(Kahan::default(), Kahan::default()); cfg.users];
    for p in partials {
        for (t, (s, sq)) in totals.iter_mut().zip(p) {
            t.0.add(s);
            t.1.add(sq);
        }
    }
    Ok(totals.into_iter().map(|(a, b)| (a.sum, b.sum)).collect())
}
