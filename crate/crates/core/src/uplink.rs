//! Uplink analysis.
//!
//! Under OMA the uplink is the exact mirror of the downlink with the users'
//! transmit SNR in place of the base station's, so the OMA entry points here
//! delegate to the downlink closed forms. Under NOMA the base station decodes
//! the strongest user first and peels interference downward; closed forms are
//! available for the two-user case, split into three regimes by the strong
//! user's target: the self-interference crossover sits at exactly one
//! bit/s/Hz, because the strong user's gain exceeds the weak one's by
//! construction. General `M`-user uplink NOMA has no reduced closed form and
//! is covered by the Monte Carlo engine alone.

use crate::channel::GainDistribution;
use crate::downlink;
use crate::error::{Error, Result};
use crate::model::SystemGeometry;
use crate::quadrature::ChebyshevRule;
use std::f64::consts::LN_2;

/// Uplink OMA outage probability; identical to the downlink expression with
/// the uplink transmit SNR.
pub fn oma_outage_probability(
    geometry: &SystemGeometry,
    users: usize,
    target: f64,
    snr: f64,
) -> Result<f64> {
    Ok(downlink::OmaConfig::new(*geometry, users, target, snr)?.outage_probability())
}

/// Uplink OMA zero-outage SNR threshold.
pub fn oma_zero_outage_snr(geometry: &SystemGeometry, users: usize, target: f64) -> f64 {
    downlink::oma_zero_outage_snr(geometry, users, target)
}

/// Uplink OMA ergodic rate.
pub fn oma_ergodic_rate(geometry: &SystemGeometry, users: usize, snr: f64) -> f64 {
    downlink::oma_ergodic_rate(geometry, users, snr)
}

/// Uplink OMA ergodic-rate asymptote.
pub fn oma_ergodic_rate_asymptote(geometry: &SystemGeometry, users: usize, snr: f64) -> f64 {
    downlink::oma_ergodic_rate_asymptote(geometry, users, snr)
}

/// Position of the strong user's target relative to the one bit/s/Hz
/// crossover that separates the three outage regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetRegime {
    BelowOne,
    AtOne,
    AboveOne,
}

/// High-SNR behaviour of the two-user uplink NOMA outage probabilities
/// (both users share the same limit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticOutage {
    /// Outage is exactly zero for every SNR at or above `zero_snr`.
    VanishesBeyond { zero_snr: f64 },
    /// Outage follows `value` (a log-over-linear decay); `exponent` is the
    /// power of the SNR in the dominant factor, i.e. the log-log slope.
    PowerLawDecay { value: f64, exponent: f64 },
    /// Outage converges to the constant `value`.
    Floor { value: f64 },
}

/// Two-user uplink NOMA configuration. The weak user (rank 1) is decoded
/// last; the strong user (rank 2) is decoded first against the weak user's
/// interference.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaTwoUserConfig {
    gains: GainDistribution,
    target_weak: f64,
    target_strong: f64,
    snr: f64,
    rule: ChebyshevRule,
}

impl NomaTwoUserConfig {
    pub fn new(
        geometry: SystemGeometry,
        target_weak: f64,
        target_strong: f64,
        snr: f64,
        rule: ChebyshevRule,
    ) -> Result<Self> {
        if !(target_weak.is_finite() && target_weak > 0.0) {
            return Err(Error::InvalidConfig("weak-user target must be > 0"));
        }
        if !(target_strong.is_finite() && target_strong > 0.0) {
            return Err(Error::InvalidConfig("strong-user target must be > 0"));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidConfig("SNR must be finite and > 0"));
        }
        Ok(Self {
            gains: GainDistribution::new(geometry),
            target_weak,
            target_strong,
            snr,
            rule,
        })
    }

    pub fn gains(&self) -> &GainDistribution {
        &self.gains
    }

    pub fn geometry(&self) -> &SystemGeometry {
        self.gains.geometry()
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn targets(&self) -> (f64, f64) {
        (self.target_weak, self.target_strong)
    }

    pub fn rule(&self) -> &ChebyshevRule {
        &self.rule
    }

    /// Re-binds the configuration to a different transmit SNR.
    pub fn with_snr(&self, snr: f64) -> Result<Self> {
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidConfig("SNR must be finite and > 0"));
        }
        Ok(Self {
            snr,
            ..self.clone()
        })
    }

    /// Classifies the strong user's target against the crossover; the
    /// boundary sits exactly at `2^target == 2`.
    pub fn regime(&self) -> TargetRegime {
        let p = self.target_strong.exp2();
        if p < 2.0 {
            TargetRegime::BelowOne
        } else if p == 2.0 {
            TargetRegime::AtOne
        } else {
            TargetRegime::AboveOne
        }
    }

    /// Gain floor for the weak user's solo decode step:
    /// `(2^R_weak - 1)/rho`.
    pub fn weak_gain_floor(&self) -> f64 {
        (self.target_weak.exp2() - 1.0) / self.snr
    }

    /// Gain floor for the strong user's decode given the weak user's gain
    /// `y`: `(y + 1/rho)(2^R_strong - 1)`.
    pub fn strong_gain_floor(&self, y: f64) -> f64 {
        (y + 1.0 / self.snr) * (self.target_strong.exp2() - 1.0)
    }

    /// Crossover gain below which the strong user's floor exceeds the weak
    /// user's own gain: `(2^R - 1)/(rho (2 - 2^R))`. Signed as printed:
    /// positive below the crossover target, negative above it, undefined at
    /// the crossover itself.
    pub fn regime_constant(&self) -> Option<f64> {
        let p = self.target_strong.exp2();
        if p == 2.0 {
            None
        } else {
            Some((p - 1.0) / (self.snr * (2.0 - p)))
        }
    }

    /// Outage probability of the weak user (its own decode must succeed and
    /// so must the strong user's preceding SIC step).
    pub fn outage_weak_user(&self) -> f64 {
        self.outage_weak_user_raw().clamp(0.0, 1.0)
    }

    pub(crate) fn outage_weak_user_raw(&self) -> f64 {
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        let floor = self.weak_gain_floor();
        if floor >= b {
            return 1.0;
        }
        let threshold = |y: f64| self.strong_gain_floor(y);
        match self.regime() {
            TargetRegime::BelowOne => {
                let c = self.regime_constant().expect("off-crossover");
                let self_bound = ordering_mass(&self.gains, floor.max(c).max(a), b);
                let sic_bound =
                    threshold_mass(&self.gains, &self.rule, threshold, floor.max(a), b.min(c));
                1.0 - (self_bound + sic_bound)
            }
            TargetRegime::AtOne => {
                1.0 - threshold_mass(&self.gains, &self.rule, threshold, floor.max(a), b)
            }
            TargetRegime::AboveOne => {
                let c = self.regime_constant().expect("off-crossover");
                let self_bound = ordering_mass(&self.gains, floor.max(a), b.min(c));
                let sic_bound =
                    threshold_mass(&self.gains, &self.rule, threshold, floor.max(c).max(a), b);
                1.0 - (self_bound + sic_bound)
            }
        }
    }

    /// Outage probability of the strong user (only its own decode step,
    /// which runs first and sees the weak user as interference).
    pub fn outage_strong_user(&self) -> f64 {
        self.outage_strong_user_raw().clamp(0.0, 1.0)
    }

    pub(crate) fn outage_strong_user_raw(&self) -> f64 {
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        let threshold = |y: f64| self.strong_gain_floor(y);
        match self.regime() {
            TargetRegime::BelowOne => {
                let c = self.regime_constant().expect("off-crossover");
                let hi = b.min(c);
                ordering_mass(&self.gains, a, hi)
                    - threshold_mass(&self.gains, &self.rule, threshold, a, hi)
            }
            TargetRegime::AtOne => {
                1.0 - threshold_mass(&self.gains, &self.rule, threshold, a, b)
            }
            TargetRegime::AboveOne => {
                let c = self.regime_constant().expect("off-crossover");
                let lo = a.max(c);
                ordering_mass(&self.gains, lo, b)
                    - threshold_mass(&self.gains, &self.rule, threshold, lo, b)
            }
        }
    }

    /// High-SNR limit shared by both users' outage probabilities.
    ///
    /// Below the crossover the limit is an exact zero beyond a finite SNR
    /// (the reported threshold also covers the weak user's solo floor). At
    /// the crossover the outage decays as `ln(rho)/rho`. Above it both
    /// probabilities settle on a constant floor.
    pub fn asymptotic_outage(&self) -> AsymptoticOutage {
        let a = self.gains.min_gain();
        match self.regime() {
            TargetRegime::BelowOne => {
                let p = self.target_strong.exp2();
                let sic_zero = (p - 1.0) / (a * (2.0 - p));
                let solo_zero = (self.target_weak.exp2() - 1.0) / a;
                AsymptoticOutage::VanishesBeyond {
                    zero_snr: sic_zero.max(solo_zero),
                }
            }
            TargetRegime::AtOne => {
                let geometry = self.geometry();
                let d = geometry.waveguide_height();
                let room = geometry.room_side();
                let eta = geometry.path_gain_constant();
                let scale = 2.0 * d.powi(4) / (room * room * eta);
                AsymptoticOutage::PowerLawDecay {
                    value: scale * self.snr.ln() / self.snr,
                    exponent: -1.0,
                }
            }
            TargetRegime::AboveOne => {
                let b = self.gains.max_gain();
                let p = self.target_strong.exp2();
                let residual = threshold_mass(
                    &self.gains,
                    &self.rule,
                    |y: f64| y * (p - 1.0),
                    a,
                    b,
                );
                AsymptoticOutage::Floor {
                    value: (1.0 - residual).clamp(0.0, 1.0),
                }
            }
        }
    }

    /// Exact ergodic rate of the weak user,
    /// `E[log2(1 + rho Y_1)]` over the weaker of two gains.
    pub fn ergodic_rate_weak_user(&self) -> f64 {
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let room = geometry.room_side();
        let rho = self.snr;
        // antiderivative difference G(b) - G(a), grouped so the log terms
        // are differenced before any large products:
        //   G(b)-G(a) = ln1p(rho b)/b - ln1p(rho a)/a
        //             + rho ln1p((1/b - 1/a)/(1/a + rho))
        let direct = (rho * b).ln_1p() / b - (rho * a).ln_1p() / a;
        let ratio = (1.0 / b - 1.0 / a) / (1.0 / a + rho);
        let diff = direct + rho * ratio.ln_1p();
        -4.0 * eta / (room * room * LN_2) * diff
    }

    /// Closed form of the strong user's conditional log-rate mass given the
    /// weak user's gain `y`: the inner integral
    /// `int_y^b ln(1 + u/(y + 1/rho)) dF_Y(u)`.
    pub fn strong_rate_kernel(&self, y: f64) -> f64 {
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let d = geometry.waveguide_height();
        let room = geometry.room_side();
        let t = (eta / y - d * d).max(0.0).sqrt();
        let q = y + 1.0 / self.snr;
        let s = (eta / q + d * d).sqrt();
        2.0 / room * (y / q).ln_1p() * t + 4.0 / room * s * (t / s).atan()
            - 4.0 * d / room * (t / d).atan()
    }

    /// Ergodic rate of the strong user via the Chebyshev–Gauss rule applied
    /// to the kernel-weighted gain density.
    pub fn ergodic_rate_strong_user(&self) -> Result<f64> {
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        let integral = self
            .rule
            .integrate(|y| self.gains.pdf(y) * self.strong_rate_kernel(y), a, b)?;
        Ok(2.0 / LN_2 * integral)
    }

    /// High-SNR limit of [`Self::strong_rate_kernel`].
    pub fn strong_rate_kernel_limit(&self, y: f64) -> f64 {
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let d = geometry.waveguide_height();
        let room = geometry.room_side();
        let t = (eta / y - d * d).max(0.0).sqrt();
        let s = (eta / y + d * d).sqrt();
        2.0 * LN_2 / room * t + 4.0 / room * s * (t / s).atan() - 4.0 * d / room * (t / d).atan()
    }

    /// High-SNR asymptotes of both users' ergodic rates: the weak user's
    /// grows affinely in `ln(rho)`, the strong user's is an SNR-independent
    /// ceiling.
    pub fn ergodic_rate_asymptotes(&self) -> Result<(f64, f64)> {
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let room = geometry.room_side();
        let shift = a.ln() / a - b.ln() / b + 1.0 / a - 1.0 / b;
        let weak = 4.0 * eta / (room * room * LN_2)
            * ((1.0 / a - 1.0 / b) * self.snr.ln() + shift);
        let strong_integral = self
            .rule
            .integrate(|y| self.gains.pdf(y) * self.strong_rate_kernel_limit(y), a, b)?;
        Ok((weak, 2.0 / LN_2 * strong_integral))
    }

    /// High-SNR slope of the weak user's ergodic rate against `log2(rho)`:
    /// `(4 eta / D^2)(1/a - 1/b)`, which reduces to exactly one.
    pub fn weak_user_high_snr_slope(&self) -> f64 {
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let room = geometry.room_side();
        let a = self.gains.min_gain();
        let b = self.gains.max_gain();
        4.0 * eta / (room * room) * (1.0 / a - 1.0 / b)
    }
}

/// Joint-success mass whose binding constraint is the gain ordering itself:
/// `(4 eta / D^2) int_lo^hi dy / y^2 = (4 eta / D^2)(1/lo - 1/hi)`.
/// Zero when the interval is empty.
pub fn ordering_mass(gains: &GainDistribution, lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let geometry = gains.geometry();
    let eta = geometry.path_gain_constant();
    let room = geometry.room_side();
    4.0 * eta / (room * room) * (1.0 / lo - 1.0 / hi)
}

/// Joint mass whose binding constraint is a gain threshold `thr(y)` on the
/// stronger channel, integrated with the Chebyshev–Gauss rule:
///
/// ```text
/// (4 eta / D^2) int_lo^hi sqrt(eta/min(thr(y), b) - d^2)
///                         / (y^2 sqrt(eta/y - d^2)) dy
/// ```
///
/// Zero when the interval is empty.
pub fn threshold_mass<F: Fn(f64) -> f64>(
    gains: &GainDistribution,
    rule: &ChebyshevRule,
    thr: F,
    lo: f64,
    hi: f64,
) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    let geometry = gains.geometry();
    let eta = geometry.path_gain_constant();
    let d = geometry.waveguide_height();
    let room = geometry.room_side();
    let b = gains.max_gain();
    let integral = rule
        .integrate(
            |y| {
                let top = (eta / thr(y).min(b) - d * d).max(0.0).sqrt();
                let bottom = (eta / y - d * d).max(0.0).sqrt();
                top / (y * y * bottom)
            },
            lo,
            hi,
        )
        .expect("interval checked non-degenerate");
    4.0 * eta / (room * room) * integral
}

/// Plain integrand of [`threshold_mass`] (before the `4 eta / D^2` scale),
/// exposed so audits can compare the quadrature against an adaptive
/// reference.
pub fn threshold_mass_integrand<F: Fn(f64) -> f64>(
    gains: &GainDistribution,
    thr: F,
    y: f64,
) -> f64 {
    let geometry = gains.geometry();
    let eta = geometry.path_gain_constant();
    let d = geometry.waveguide_height();
    let b = gains.max_gain();
    let top = (eta / thr(y).min(b) - d * d).max(0.0).sqrt();
    let bottom = (eta / y - d * d).max(0.0).sqrt();
    top / (y * y * bottom)
}
