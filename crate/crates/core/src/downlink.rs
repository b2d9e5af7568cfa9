//! Downlink analysis: outage probability and ergodic rate for OMA (TDMA) and
//! power-domain NOMA, high-SNR asymptotes, and the zero-outage-threshold
//! comparison between the two schemes.
//!
//! OMA serves each user in its own slot at full power, so the per-user rate
//! is `(1/M) log2(1 + eta rho / Z)` with `Z` the squared PA-to-user distance.
//! NOMA superposes all users over the whole slot with per-user power fraction
//! `alpha_m` of `rho/M`; users are indexed by ascending channel gain and
//! decode the weaker users' signals first.

use crate::channel::{binomial, distance_sq_cdf, distance_sq_pdf, GainDistribution};
use crate::error::{Error, Result};
use crate::model::{NomaPowerAllocation, RateTargets, SystemGeometry};
use std::f64::consts::LN_2;

/// Downlink OMA configuration: `users` slots share the frame, every user has
/// the same spectral-efficiency target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmaConfig {
    geometry: SystemGeometry,
    users: usize,
    target: f64,
    snr: f64,
}

impl OmaConfig {
    pub fn new(geometry: SystemGeometry, users: usize, target: f64, snr: f64) -> Result<Self> {
        if users == 0 {
            return Err(Error::InvalidConfig("user count must be at least one"));
        }
        if !(target.is_finite() && target > 0.0) {
            return Err(Error::InvalidConfig("target must be finite and > 0"));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidConfig("SNR must be finite and > 0"));
        }
        Ok(Self {
            geometry,
            users,
            target,
            snr,
        })
    }

    pub fn geometry(&self) -> &SystemGeometry {
        &self.geometry
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Squared-distance threshold `beta = eta rho / (2^(M R) - 1)` below
    /// which the slot rate misses the target.
    fn distance_sq_threshold(&self) -> f64 {
        let eta = self.geometry.path_gain_constant();
        eta * self.snr / ((self.users as f64 * self.target).exp2() - 1.0)
    }

    /// Outage probability of any user (all users are statistically
    /// identical under OMA).
    pub fn outage_probability(&self) -> f64 {
        let beta = self.distance_sq_threshold();
        let (z_lo, z_hi) = self.geometry.distance_sq_support();
        if beta < z_lo {
            1.0
        } else if beta < z_hi {
            1.0 - distance_sq_cdf(&self.geometry, beta)
        } else {
            0.0
        }
    }

    /// Minimum transmit SNR at which the outage probability is exactly zero.
    pub fn zero_outage_snr(&self) -> f64 {
        oma_zero_outage_snr(&self.geometry, self.users, self.target)
    }

    /// Two additive parts of the scaled ergodic rate: the rate at the worst
    /// corner of the room (`log2(1 + eta rho / (d^2 + D^2/4))`) and the
    /// averaged excess above it. The ergodic rate is their sum over `M`.
    pub fn ergodic_rate_terms(&self) -> (f64, f64) {
        oma_rate_terms(&self.geometry, self.snr)
    }

    /// Exact ergodic rate of any user.
    pub fn ergodic_rate(&self) -> f64 {
        oma_ergodic_rate(&self.geometry, self.users, self.snr)
    }

    /// High-SNR asymptote of the ergodic rate, obtained as the literal limit
    /// of the averaged excess term (the `sqrt(d^2 + eta rho)`-scaled arctan
    /// term tends to `D/2`).
    pub fn ergodic_rate_asymptote(&self) -> f64 {
        oma_ergodic_rate_asymptote(&self.geometry, self.users, self.snr)
    }
}

fn oma_rate_terms(geometry: &SystemGeometry, snr: f64) -> (f64, f64) {
    let eta = geometry.path_gain_constant();
    let d = geometry.waveguide_height();
    let half = geometry.room_side() / 2.0;
    let (_, z_hi) = geometry.distance_sq_support();
    let corner = (eta * snr / z_hi).ln_1p() / LN_2;
    let root = (d * d + eta * snr).sqrt();
    let excess = 2.0 / (half * LN_2) * (root * (half / root).atan() - d * (half / d).atan());
    (corner, excess)
}

/// Exact OMA ergodic rate of any user (target-independent).
pub fn oma_ergodic_rate(geometry: &SystemGeometry, users: usize, snr: f64) -> f64 {
    let (corner, excess) = oma_rate_terms(geometry, snr);
    (corner + excess) / users as f64
}

/// High-SNR asymptote of the OMA ergodic rate.
pub fn oma_ergodic_rate_asymptote(geometry: &SystemGeometry, users: usize, snr: f64) -> f64 {
    let eta = geometry.path_gain_constant();
    let d = geometry.waveguide_height();
    let half = geometry.room_side() / 2.0;
    let (_, z_hi) = geometry.distance_sq_support();
    let corner = (eta * snr / z_hi).ln_1p() / LN_2;
    let excess = 2.0 / (half * LN_2) * (half - d * (half / d).atan());
    (corner + excess) / users as f64
}

/// Minimum transmit SNR at which the downlink OMA outage probability is
/// exactly zero: `(d^2 + D^2/4)(2^(M R) - 1)/eta`.
pub fn oma_zero_outage_snr(geometry: &SystemGeometry, users: usize, target: f64) -> f64 {
    let (_, z_hi) = geometry.distance_sq_support();
    z_hi * ((users as f64 * target).exp2() - 1.0) / geometry.path_gain_constant()
}

/// Minimum SNR for zero outage; `Never` marks a user whose target exceeds
/// its interference-limited rate ceiling and who therefore stays in outage
/// at every SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroOutageThreshold {
    Finite(f64),
    Never,
}

impl ZeroOutageThreshold {
    pub fn snr(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Never => None,
        }
    }
}

/// Jensen bracket on an ergodic rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErBounds {
    lower: f64,
    upper: f64,
}

impl ErBounds {
    /// The two bounds may coincide analytically; tolerate rounding of that
    /// order but reject genuinely inverted inputs.
    fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(
            lower <= upper + 1e-9 * (1.0 + upper.abs()),
            "inverted bounds: {lower} > {upper}"
        );
        Self {
            lower,
            upper: upper.max(lower),
        }
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Downlink NOMA configuration: per-user power fractions and targets indexed
/// by ascending channel rank.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaConfig {
    gains: GainDistribution,
    alloc: NomaPowerAllocation,
    targets: RateTargets,
    snr: f64,
}

impl NomaConfig {
    pub fn new(
        geometry: SystemGeometry,
        alloc: NomaPowerAllocation,
        targets: RateTargets,
        snr: f64,
    ) -> Result<Self> {
        if alloc.users() != targets.users() {
            return Err(Error::InvalidConfig(
                "allocation and targets must cover the same user count",
            ));
        }
        if !(snr.is_finite() && snr > 0.0) {
            return Err(Error::InvalidConfig("SNR must be finite and > 0"));
        }
        Ok(Self {
            gains: GainDistribution::new(geometry),
            alloc,
            targets,
            snr,
        })
    }

    pub fn users(&self) -> usize {
        self.alloc.users()
    }

    pub fn geometry(&self) -> &SystemGeometry {
        self.gains.geometry()
    }

    pub fn gains(&self) -> &GainDistribution {
        &self.gains
    }

    pub fn allocation(&self) -> &NomaPowerAllocation {
        &self.alloc
    }

    pub fn targets(&self) -> &RateTargets {
        &self.targets
    }

    pub fn snr(&self) -> f64 {
        self.snr
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

    /// Interference margin `alpha_k/(2^R_k - 1) - sum_{j>k} alpha_j` of the
    /// decode step for user `rank`. Positive iff the target lies below the
    /// interference-limited ceiling `log2(1 + alpha_k / sum_{j>k} alpha_j)`.
    fn decode_margin(&self, rank: usize) -> Result<f64> {
        let alpha = self.alloc.coefficient(rank)?;
        let residual = self.alloc.residual_after(rank)?;
        let target = self.targets.target(rank)?;
        Ok(alpha / (target.exp2() - 1.0) - residual)
    }

    /// Whether user `rank`'s own decode step can succeed at some SNR.
    pub fn is_feasible(&self, rank: usize) -> Result<bool> {
        Ok(self.decode_margin(rank)? > 0.0)
    }

    /// Gain threshold `eps_k = M / (rho * margin_k)` below which the decode
    /// of user `rank`'s signal fails; `None` if the user is infeasible.
    pub fn sic_gain_threshold(&self, rank: usize) -> Result<Option<f64>> {
        let margin = self.decode_margin(rank)?;
        if margin <= 0.0 {
            return Ok(None);
        }
        Ok(Some(self.users() as f64 / (self.snr * margin)))
    }

    /// Binding threshold `lambda_m = max{eps_1, ..., eps_m}`: user `rank` is
    /// in outage iff its gain falls below it. `None` if any user in the SIC
    /// prefix is infeasible.
    pub fn binding_gain_threshold(&self, rank: usize) -> Result<Option<f64>> {
        self.check_rank(rank)?;
        let mut lambda = 0.0f64;
        for k in 1..=rank {
            match self.sic_gain_threshold(k)? {
                Some(eps) => lambda = lambda.max(eps),
                None => return Ok(None),
            }
        }
        Ok(Some(lambda))
    }

    /// Outage probability of the user with channel rank `rank`.
    pub fn outage_probability(&self, rank: usize) -> Result<f64> {
        let lambda = match self.binding_gain_threshold(rank)? {
            Some(v) => v,
            None => return Ok(1.0),
        };
        if lambda < self.gains.min_gain() {
            Ok(0.0)
        } else if lambda < self.gains.max_gain() {
            self.gains.ordered_cdf(self.users(), rank, lambda)
        } else {
            Ok(1.0)
        }
    }

    /// Minimum SNR with zero outage for user `rank`:
    /// `((d^2 + D^2/4)/eta) max{gamma_1..gamma_m}` with
    /// `gamma_k = M / margin_k`.
    pub fn zero_outage_snr(&self, rank: usize) -> Result<ZeroOutageThreshold> {
        self.check_rank(rank)?;
        let mut worst = 0.0f64;
        for k in 1..=rank {
            let margin = self.decode_margin(k)?;
            if margin <= 0.0 {
                return Ok(ZeroOutageThreshold::Never);
            }
            worst = worst.max(self.users() as f64 / margin);
        }
        let (_, z_hi) = self.geometry().distance_sq_support();
        Ok(ZeroOutageThreshold::Finite(
            z_hi * worst / self.geometry().path_gain_constant(),
        ))
    }

    /// Jensen bracket on the ergodic rate of user `rank`'s own-signal decode
    /// step.
    pub fn er_bounds(&self, rank: usize) -> Result<ErBounds> {
        self.check_rank(rank)?;
        let users = self.users();
        let m_f = users as f64;
        let geometry = self.geometry();
        let eta = geometry.path_gain_constant();
        let d = geometry.waveguide_height();
        let room = geometry.room_side();
        let half = room / 2.0;
        let alpha = self.alloc.coefficient(rank)?;
        let residual = self.alloc.residual_after(rank)?;
        let comb = binomial(users - 1, rank - 1);
        let pow_factor = (2.0 / room).powi((users - rank + 1) as i32);

        // upper bound: expectation moved inside the concave rate
        let zeta = (d * d + eta * self.snr * residual / m_f).sqrt();
        let mut mean_kernel = 0.0;
        for k in 0..rank {
            mean_kernel += binomial(rank - 1, k)
                * (-2.0 / room).powi(k as i32)
                * half_span_moment(room, zeta, (users - rank + k) as u32);
        }
        let mean_sinr_scale = eta * self.snr * alpha * comb * pow_factor;
        let upper = (mean_sinr_scale * mean_kernel).ln_1p() / LN_2;

        // lower bound: harmonic-mean route through E[1/gain]
        let mut inv_kernel = 0.0;
        for k in 0..rank {
            let n = (users - rank + k) as i32;
            inv_kernel += binomial(rank - 1, k)
                * (-2.0 / room).powi(k as i32)
                * (half.powi(n + 3) / (n + 3) as f64 + d * d * half.powi(n + 1) / (n + 1) as f64);
        }
        let mean_inverse_gain = m_f / eta * comb * pow_factor * inv_kernel;
        let lower = (self.snr * alpha / (self.snr * residual + m_f * mean_inverse_gain)).ln_1p()
            / LN_2;

        Ok(ErBounds::new(lower, upper))
    }

    /// High-SNR limits of the Jensen bracket. For the strongest user the
    /// bounds keep growing with `log2(rho)`; every other user saturates at an
    /// interference-limited ceiling.
    pub fn er_asymptotic_bounds(&self, rank: usize) -> Result<ErBounds> {
        self.check_rank(rank)?;
        let users = self.users();
        if rank == users {
            // residual interference vanishes, so the finite-SNR bracket is
            // already in its asymptotic form
            return self.er_bounds(rank);
        }
        let alpha = self.alloc.coefficient(rank)?;
        let residual = self.alloc.residual_after(rank)?;
        let comb = binomial(users - 1, rank - 1);
        let mut beta_sum = 0.0;
        for k in 0..rank {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            beta_sum += sign * binomial(rank - 1, k) / (users - rank + k + 1) as f64;
        }
        let ceiling_gain = users as f64 * comb * beta_sum;
        let upper = (alpha * ceiling_gain / residual).ln_1p() / LN_2;
        let lower = (alpha / residual).ln_1p() / LN_2;
        // the ceiling gain is exactly one analytically; rounding may land a
        // hair on either side, which ErBounds::new tolerates
        if upper >= lower {
            Ok(ErBounds::new(lower, upper))
        } else {
            Ok(ErBounds::new(upper, lower))
        }
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if rank == 0 || rank > self.users() {
            return Err(Error::RankOutOfRange {
                rank,
                users: self.users(),
            });
        }
        Ok(())
    }
}

/// Exact value of `int_0^{D/2} t^n / (t^2 + zeta^2) dt` via the parity
/// reduction of the integrand (polynomial division plus an arctan or log
/// tail).
pub fn half_span_moment(room_side: f64, zeta: f64, n: u32) -> f64 {
    debug_assert!(room_side > 0.0 && zeta > 0.0);
    let h = room_side / 2.0;
    let l = (n / 2) as i32;
    let mut sum = 0.0;
    if n % 2 == 0 {
        for r in 0..l {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let p = 2 * (l - r) - 1;
            sum += sign * zeta.powi(2 * r) * h.powi(p) / p as f64;
        }
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        sum + sign * zeta.powi(2 * l - 1) * (h / zeta).atan()
    } else {
        for r in 0..l {
            let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
            let p = 2 * (l - r);
            sum += sign * zeta.powi(2 * r) * h.powi(p) / p as f64;
        }
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        sum + sign * zeta.powi(2 * l) / 2.0 * ((h * h) / (zeta * zeta)).ln_1p()
    }
}

/// Which scheme reaches zero outage first, judged by the per-user minimum
/// zero-outage SNRs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComparisonVerdict {
    /// OMA's threshold lies strictly below every NOMA user's threshold.
    OmaFirst,
    /// A leading group of NOMA users (always including the weakest) reaches
    /// zero outage no later than OMA while the rest reach it later.
    NomaPartial,
    /// The per-user comparisons are heterogeneous in rank order; only
    /// possible with unequal per-user targets.
    Mixed,
    /// Some NOMA user can never reach its target.
    PerpetualOutage,
}

impl std::fmt::Display for ComparisonVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::OmaFirst => "oma-first",
            Self::NomaPartial => "noma-partial",
            Self::Mixed => "mixed",
            Self::PerpetualOutage => "perpetual-outage",
        };
        f.write_str(s)
    }
}

/// Zero-outage thresholds of both schemes plus the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeComparison {
    pub oma_threshold_snr: f64,
    pub noma_threshold_snr: Vec<ZeroOutageThreshold>,
    pub verdict: ComparisonVerdict,
}

/// Compares downlink OMA (every user at `oma_target`) against the NOMA
/// configuration by zero-outage SNR thresholds.
///
/// The ordering in which *all* NOMA users beat OMA cannot occur for feasible
/// targets; it is reported as [`Error::UnreachableComparison`].
pub fn compare_zero_outage(cfg: &NomaConfig, oma_target: f64) -> Result<SchemeComparison> {
    if !(oma_target.is_finite() && oma_target > 0.0) {
        return Err(Error::InvalidConfig("OMA target must be finite and > 0"));
    }
    let users = cfg.users();
    let oma_threshold_snr = oma_zero_outage_snr(cfg.geometry(), users, oma_target);
    let noma_threshold_snr: Vec<ZeroOutageThreshold> = (1..=users)
        .map(|m| cfg.zero_outage_snr(m))
        .collect::<Result<_>>()?;
    if noma_threshold_snr
        .iter()
        .any(|t| matches!(t, ZeroOutageThreshold::Never))
    {
        return Ok(SchemeComparison {
            oma_threshold_snr,
            noma_threshold_snr,
            verdict: ComparisonVerdict::PerpetualOutage,
        });
    }
    let beats: Vec<bool> = noma_threshold_snr
        .iter()
        .map(|t| t.snr().expect("finite by the check above") <= oma_threshold_snr)
        .collect();
    let wins = beats.iter().filter(|b| **b).count();
    let verdict = if wins == 0 {
        ComparisonVerdict::OmaFirst
    } else if wins == users {
        return Err(Error::UnreachableComparison);
    } else if beats[..wins].iter().all(|b| *b) {
        ComparisonVerdict::NomaPartial
    } else {
        ComparisonVerdict::Mixed
    };
    Ok(SchemeComparison {
        oma_threshold_snr,
        noma_threshold_snr,
        verdict,
    })
}

/// Defining integrand of the OMA ergodic rate, exposed for oracle checks:
/// `(1/M) log2(1 + eta rho / z) f_Z(z)`.
pub fn oma_rate_integrand(geometry: &SystemGeometry, users: usize, snr: f64, z: f64) -> f64 {
    let eta = geometry.path_gain_constant();
    (eta * snr / z).ln_1p() / LN_2 / users as f64 * distance_sq_pdf(geometry, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SnrGrid;
    use crate::quadrature::integrate_adaptive;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn geometry() -> SystemGeometry {
        SystemGeometry::new(20.0, 5.0, 10.0e9).unwrap()
    }

    fn two_user_noma(snr: f64) -> NomaConfig {
        NomaConfig::new(
            geometry(),
            NomaPowerAllocation::new(vec![0.8, 0.2]).unwrap(),
            RateTargets::from_spectral_efficiencies(vec![0.5, 0.5]).unwrap(),
            snr,
        )
        .unwrap()
    }

    #[test]
    fn oma_outage_branches() {
        let g = geometry();
        let eta = g.path_gain_constant();
        // engineered SNRs that land beta below, inside, and above the support
        let cfg = OmaConfig::new(g, 2, 0.5, 24.0 / eta).unwrap();
        assert_eq!(cfg.outage_probability(), 1.0);
        let cfg = OmaConfig::new(g, 2, 0.5, 75.0 / eta).unwrap();
        assert_relative_eq!(
            cfg.outage_probability(),
            1.0 - 2.0 * 50f64.sqrt() / 20.0,
            max_relative = 1e-12
        );
        let cfg = OmaConfig::new(g, 2, 0.5, 125.0 / eta).unwrap();
        assert_eq!(cfg.outage_probability(), 0.0);
    }

    #[test]
    fn oma_zero_outage_threshold_value() {
        let g = geometry();
        let t = oma_zero_outage_snr(&g, 2, 0.5);
        assert_relative_eq!(t, 2.1933e7, max_relative = 1e-4);
        assert_abs_diff_eq!(10.0 * t.log10(), 73.41, epsilon = 0.01);
        // exactly zero at the threshold, positive just below it
        let cfg = OmaConfig::new(g, 2, 0.5, t).unwrap();
        assert_eq!(cfg.outage_probability(), 0.0);
        let cfg = OmaConfig::new(g, 2, 0.5, 0.99 * t).unwrap();
        assert!(cfg.outage_probability() > 0.0);
    }

    #[test]
    fn oma_zero_outage_threshold_scalings() {
        let g = geometry();
        // vanishing target
        assert_abs_diff_eq!(oma_zero_outage_snr(&g, 2, 1e-12), 0.0, epsilon = 1e-2);
        // doubling M at target 0.5 turns 2^1-1 = 1 into 2^2-1 = 3
        let t2 = oma_zero_outage_snr(&g, 2, 0.5);
        let t4 = oma_zero_outage_snr(&g, 4, 0.5);
        assert_relative_eq!(t4, 3.0 * t2, max_relative = 1e-12);
    }

    #[test]
    fn oma_rate_vanishes_at_low_snr() {
        let cfg = OmaConfig::new(geometry(), 2, 0.5, 1e-15).unwrap();
        assert!(cfg.ergodic_rate() < 1e-12);
    }

    #[test]
    fn oma_rate_is_inverse_in_users() {
        let snr = SnrGrid::db_to_linear(60.0);
        let two = OmaConfig::new(geometry(), 2, 0.5, snr).unwrap();
        let five = OmaConfig::new(geometry(), 5, 0.5, snr).unwrap();
        assert_relative_eq!(
            five.ergodic_rate(),
            two.ergodic_rate() * 2.0 / 5.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn oma_rate_matches_defining_integral() {
        // oracle: adaptive quadrature of the defining integral
        let g = geometry();
        let snr = SnrGrid::db_to_linear(60.0);
        let cfg = OmaConfig::new(g, 2, 0.5, snr).unwrap();
        let (z_lo, z_hi) = g.distance_sq_support();
        let oracle =
            integrate_adaptive(|z| oma_rate_integrand(&g, 2, snr, z), z_lo, z_hi, 1e-10).unwrap();
        assert_abs_diff_eq!(cfg.ergodic_rate(), oracle, epsilon = 1e-8);
    }

    #[test]
    fn oma_asymptote_closes_in_at_high_snr() {
        let g = geometry();
        for (expect_gap, db) in [(1e-3, 120.0)] {
            let cfg = OmaConfig::new(g, 2, 0.5, SnrGrid::db_to_linear(db)).unwrap();
            let gap = (cfg.ergodic_rate() - cfg.ergodic_rate_asymptote()).abs();
            assert!(gap <= expect_gap, "gap {gap} at {db} dB");
        }
        // gap shrinks monotonically beyond 100 dB
        let mut last = f64::INFINITY;
        for db in [100.0, 105.0, 110.0, 115.0, 120.0] {
            let cfg = OmaConfig::new(g, 2, 0.5, SnrGrid::db_to_linear(db)).unwrap();
            let gap = (cfg.ergodic_rate() - cfg.ergodic_rate_asymptote()).abs();
            assert!(gap < last);
            last = gap;
        }
    }

    #[test]
    fn oma_asymptote_slope_is_inverse_users() {
        let g = geometry();
        for users in [2usize, 5] {
            let lo = OmaConfig::new(g, users, 0.5, SnrGrid::db_to_linear(110.0)).unwrap();
            let hi = OmaConfig::new(g, users, 0.5, SnrGrid::db_to_linear(120.0)).unwrap();
            let dlog2rho = (SnrGrid::db_to_linear(120.0) / SnrGrid::db_to_linear(110.0)).log2();
            let slope =
                (hi.ergodic_rate_asymptote() - lo.ergodic_rate_asymptote()) / dlog2rho;
            assert_relative_eq!(slope, 1.0 / users as f64, max_relative = 1e-3);
        }
    }

    #[test]
    fn oma_excess_term_limit_for_vanishing_height() {
        // d -> 0 with D fixed: the excess term tends to 2/ln 2
        let g = SystemGeometry::new(20.0, 1e-9, 10.0e9).unwrap();
        let cfg = OmaConfig::new(g, 1, 0.5, 1.0).unwrap();
        let eta = g.path_gain_constant();
        let d = g.waveguide_height();
        let half = g.room_side() / 2.0;
        let _ = (eta, d, half);
        let asym_excess = {
            let corner = (eta * 1.0 / (d * d + half * half)).ln_1p() / LN_2;
            cfg.ergodic_rate_asymptote() - corner
        };
        assert_relative_eq!(asym_excess, 2.0 / LN_2, max_relative = 1e-6);
    }

    #[test]
    fn noma_outage_branches_and_feasibility() {
        // enormous SNR pushes the binding threshold below the support
        let cfg = two_user_noma(1e30);
        assert_eq!(cfg.outage_probability(1).unwrap(), 0.0);
        assert_eq!(cfg.outage_probability(2).unwrap(), 0.0);

        // infeasible target for user 1: R1 above log2(1 + 0.8/0.2)
        let infeasible = NomaConfig::new(
            geometry(),
            NomaPowerAllocation::new(vec![0.8, 0.2]).unwrap(),
            RateTargets::from_spectral_efficiencies(vec![2.4, 0.5]).unwrap(),
            1e8,
        )
        .unwrap();
        assert!(!infeasible.is_feasible(1).unwrap());
        assert_eq!(infeasible.outage_probability(1).unwrap(), 1.0);
        // user 2 decodes user 1 first, so it inherits the failure
        assert_eq!(infeasible.outage_probability(2).unwrap(), 1.0);
        assert_eq!(
            infeasible.zero_outage_snr(2).unwrap(),
            ZeroOutageThreshold::Never
        );
        assert!(infeasible.outage_probability(3).is_err());
    }

    #[test]
    fn noma_thresholds_match_hand_arithmetic() {
        let cfg = two_user_noma(1.0);
        let u = 0.5f64.exp2() - 1.0;
        let gamma1 = 2.0 / (0.8 / u - 0.2);
        let gamma2 = 2.0 / (0.2 / u);
        let (_, z_hi) = cfg.geometry().distance_sq_support();
        let eta = cfg.geometry().path_gain_constant();
        let t1 = cfg.zero_outage_snr(1).unwrap().snr().unwrap();
        let t2 = cfg.zero_outage_snr(2).unwrap().snr().unwrap();
        assert_relative_eq!(t1, z_hi * gamma1 / eta, max_relative = 1e-12);
        assert_relative_eq!(t2, z_hi * gamma1.max(gamma2) / eta, max_relative = 1e-12);
        assert!(gamma2 > gamma1);
    }

    #[test]
    fn noma_single_user_reduces_to_oma() {
        let g = geometry();
        let cfg = NomaConfig::new(
            g,
            NomaPowerAllocation::new(vec![1.0]).unwrap(),
            RateTargets::from_spectral_efficiencies(vec![0.5]).unwrap(),
            1.0,
        )
        .unwrap();
        let oma = oma_zero_outage_snr(&g, 1, 0.5);
        assert_relative_eq!(
            cfg.zero_outage_snr(1).unwrap().snr().unwrap(),
            oma,
            max_relative = 1e-12
        );
    }

    #[test]
    fn noma_margin_collapses_as_target_approaches_ceiling() {
        // gamma_1 grows without bound as R1 -> log2(1 + alpha_1/residual)
        let g = geometry();
        let ceiling = (1.0f64 + 0.8 / 0.2).log2();
        let mut last = 0.0;
        for delta in [1e-2, 1e-4, 1e-6] {
            let cfg = NomaConfig::new(
                g,
                NomaPowerAllocation::new(vec![0.8, 0.2]).unwrap(),
                RateTargets::from_spectral_efficiencies(vec![ceiling - delta, 0.5]).unwrap(),
                1.0,
            )
            .unwrap();
            let t = cfg.zero_outage_snr(1).unwrap().snr().unwrap();
            assert!(t > last);
            last = t;
        }
        assert!(last > 1e12);
    }

    #[test]
    fn half_span_moment_reference_values() {
        // n = 0: arctan kernel
        let zeta = 3.0;
        assert_relative_eq!(
            half_span_moment(20.0, zeta, 0),
            (10.0 / zeta).atan() / zeta,
            max_relative = 1e-14
        );
        // n = 1, zeta = 1, D = 20: ln(101)/2
        assert_relative_eq!(
            half_span_moment(20.0, 1.0, 1),
            0.5 * 101f64.ln(),
            max_relative = 1e-14
        );
        // n = 3, zeta = 2: adaptive oracle
        let oracle =
            integrate_adaptive(|t| t.powi(3) / (t * t + 4.0), 0.0, 10.0, 1e-12).unwrap();
        assert_abs_diff_eq!(half_span_moment(20.0, 2.0, 3), oracle, epsilon = 1e-10);
        // and the hand antiderivative D^2/8 - (zeta^2/2) ln(1 + D^2/(4 zeta^2))
        assert_relative_eq!(
            half_span_moment(20.0, 2.0, 3),
            50.0 - 2.0 * (1.0f64 + 25.0).ln(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn half_span_moment_matches_adaptive_across_orders() {
        for n in 0..=8u32 {
            for zeta in [0.5, 1.0, 2.0, 10.0] {
                let oracle = integrate_adaptive(
                    |t| t.powi(n as i32) / (t * t + zeta * zeta),
                    0.0,
                    10.0,
                    1e-13,
                )
                .unwrap();
                let closed = half_span_moment(20.0, zeta, n);
                assert_abs_diff_eq!(closed, oracle, epsilon = 1e-10 * (1.0 + oracle.abs()));
            }
        }
    }

    #[test]
    fn er_bounds_bracket_single_user_exact_rate() {
        let g = geometry();
        for db in [20.0, 40.0, 60.0, 80.0, 100.0] {
            let snr = SnrGrid::db_to_linear(db);
            let noma = NomaConfig::new(
                g,
                NomaPowerAllocation::new(vec![1.0]).unwrap(),
                RateTargets::from_spectral_efficiencies(vec![0.5]).unwrap(),
                snr,
            )
            .unwrap();
            let bounds = noma.er_bounds(1).unwrap();
            let exact = OmaConfig::new(g, 1, 0.5, snr).unwrap().ergodic_rate();
            assert!(
                bounds.contains(exact),
                "{db} dB: {exact} outside [{}, {}]",
                bounds.lower(),
                bounds.upper()
            );
        }
    }

    #[test]
    fn er_asymptotic_ceiling_for_weak_user() {
        let cfg = two_user_noma(SnrGrid::db_to_linear(100.0));
        let bounds = cfg.er_asymptotic_bounds(1).unwrap();
        // log2(1 + 0.8/0.2) = log2(5)
        assert_relative_eq!(bounds.lower(), 5f64.log2(), max_relative = 1e-12);
        // the ceiling gain is analytically one, so both bounds coincide
        assert_abs_diff_eq!(bounds.upper(), bounds.lower(), epsilon = 1e-9);
        // rho-independent
        let again = two_user_noma(SnrGrid::db_to_linear(120.0))
            .er_asymptotic_bounds(1)
            .unwrap();
        assert_abs_diff_eq!(again.lower(), bounds.lower(), epsilon = 0.0);
    }

    #[test]
    fn er_asymptotic_slopes() {
        let lo_db = 110.0;
        let hi_db = 120.0;
        let dlog2rho = (SnrGrid::db_to_linear(hi_db) / SnrGrid::db_to_linear(lo_db)).log2();
        let lo = two_user_noma(SnrGrid::db_to_linear(lo_db));
        let hi = two_user_noma(SnrGrid::db_to_linear(hi_db));
        // strongest user: unit slope on the lower asymptote
        let slope = (hi.er_asymptotic_bounds(2).unwrap().lower()
            - lo.er_asymptotic_bounds(2).unwrap().lower())
            / dlog2rho;
        assert_relative_eq!(slope, 1.0, max_relative = 1e-3);
        // weak user: flat
        let slope = (hi.er_asymptotic_bounds(1).unwrap().lower()
            - lo.er_asymptotic_bounds(1).unwrap().lower())
            / dlog2rho;
        assert_abs_diff_eq!(slope, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn comparison_two_user_case() {
        // equal targets of 0.5 put OMA strictly first
        let cfg = two_user_noma(1.0);
        let cmp = compare_zero_outage(&cfg, 0.5).unwrap();
        assert_eq!(cmp.verdict, ComparisonVerdict::OmaFirst);
        assert!(cmp.noma_threshold_snr.len() == 2);
        assert!(cmp.oma_threshold_snr < cmp.noma_threshold_snr[0].snr().unwrap());
    }

    #[test]
    fn comparison_three_user_case() {
        let cfg = NomaConfig::new(
            geometry(),
            NomaPowerAllocation::new(vec![0.80, 0.16, 0.04]).unwrap(),
            RateTargets::from_spectral_efficiencies(vec![1.5, 1.5, 1.5]).unwrap(),
            1.0,
        )
        .unwrap();
        let cmp = compare_zero_outage(&cfg, 1.5).unwrap();
        assert_eq!(cmp.verdict, ComparisonVerdict::NomaPartial);
        // the weakest user reaches zero outage before OMA, the others after
        assert!(cmp.noma_threshold_snr[0].snr().unwrap() <= cmp.oma_threshold_snr);
        assert!(cmp.noma_threshold_snr[1].snr().unwrap() > cmp.oma_threshold_snr);
        assert!(cmp.noma_threshold_snr[2].snr().unwrap() > cmp.oma_threshold_snr);
    }

    #[test]
    fn comparison_boundary_resolves_to_noma_partial() {
        // bisect the equal-target boundary between the two verdicts for
        // M = 3 and check the labels just on either side of it
        let alloc = NomaPowerAllocation::new(vec![0.80, 0.16, 0.04]).unwrap();
        let make = |target: f64| {
            NomaConfig::new(
                geometry(),
                alloc.clone(),
                RateTargets::from_spectral_efficiencies(vec![target, target, target]).unwrap(),
                1.0,
            )
            .unwrap()
        };
        let crossing = |target: f64| {
            let cfg = make(target);
            let cmp = compare_zero_outage(&cfg, target).unwrap();
            cmp.verdict == ComparisonVerdict::NomaPartial
        };
        // the equal-target boundary for this allocation sits near 0.41
        let (mut lo, mut hi) = (0.2, 0.5);
        assert!(!crossing(lo) && crossing(hi));
        for _ in 0..60 {
            let mid = (lo + hi) / 2.0;
            if crossing(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!(!crossing(lo));
        assert!(crossing(hi));
        assert!(hi - lo <= 1e-15);
    }

    #[test]
    fn comparison_flags_perpetual_outage() {
        let cfg = NomaConfig::new(
            geometry(),
            NomaPowerAllocation::new(vec![0.8, 0.2]).unwrap(),
            RateTargets::from_spectral_efficiencies(vec![3.0, 0.5]).unwrap(),
            1.0,
        )
        .unwrap();
        let cmp = compare_zero_outage(&cfg, 0.5).unwrap();
        assert_eq!(cmp.verdict, ComparisonVerdict::PerpetualOutage);
    }
}
