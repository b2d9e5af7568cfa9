//! Shared domain types: deployment geometry, NOMA power allocation, rate
//! targets, and transmit-SNR grids.

use crate::error::{Error, Result};

/// Speed of light in m/s.
pub const LIGHTSPEED: f64 = 3.0e8;

/// Deployment geometry of the pinching-antenna system.
///
/// Each of the `M` users sits in its own square room of side `room_side`
/// (meters). The waveguide runs along the ceiling over the centerline of the
/// rooms at height `waveguide_height` above the floor, and each PA slides to
/// the position on the waveguide closest to its user. The residual PA-to-user
/// distance is therefore `sqrt(offset^2 + height^2)` where `offset` is the
/// user's lateral distance from the waveguide, uniform on
/// `[-room_side/2, room_side/2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemGeometry {
    room_side: f64,
    waveguide_height: f64,
    carrier_freq: f64,
}

impl SystemGeometry {
    /// Builds a geometry from the room side length (m), waveguide height (m)
    /// and carrier frequency (Hz).
    pub fn new(room_side: f64, waveguide_height: f64, carrier_freq: f64) -> Result<Self> {
        if !(room_side.is_finite() && room_side > 0.0) {
            return Err(Error::InvalidGeometry("room side must be finite and > 0"));
        }
        if !(waveguide_height.is_finite() && waveguide_height > 0.0) {
            return Err(Error::InvalidGeometry(
                "waveguide height must be finite and > 0",
            ));
        }
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::InvalidGeometry(
                "carrier frequency must be finite and > 0",
            ));
        }
        Ok(Self {
            room_side,
            waveguide_height,
            carrier_freq,
        })
    }

    /// Room side length `D` in meters.
    pub fn room_side(&self) -> f64 {
        self.room_side
    }

    /// Waveguide height `d` in meters.
    pub fn waveguide_height(&self) -> f64 {
        self.waveguide_height
    }

    /// Carrier frequency in Hz.
    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    /// Free-space path-gain constant `eta = c^2 / (16 pi^2 fc^2)` in m².
    ///
    /// The channel gain of a user at distance `r` from its PA is `eta / r^2`.
    pub fn path_gain_constant(&self) -> f64 {
        let c_over_f = LIGHTSPEED / self.carrier_freq;
        c_over_f * c_over_f / (16.0 * std::f64::consts::PI * std::f64::consts::PI)
    }

    /// Support `[d^2, d^2 + D^2/4]` of the squared PA-to-user distance, in m².
    pub fn distance_sq_support(&self) -> (f64, f64) {
        let lo = self.waveguide_height * self.waveguide_height;
        let half = self.room_side / 2.0;
        (lo, lo + half * half)
    }

    /// Support `[eta/(d^2 + D^2/4), eta/d^2]` of the channel gain.
    pub fn gain_support(&self) -> (f64, f64) {
        let eta = self.path_gain_constant();
        let (z_lo, z_hi) = self.distance_sq_support();
        (eta / z_hi, eta / z_lo)
    }
}

/// Power allocation coefficients for downlink NOMA, ordered weakest user
/// first: `alpha_1 > alpha_2 > ... > alpha_M > 0` with unit sum.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaPowerAllocation {
    alphas: Vec<f64>,
    // suffix[m] = sum of alphas[m..]; suffix[M] = 0
    suffix: Vec<f64>,
}

impl NomaPowerAllocation {
    /// Validates and stores the coefficients. The sum must equal one within
    /// an absolute tolerance of 1e-12.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::InvalidAllocation("at least one coefficient"));
        }
        if alphas.iter().any(|a| !a.is_finite() || *a <= 0.0) {
            return Err(Error::InvalidAllocation(
                "coefficients must be finite and > 0",
            ));
        }
        if alphas.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidAllocation(
                "coefficients must be strictly decreasing",
            ));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidAllocation("coefficients must sum to one"));
        }
        let mut suffix = vec![0.0; alphas.len() + 1];
        for m in (0..alphas.len()).rev() {
            suffix[m] = suffix[m + 1] + alphas[m];
        }
        Ok(Self { alphas, suffix })
    }

    /// Number of users `M`.
    pub fn users(&self) -> usize {
        self.alphas.len()
    }

    /// Coefficient of the user with channel rank `rank` (1-based).
    pub fn coefficient(&self, rank: usize) -> Result<f64> {
        self.check_rank(rank)?;
        Ok(self.alphas[rank - 1])
    }

    /// Sum of the coefficients of all users stronger than `rank`, i.e.
    /// `sum_{j>rank} alpha_j`. Zero for the strongest user.
    pub fn residual_after(&self, rank: usize) -> Result<f64> {
        self.check_rank(rank)?;
        Ok(self.suffix[rank])
    }

    /// All coefficients, weakest user first.
    pub fn coefficients(&self) -> &[f64] {
        &self.alphas
    }

    fn check_rank(&self, rank: usize) -> Result<()> {
        if rank == 0 || rank > self.alphas.len() {
            return Err(Error::RankOutOfRange {
                rank,
                users: self.alphas.len(),
            });
        }
        Ok(())
    }
}

/// Per-user target spectral efficiencies in bits/s/Hz.
///
/// Throughput targets quoted in Mbps are normalized by the system bandwidth:
/// a target of `R` Mbps over `B` MHz is `R / B` bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTargets {
    targets: Vec<f64>,
}

impl RateTargets {
    /// Builds targets already expressed in bits/s/Hz.
    pub fn from_spectral_efficiencies(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidTargets("at least one target"));
        }
        if targets.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidTargets("targets must be finite and > 0"));
        }
        Ok(Self { targets })
    }

    /// Builds targets from throughputs in Mbps and a bandwidth in MHz.
    pub fn from_throughput_mbps(targets_mbps: Vec<f64>, bandwidth_mhz: f64) -> Result<Self> {
        if !(bandwidth_mhz.is_finite() && bandwidth_mhz > 0.0) {
            return Err(Error::InvalidTargets("bandwidth must be finite and > 0"));
        }
        Self::from_spectral_efficiencies(
            targets_mbps.into_iter().map(|t| t / bandwidth_mhz).collect(),
        )
    }

    /// Number of users covered by these targets.
    pub fn users(&self) -> usize {
        self.targets.len()
    }

    /// Target of the user with channel rank `rank` (1-based), in bits/s/Hz.
    pub fn target(&self, rank: usize) -> Result<f64> {
        if rank == 0 || rank > self.targets.len() {
            return Err(Error::RankOutOfRange {
                rank,
                users: self.targets.len(),
            });
        }
        Ok(self.targets[rank - 1])
    }

    /// All targets, weakest user first.
    pub fn as_slice(&self) -> &[f64] {
        &self.targets
    }
}

/// A strictly increasing sweep of transmit SNR values in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    points_db: Vec<f64>,
}

impl SnrGrid {
    pub fn new(points_db: Vec<f64>) -> Result<Self> {
        if points_db.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidSnrGrid("points must be finite"));
        }
        if points_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSnrGrid("points must be strictly increasing"));
        }
        Ok(Self { points_db })
    }

    /// Evenly spaced grid with `count` points from `start_db` to `stop_db`
    /// inclusive.
    pub fn linspace(start_db: f64, stop_db: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidSnrGrid("linspace needs at least two points"));
        }
        let step = (stop_db - start_db) / (count - 1) as f64;
        Self::new(
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        stop_db
                    } else {
                        start_db + step * i as f64
                    }
                })
                .collect(),
        )
    }

    /// Converts a dB value to linear scale: `rho = 10^(dB/10)`.
    pub fn db_to_linear(db: f64) -> f64 {
        10f64.powf(db / 10.0)
    }

    pub fn points_db(&self) -> &[f64] {
        &self.points_db
    }

    /// Iterates over `(dB, linear)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points_db
            .iter()
            .map(|&db| (db, Self::db_to_linear(db)))
    }

    pub fn len(&self) -> usize {
        self.points_db.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points_db.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn table_geometry() -> SystemGeometry {
        SystemGeometry::new(20.0, 5.0, 10.0e9).unwrap()
    }

    #[test]
    fn path_gain_constant_reference_value() {
        // fc = 10 GHz, c = 3e8 m/s.
        let eta = table_geometry().path_gain_constant();
        assert_relative_eq!(eta, 5.6993e-6, max_relative = 1e-4);
    }

    #[test]
    fn path_gain_constant_scales_inverse_square_in_frequency() {
        let g1 = SystemGeometry::new(20.0, 5.0, 10.0e9).unwrap();
        let g2 = SystemGeometry::new(20.0, 5.0, 20.0e9).unwrap();
        assert_relative_eq!(
            g2.path_gain_constant(),
            g1.path_gain_constant() / 4.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn path_gain_constant_unity_frequency() {
        // fc = c/(4 pi) makes the constant exactly one square meter.
        let fc = LIGHTSPEED / (4.0 * std::f64::consts::PI);
        let g = SystemGeometry::new(20.0, 5.0, fc).unwrap();
        assert_abs_diff_eq!(g.path_gain_constant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn supports_are_consistent() {
        let g = table_geometry();
        let (z_lo, z_hi) = g.distance_sq_support();
        assert_abs_diff_eq!(z_lo, 25.0);
        assert_abs_diff_eq!(z_hi, 125.0);
        let (a, b) = g.gain_support();
        assert!(a < b);
        assert_relative_eq!(a, g.path_gain_constant() / 125.0, max_relative = 1e-15);
        assert_relative_eq!(b, g.path_gain_constant() / 25.0, max_relative = 1e-15);
    }

    #[test]
    fn geometry_rejects_bad_inputs() {
        assert!(SystemGeometry::new(0.0, 5.0, 1e9).is_err());
        assert!(SystemGeometry::new(20.0, -1.0, 1e9).is_err());
        assert!(SystemGeometry::new(20.0, 5.0, f64::NAN).is_err());
    }

    #[test]
    fn allocation_validation() {
        assert!(NomaPowerAllocation::new(vec![0.8, 0.2]).is_ok());
        // not strictly decreasing
        assert!(NomaPowerAllocation::new(vec![0.5, 0.5]).is_err());
        // does not sum to one
        assert!(NomaPowerAllocation::new(vec![0.8, 0.1]).is_err());
        assert!(NomaPowerAllocation::new(vec![]).is_err());
        assert!(NomaPowerAllocation::new(vec![1.2, -0.2]).is_err());
    }

    #[test]
    fn allocation_suffix_sums() {
        let alloc = NomaPowerAllocation::new(vec![0.80, 0.16, 0.04]).unwrap();
        assert_abs_diff_eq!(alloc.residual_after(1).unwrap(), 0.20, epsilon = 1e-15);
        assert_abs_diff_eq!(alloc.residual_after(2).unwrap(), 0.04, epsilon = 1e-15);
        assert_abs_diff_eq!(alloc.residual_after(3).unwrap(), 0.0);
        assert!(alloc.residual_after(0).is_err());
        assert!(alloc.residual_after(4).is_err());
    }

    #[test]
    fn rate_targets_mbps_normalization() {
        let t = RateTargets::from_throughput_mbps(vec![0.5, 0.5], 1.0).unwrap();
        assert_abs_diff_eq!(t.target(1).unwrap(), 0.5);
        let t = RateTargets::from_throughput_mbps(vec![3.0], 2.0).unwrap();
        assert_abs_diff_eq!(t.target(1).unwrap(), 1.5);
        assert!(RateTargets::from_spectral_efficiencies(vec![0.0]).is_err());
    }

    #[test]
    fn snr_grid_checks_monotonicity() {
        assert!(SnrGrid::new(vec![0.0, 10.0, 10.0]).is_err());
        let g = SnrGrid::linspace(0.0, 120.0, 25).unwrap();
        assert_eq!(g.len(), 25);
        assert_abs_diff_eq!(g.points_db()[24], 120.0);
        assert_abs_diff_eq!(SnrGrid::db_to_linear(30.0), 1000.0, epsilon = 1e-9);
    }
}
