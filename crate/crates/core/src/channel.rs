//! Distance and channel-gain statistics.
//!
//! With the PA aligned to the user's along-waveguide coordinate, the squared
//! PA-to-user distance is `Z = offset^2 + d^2` with the lateral offset uniform
//! on `[-D/2, D/2]`, giving a density `1/(D sqrt(z - d^2))` on
//! `[d^2, d^2 + D^2/4)`. The channel gain `Y = eta / Z` then lives on
//! `[a, b] = [eta/(d^2 + D^2/4), eta/d^2]`. Both densities have an integrable
//! inverse-square-root singularity at one support edge (`z = d^2`,
//! respectively `y = b`); point queries exactly at the singular edge return
//! `f64::INFINITY`, and integrals over these densities must use open rules
//! that never evaluate the edge itself.

use crate::error::{Error, Result};
use crate::model::SystemGeometry;

/// Density of the squared PA-to-user distance at `z` (m²).
///
/// Zero outside `[d^2, d^2 + D^2/4)`; `+inf` at the singular edge `z = d^2`.
pub fn distance_sq_pdf(geometry: &SystemGeometry, z: f64) -> f64 {
    let (lo, hi) = geometry.distance_sq_support();
    if z < lo || z >= hi {
        0.0
    } else {
        1.0 / (geometry.room_side() * (z - lo).sqrt())
    }
}

/// Cumulative distribution of the squared PA-to-user distance at `z`.
pub fn distance_sq_cdf(geometry: &SystemGeometry, z: f64) -> f64 {
    let (lo, hi) = geometry.distance_sq_support();
    if z <= lo {
        0.0
    } else if z >= hi {
        1.0
    } else {
        2.0 * (z - lo).sqrt() / geometry.room_side()
    }
}

/// Distribution of the channel gain `Y = eta / Z` of a single user, together
/// with the order statistics of `M` independent copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDistribution {
    geometry: SystemGeometry,
    min_gain: f64,
    max_gain: f64,
}

impl GainDistribution {
    pub fn new(geometry: SystemGeometry) -> Self {
        let (min_gain, max_gain) = geometry.gain_support();
        Self {
            geometry,
            min_gain,
            max_gain,
        }
    }

    pub fn geometry(&self) -> &SystemGeometry {
        &self.geometry
    }

    /// Lower support endpoint `a = eta/(d^2 + D^2/4)`.
    pub fn min_gain(&self) -> f64 {
        self.min_gain
    }

    /// Upper support endpoint `b = eta/d^2`.
    pub fn max_gain(&self) -> f64 {
        self.max_gain
    }

    /// Density of the gain at `y`; `+inf` at the singular edge `y = b`.
    pub fn pdf(&self, y: f64) -> f64 {
        if y < self.min_gain || y > self.max_gain {
            return 0.0;
        }
        let eta = self.geometry.path_gain_constant();
        let d = self.geometry.waveguide_height();
        let s = eta / y - d * d;
        if s <= 0.0 {
            // at (or within rounding of) the singular edge
            return f64::INFINITY;
        }
        eta / (self.geometry.room_side() * y * y * s.sqrt())
    }

    /// Cumulative distribution of the gain at `y`.
    pub fn cdf(&self, y: f64) -> f64 {
        if y <= self.min_gain {
            return 0.0;
        }
        if y >= self.max_gain {
            return 1.0;
        }
        let eta = self.geometry.path_gain_constant();
        let d = self.geometry.waveguide_height();
        let s = (eta / y - d * d).max(0.0);
        (1.0 - 2.0 * s.sqrt() / self.geometry.room_side()).clamp(0.0, 1.0)
    }

    /// Density of the gain of the user with channel rank `rank` out of
    /// `users` (the `rank`-th smallest of `users` iid gains).
    pub fn ordered_pdf(&self, users: usize, rank: usize, y: f64) -> Result<f64> {
        check_rank(users, rank)?;
        let f = self.pdf(y);
        if f == 0.0 {
            return Ok(0.0);
        }
        if !f.is_finite() {
            // sentinel policy at the singular edge
            return Ok(f64::INFINITY);
        }
        let cdf = self.cdf(y);
        let m = rank as i32;
        let n = users as i32;
        Ok(users as f64
            * binomial(users - 1, rank - 1)
            * f
            * cdf.powi(m - 1)
            * (1.0 - cdf).powi(n - m))
    }

    /// Cumulative distribution of the gain of the user with channel rank
    /// `rank` out of `users`.
    pub fn ordered_cdf(&self, users: usize, rank: usize, y: f64) -> Result<f64> {
        check_rank(users, rank)?;
        let cdf = self.cdf(y);
        let n = users as i32;
        let mut acc = 0.0;
        for j in rank..=users {
            acc += binomial(users, j) * cdf.powi(j as i32) * (1.0 - cdf).powi(n - j as i32);
        }
        Ok(acc.clamp(0.0, 1.0))
    }
}

fn check_rank(users: usize, rank: usize) -> Result<()> {
    if users == 0 {
        return Err(Error::InvalidConfig("user count must be at least one"));
    }
    if rank == 0 || rank > users {
        return Err(Error::RankOutOfRange { rank, users });
    }
    Ok(())
}

/// Binomial coefficient as f64, computed multiplicatively.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
