//! Link-level performance analysis for a single-waveguide pinching-antenna
//! system serving one user per room.
//!
//! A pinching antenna (PA) is a detachable radiating element clipped onto a
//! dielectric waveguide that runs along the ceiling of a row of square rooms.
//! Because the PA slides to the in-room position nearest its user, the only
//! randomness left in the line-of-sight link is the user's lateral offset from
//! the waveguide, which makes every performance metric available in closed
//! form. This crate evaluates those closed forms and cross-checks them with an
//! independent Monte Carlo simulator:
//!
//! - [`model`] — system geometry, power allocation, rate targets, SNR grids.
//! - [`channel`] — squared-distance and channel-gain distributions, plus the
//!   order statistics that define NOMA user ranks.
//! - [`quadrature`] — the Chebyshev–Gauss rule used by the uplink NOMA
//!   expressions and an adaptive Gauss–Kronrod integrator that serves as the
//!   reference oracle in tests.
//! - [`downlink`] — outage probability and ergodic rate for downlink OMA and
//!   NOMA, Jensen-bound rate brackets, high-SNR asymptotes, and the
//!   zero-outage-threshold comparison between the two schemes.
//! - [`uplink`] — the OMA mirror plus the two-user uplink NOMA outage and
//!   rate expressions with their high-SNR regimes.
//! - [`montecarlo`] — a deterministic, seedable trial engine that evaluates
//!   the rate equations directly and estimates outage/rate with standard
//!   errors.
//!
//! All analytic entry points are pure functions of immutable inputs and are
//! safe to call concurrently. Users are identified by their 1-based channel
//! rank: rank 1 is the user with the weakest channel gain.

pub mod channel;
pub mod downlink;
mod error;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod uplink;

pub use channel::GainDistribution;
pub use error::{Error, Result};
pub use model::{NomaPowerAllocation, RateTargets, SnrGrid, SystemGeometry};
pub use quadrature::ChebyshevRule;
