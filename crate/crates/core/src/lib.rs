//! Symbol-level Monte Carlo and analytic models for double-threshold
//! optimal device selection in an amplify-and-forward (AF) sidelink network
//! with a passive eavesdropper.
//!
//! The crate is organised bottom-up:
//! - [`channel`]: Rayleigh coefficients, AWGN and dB conversions, plus the
//!   keyed random streams every simulation draws from
//! - [`modem`]: Gray-coded M-PSK and bit-error accounting
//! - [`topology`]: the three distance cases and the total-power split
//! - [`relaying`]: source broadcast and AF forwarding
//! - [`selection`]: input threshold, ODS metrics, output threshold and MRC
//! - [`security`]: secrecy capacity and intercept probability
//! - [`engine`]: BER and intercept sweeps

pub mod channel;
pub mod engine;
mod error;
mod montecarlo;
pub mod modem;
pub mod relaying;
pub mod scenario;
pub mod security;
pub mod selection;
pub mod topology;

pub use error::{Error, Result};
