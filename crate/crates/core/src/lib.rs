//! Secrecy outage analysis for multi-pair cooperative wiretap networks.
//!
//! Three transmission schemes are modelled: independent transmission, round
//! robin pair scheduling with relaying, and pair scheduling driven by
//! transmit antenna selection. For each the crate provides exact outage
//! probabilities, high-MER bounds and diversity orders, and a seeded,
//! worker-count independent Monte Carlo estimator.
//!
//! ```
//! use coopsec::{closed_form, monte_carlo, system, Scheme};
//!
//! let cfg = system::SystemConfig::default().with_mer_db(10.0);
//! let d = system::derive(&cfg);
//! let exact = closed_form::sop_tas(&cfg, &d).unwrap();
//! let sim = monte_carlo::estimate_sop(&cfg, Scheme::Tas, 200_000, 7);
//! assert!((exact - sim.p_hat).abs() < 5.0 * sim.stderr);
//! ```

pub mod asymptotics;
pub mod closed_form;
pub mod error;
pub mod fading;
pub mod monte_carlo;
pub mod numerics;
pub mod rates;
pub mod runner;
pub mod system;

pub use error::{Error, Result};
pub use rates::Scheme;
pub use system::{derive, validate, DerivedParams, SystemConfig};
