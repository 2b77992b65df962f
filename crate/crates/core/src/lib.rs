//! Function-valued causal influence for additive neural autoregressive models.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! pieces: the synthetic data generator, the additive model and its trainer,
//! contribution-based edge scores, ICE response curves, and curve analysis.
//! File formats, configuration and the command line live in the `funcausal`
//! companion crate.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod dgp;
pub mod error;
pub mod ice;
pub mod mechanism;
pub mod model;
pub mod panel;
pub mod rng;
pub mod scores;
pub mod stats;
pub mod train;
pub mod window;

pub use error::{Error, Result};
pub use mechanism::{MechanismKind, MechanismSpec};
pub use model::{AdditiveArModel, Hyperparams};
pub use panel::{ColumnStats, PanelSeries};
pub use window::{LagWindow, WindowSet};
