//! Delay and reliability analysis for VR streaming over THz small cells.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockage;
pub mod channel;
pub mod cli;
pub mod config;
pub mod delay_analytics;
pub mod error;
pub mod evt_risk;
pub mod geometry;
pub mod los_reliability;
pub mod numerics;
pub mod simcore;

pub use error::{Error, Result};
