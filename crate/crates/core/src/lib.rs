//! Robot-surveyed WiFi fingerprinting.
//!
//! The pipeline simulates a survey drive ([`simulator`]), pairs each WiFi
//! scan with an odometry pose by dynamic time warping ([`alignment`]),
//! turns the pairs into a fingerprint table ([`dataset`], [`io`]), fits an
//! MLP position regressor ([`localizer`]) and scores it ([`evaluation`]).
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common `f64` instantiations.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod alignment;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod localizer;
pub mod scalar;
pub mod scenario;
pub mod simulator;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use types::{canonical_ap_order, ApId, FingerprintDataset, FingerprintRow, LocatedScan, OdometrySample, Pose2D, WifiScan};

pub type CostMatrix = alignment::DtwCostMatrix<f64>;
pub type CostMatrix32 = alignment::DtwCostMatrix<f32>;
pub type Mlp = localizer::MlpModel<f64>;
pub type Mlp32 = localizer::MlpModel<f32>;
pub type Gradients = localizer::Gradients<f64>;
pub type EvalReport = evaluation::EvalReport<f64>;
pub type EvalReport32 = evaluation::EvalReport<f32>;
