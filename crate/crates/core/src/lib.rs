//! Weekly search-interest and venture-valuation trajectories: ingestion,
//! data-quality gating, smoothing and alignment, lag-aware Kendall
//! correlation, portfolio roll-ups, fsQCA and a synthetic-venture oracle.
//!
//! Numeric kernels are generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod calendar;
pub mod correlate;
pub mod fsqca;
pub mod ingest;
pub mod portfolio;
pub mod preprocess;
pub mod quality;
pub mod scalar;
pub mod synth;

pub use scalar::Scalar;

pub type WeeklySeriesF64 = preprocess::WeeklySeries<f64>;
pub type WeeklySeriesF32 = preprocess::WeeklySeries<f32>;
pub type AlignedPairF64 = preprocess::AlignedPair<f64>;
pub type AlignedPairF32 = preprocess::AlignedPair<f32>;
pub type LagScanF64 = correlate::LagScan<f64>;
pub type QcaDataF64 = fsqca::QcaData<f64>;
pub type QcaDataF32 = fsqca::QcaData<f32>;
pub type CalibrationAnchorsF64 = fsqca::CalibrationAnchors<f64>;
pub type CalibrationAnchorsF32 = fsqca::CalibrationAnchors<f32>;
