//! Predictive gait synthesis from a multi-period gait library.
//!
//! The crate builds Bézier gait libraries on a linear inverted pendulum,
//! synthesizes a gait every control tick by predicting the pre-impact CoM
//! state, simulates the closed loop on a reduced-order hybrid plant, and
//! estimates the step-to-step stability constants empirically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bezier;
pub mod builder;
pub mod cli;
pub mod error;
pub mod gait;
pub mod gaitlib_io;
mod keyval;
pub mod plant;
pub mod predictor;
pub mod stability;
pub mod synthesizer;

pub use error::{Error, Result};
pub use gait::{GaitLabel, GaitLibrary, GaitParams, Interpolated, OutputIndex, Period};
pub use predictor::{CentroidalState, PredictorGains};
pub use synthesizer::{Desired, PhaseState, Stance, SynthesisResult, SynthesizerConfig};
