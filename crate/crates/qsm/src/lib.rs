//! Dimension-constrained quantum models of classical stochastic processes.
//!
//! This crate learns quantum memory models (complete Kraus-operator sets)
//! of stationary stochastic processes directly from symbol sequences,
//! evaluates their predictive distortion against the true process, and
//! computes provable lower bounds on the distortion achievable by any
//! classical unifilar model of the same memory dimension -- the machinery
//! needed to demonstrate that a learned quantum model beats every classical
//! competitor of equal size.
//!
//! The pieces:
//!
//! - [`process`]: exact stationary unifilar hidden Markov models
//!   (epsilon-machines), used as ground truth and as data generators.
//! - [`quantum`]: unconstrained parametrizations, spectral recovery of
//!   complete Kraus sets, sequence likelihoods, past encodings, unitary
//!   completion, and Bloch export.
//! - [`training`]: Adam over the negative log-likelihood with restarts.
//! - [`distortion`]: the past-averaged KL divergence between true and
//!   modelled conditional futures.
//! - [`bound`]: exhaustive coarse-graining lower bounds for classical
//!   models (tight for Markov processes).
//! - [`io`] and [`cli`]: file formats and the command-line pipeline.
//!
//! The `examples/` directory demonstrates each capability end to end; the
//! `qsm` binary exposes the same pipeline as subcommands
//! (`gen | train | eval | bound | sweep | unitary | bloch`).

pub mod bound;
pub mod cli;
pub mod distortion;
pub mod error;
pub mod io;
pub mod linalg;
pub mod process;
pub mod quantum;
pub mod training;

pub use bound::{classical_lower_bound, BoundReport, CoarseGrainedModel, StatePartition};
pub use distortion::{distortion, DistortionReport, EvalProtocol, Predictor};
pub use error::{Error, ErrorCategory, Result};
pub use process::{EpsilonMachine, MarkovOrder, WordDistribution};
pub use quantum::{
    bloch_coordinates, recover_kraus, sequence_likelihood, KrausModel, ParamSet, PureState,
    SpectralData,
};
pub use training::{cost, gradient, train, TrainConfig, TrainResult};
