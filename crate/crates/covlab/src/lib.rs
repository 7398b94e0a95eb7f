//! Finite-alphabet source-coding laboratory.
//!
//! The crate is organized in layers: [`prob`] provides finite distributions,
//! kernels and Markov-factored joint laws; [`info`] computes entropies,
//! mutual informations and information-density spectra; [`covering`]
//! implements the random covering-code construction with exact and
//! Monte-Carlo evaluation; [`region`] evaluates two-terminal
//! rate-distortion region bounds; [`config`] and [`experiment`] drive
//! reproducible experiment sweeps from plain-text configs.

pub mod config;
pub mod covering;
pub mod experiment;
pub mod info;
pub mod prob;
pub mod region;
pub mod rng;
