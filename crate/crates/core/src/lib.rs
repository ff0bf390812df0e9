//! Simulation of a 28 GHz directional channel-sounding campaign.
//!
//! The crate is organised bottom-up:
//!
//! - [`propagation`]: closed-form link math (free-space path loss, Snell
//!   refraction, Fresnel reflection, penetration loss).
//! - [`geometry`]: 2D plan-view scenes and deterministic ray construction
//!   (direct path with wall crossings, first-order specular reflections).
//! - [`antenna`]: horn gain pattern and the gimbal azimuth scan grid.
//! - [`sounder`]: Zadoff-Chu excitation, RRC shaping, tapped-delay-line
//!   channel, correlation CIR estimation and PDP averaging.
//! - [`campaign`]: ray paths to channel taps, angular campaigns, MPC
//!   extraction, coverage maps and the comparison tables.
//! - [`io`]: scene files, CSV serialisation and report bundles.
//! - [`cli`]: the `mmsounder` command line.

pub mod antenna;
pub mod campaign;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod io;
pub mod propagation;
pub mod scenarios;
pub mod sounder;

pub use error::{Error, Result};
