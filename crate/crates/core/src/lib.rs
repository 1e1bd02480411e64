//! Scalar and mean curvature comparison numerics for Riemannian bands.
//!
//! The crate is `no_std` (with `alloc`) and contains only pure computation:
//!
//! * [`warp`] evaluates warping functions and the curvature profiles of warped
//!   products `φ(t)² g_N + dt²`, together with the catalog of model spaces.
//! * [`riccati`] integrates the extremal mean-curvature ODE
//!   `h' = -(σ + n/(n-1) h²) / 2` and turns it into band-width bounds.
//! * [`band`] is a 2-D discrete band: a quadrilateral grid with a per-cell
//!   metric, distances, band maps, separation and structural checks.
//! * [`bubble`] minimizes the prescribed-mean-curvature functional (and its
//!   weighted variant) over cell regions by a minimum cut.
//! * [`spectral`] computes the bottom of the spectrum of `-Δ + V` on discrete
//!   closed curves, i.e. the stability operator of a bubble boundary.
//!
//! File formats, reports and the command line live in the companion `warpband`
//! crate.

#![no_std]

extern crate alloc;

pub mod band;
pub mod bubble;
mod error;
pub mod maxflow;
pub mod riccati;
pub mod spectral;
pub mod sweep;
pub mod warp;

pub use error::{Error, Result};
