//! Gaussian phase-space simulator and estimation toolkit for a levitated
//! nanoparticle released from an optical trap into dark electrical
//! potentials: an inverted electrostatic potential along one axis and RF
//! Paul-trap confinement in the transverse plane.
//!
//! The particle's center-of-mass motion stays Gaussian throughout, so each
//! axis is a [`state::GaussianState`] (means, variances, covariance)
//! propagated under piecewise quadratic potentials. The crate provides
//!
//! - closed-form variance growth laws for the inverted, frequency-jump and
//!   free-flight regimes ([`analytic`]),
//! - a numerical moment propagator for arbitrary stiffness schedules
//!   including Mathieu-modulated Paul-trap drive, with Floquet stability
//!   analysis and secular-frequency calibration ([`propagator`]),
//! - stochastic shot-by-shot simulation of the full release-retrap-measure
//!   protocol with lock-in state reconstruction ([`ensemble`], [`lockin`]),
//! - weighted least-squares fits of expansion curves and coherence-length
//!   estimates from the fitted parameters ([`fit`]),
//! - a batch CLI (`darktrap simulate|scan|fit|coherence`) driven by TOML
//!   configuration files ([`cli`], [`config`]).
//!
//! ## Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example thermal_state       # state sizes, purity, squeezing numbers
//! cargo run --release --example inverted_expansion  # exponential growth vs free flight
//! cargo run --release --example frequency_jump      # breathing dynamics with micromotion
//! cargo run --release --example floquet_stability   # Mathieu stability and calibration
//! cargo run --release --example lockin_demo         # amplitude/phase reconstruction
//! cargo run --release --example ensemble_histogram  # 400-shot phase-space histogram
//! cargo run --release --example fit_roundtrip       # synthetic-data parameter recovery
//! cargo run --release --example coherence_length    # coherence curves, reduced heating
//! ```
//!
//! Examples write their CSV/SVG artifacts into `output/` in the working
//! directory. The bundled `configs/paper_nominal.toml` carries the nominal
//! experiment values used throughout.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fit;
pub mod io;
pub mod lockin;
pub mod propagator;
pub mod state;
pub mod stats;
pub mod svg;
pub mod units;

pub use error::{Error, Result};
