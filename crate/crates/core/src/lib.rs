//! Momentum-space intensity interferometry for two-dimensional Abelian
//! anyons.
//!
//! The pipeline runs from fractional-order Bessel partial waves
//! ([`special_functions`], [`wavefunction`]) through the angle-averaged pair
//! kernel ([`kernel`]) to the source-weighted radial integral giving the
//! correlation function `C₂(q)` ([`correlator`]). [`cli`] drives parameter
//! scans and writes CSV.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod cli;
pub mod correlator;
pub mod error;
pub mod kernel;
pub mod quadrature;
pub mod sources;
pub mod special_functions;
pub mod wavefunction;

pub use correlator::{
    c2_closed_form, c2_monte_carlo, c2_point, scan, CorrelationCurve, CurvePoint, MonteCarloCheck,
    MonteCarloEstimate, PointEstimate, Policies, QuadraturePolicy, ScanError,
};
pub use error::{Error, Result};
pub use kernel::{kernel_full, kernel_k0, partial_wave_kernel, KernelEvaluation, TruncationPolicy};
pub use sources::{RadialSource, SourceDescriptor, SourceKind, TableUnits};
pub use special_functions::{bessel_j, bessel_j_orders, log_gamma, BesselAccuracy};
pub use wavefunction::{
    exact_phi_squared, phi_squared, AnyonParameter, RelativeCoordinate, Statistics,
};
