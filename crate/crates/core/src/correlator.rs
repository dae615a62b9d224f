//! Pair correlation function for an incoherent source,
//!
//! ```text
//! C₂_α(q) = 1 + 2π ∫₀^∞ r K₀_α(q, r) S(r) dr,
//! ```
//!
//! by oscillation-resolved adaptive quadrature, by Monte Carlo over the
//! source, and in closed form at the boson/fermion endpoints.

use std::cell::Cell;
use std::f64::consts::PI;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{kernel_k0, TruncationPolicy};
use crate::quadrature::{integrate, AdaptiveRule};
use crate::sources::{RadialSource, SourceDescriptor, SourceKind};
use crate::special_functions::{bessel_j, BesselAccuracy};
use crate::wavefunction::{AnyonParameter, Statistics};

/// Radial integration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraturePolicy {
    r_max_multiplier: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
    panels_per_oscillation: usize,
}

impl QuadraturePolicy {
    pub fn new(
        r_max_multiplier: f64,
        abs_tol: f64,
        rel_tol: f64,
        max_subdivisions: usize,
        panels_per_oscillation: usize,
    ) -> Result<Self> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(r_max_multiplier) || !positive(abs_tol) || !positive(rel_tol) {
            return Err(Error::InvalidParameter(format!(
                "r_max_multiplier, abs_tol and rel_tol must be positive \
                 (got {r_max_multiplier}, {abs_tol}, {rel_tol})"
            )));
        }
        if max_subdivisions == 0 {
            return Err(Error::InvalidParameter(
                "max_subdivisions must be positive".into(),
            ));
        }
        if panels_per_oscillation < 4 {
            return Err(Error::InvalidParameter(format!(
                "panels_per_oscillation must be at least 4, got {panels_per_oscillation}"
            )));
        }
        Ok(Self {
            r_max_multiplier,
            abs_tol,
            rel_tol,
            max_subdivisions,
            panels_per_oscillation,
        })
    }

    pub fn r_max_multiplier(&self) -> f64 {
        self.r_max_multiplier
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    pub fn max_subdivisions(&self) -> usize {
        self.max_subdivisions
    }

    pub fn panels_per_oscillation(&self) -> usize {
        self.panels_per_oscillation
    }
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        Self {
            r_max_multiplier: 12.0,
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_subdivisions: 200,
            panels_per_oscillation: 8,
        }
    }
}

/// All numerical controls for a scan.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Policies {
    pub quadrature: QuadraturePolicy,
    pub truncation: TruncationPolicy,
    pub bessel: BesselAccuracy,
}

/// One quadrature evaluation of `C₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub c2: f64,
    /// Panel-halving estimate plus the truncated tail of the source.
    pub err_est: f64,
    /// Largest number of partial-wave terms any kernel call needed.
    pub terms_used: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// `C₂_α(q)` for source `src` at relative momentum `q`.
pub fn c2_point(
    alpha: AnyonParameter,
    src: &RadialSource,
    q: f64,
    quad: &QuadraturePolicy,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<PointEstimate> {
    if !(q >= 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "q must be finite and non-negative, got {q}"
        )));
    }
    let (breakpoints, tail) = src.integration_support(quad.r_max_multiplier);
    let mut rule = AdaptiveRule {
        max_width: f64::INFINITY,
        abs_tol: quad.abs_tol,
        rel_tol: quad.rel_tol,
        max_subdivisions: quad.max_subdivisions,
    };

    let (integral, terms_used) = if q == 0.0 {
        // K₀ is +1 for bosons and −1 for every α > 0 at q = 0.
        let sign = if alpha.value() == 0.0 { 1.0 } else { -1.0 };
        rule.max_width = src.r0();
        let mass = integrate(|r| Ok(2.0 * PI * r * src.density(r)), &breakpoints, &rule)?;
        let mut signed = mass;
        signed.value *= sign;
        (signed, 1)
    } else {
        rule.max_width = (PI / q) / quad.panels_per_oscillation as f64;
        let terms = Cell::new(0usize);
        let integral = integrate(
            |r| {
                let density = src.density(r);
                if density == 0.0 {
                    return Ok(0.0);
                }
                let k = kernel_k0(alpha, q, r, trunc, acc)?;
                terms.set(terms.get().max(k.terms_used));
                Ok(2.0 * PI * r * density * k.value)
            },
            &breakpoints,
            &rule,
        )?;
        (integral, terms.get())
    };

    // Never report less than the rounding floor of the sum itself.
    let rounding = f64::EPSILON * integral.value.abs().max(f64::MIN_POSITIVE);
    Ok(PointEstimate {
        c2: 1.0 + integral.value,
        err_est: (integral.error + tail).max(rounding),
        terms_used,
    })
}

/// Closed-form `C₂` at the boson/fermion endpoints for the analytic sources:
/// `1 ± exp(−4q²r0²)` (gaussian) and `1 ± J₁(2qr0)/(qr0)` (step).
pub fn c2_closed_form(statistics: Statistics, kind: SourceKind, q: f64, r0: f64) -> Result<f64> {
    if !(q >= 0.0 && q.is_finite()) || !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "closed form needs q ≥ 0 and r0 > 0, got q={q}, r0={r0}"
        )));
    }
    let x = q * r0;
    let shape = match kind {
        SourceKind::Gaussian => (-4.0 * x * x).exp(),
        SourceKind::Step => {
            if x < 1e-8 {
                1.0
            } else {
                bessel_j(1.0, 2.0 * x, &BesselAccuracy::default())? / x
            }
        }
        SourceKind::Tabulated => {
            return Err(Error::InvalidParameter(
                "no closed form for tabulated sources".into(),
            ))
        }
    };
    Ok(1.0 + statistics.sign() * shape)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the random stream owned by one `(seed, α, q)` evaluation.
pub fn substream_seed(seed: u64, alpha: AnyonParameter, q: f64) -> u64 {
    mix64(mix64(mix64(seed) ^ alpha.value().to_bits()) ^ q.to_bits())
}

/// Monte Carlo estimate of `C₂ = 1 + E_{p(r)}[K₀_α(q, r)]` with
/// `p(r) = 2π r S(r)`.
pub fn c2_monte_carlo(
    alpha: AnyonParameter,
    src: &RadialSource,
    q: f64,
    n_samples: usize,
    seed: u64,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<MonteCarloEstimate> {
    if n_samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "n_samples must be at least 1000, got {n_samples}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(substream_seed(seed, alpha, q));
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..n_samples {
        let r = src.sample_r(&mut rng);
        let k = kernel_k0(alpha, q, r, trunc, acc)?.value;
        let delta = k - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (k - mean);
    }
    let variance = m2 / (n_samples - 1) as f64;
    Ok(MonteCarloEstimate {
        estimate: 1.0 + mean,
        std_error: (variance / n_samples as f64).sqrt(),
    })
}

/// Optional Monte Carlo cross-check attached to each scan point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloCheck {
    pub n_samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub q_r0: f64,
    pub c2: f64,
    pub err_est: f64,
    pub terms_used: usize,
    pub mc: Option<MonteCarloEstimate>,
}

/// `C₂` against `q·r0` for one α.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationCurve {
    pub alpha: AnyonParameter,
    pub source: SourceDescriptor,
    pub points: Vec<CurvePoint>,
}

impl CorrelationCurve {
    pub fn max_err_est(&self) -> f64 {
        self.points.iter().map(|p| p.err_est).fold(0.0, f64::max)
    }

    pub fn max_terms_used(&self) -> usize {
        self.points.iter().map(|p| p.terms_used).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub alpha: f64,
    pub q_r0: f64,
    pub error: Error,
}

/// Every grid point that failed during a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanError {
    pub failures: Vec<PointFailure>,
}

impl fmt::Display for ScanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} scan point(s) failed", self.failures.len())?;
        for p in &self.failures {
            write!(f, "\n  alpha={} q_r0={}: {}", p.alpha, p.q_r0, p.error)?;
        }
        Ok(())
    }
}

impl std::error::Error for ScanError {}

impl From<Error> for ScanError {
    fn from(error: Error) -> Self {
        Self {
            failures: vec![PointFailure {
                alpha: f64::NAN,
                q_r0: f64::NAN,
                error,
            }],
        }
    }
}

/// Evaluates every `(α, q·r0)` pair in parallel and assembles the curves in
/// input order.
pub fn scan(
    alphas: &[AnyonParameter],
    src: &RadialSource,
    q_r0_grid: &[f64],
    policies: &Policies,
    mc: Option<MonteCarloCheck>,
) -> std::result::Result<Vec<CorrelationCurve>, ScanError> {
    if alphas.is_empty() || q_r0_grid.is_empty() {
        return Err(Error::InvalidParameter(
            "scan needs at least one alpha and one grid point".into(),
        )
        .into());
    }
    if q_r0_grid[0] < 0.0 || !q_r0_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter(
            "q·r0 grid must be non-negative and strictly increasing".into(),
        )
        .into());
    }
    let r0 = src.r0();
    let jobs: Vec<(usize, usize)> = (0..alphas.len())
        .flat_map(|a| (0..q_r0_grid.len()).map(move |i| (a, i)))
        .collect();
    let results: Vec<Result<CurvePoint>> = jobs
        .par_iter()
        .map(|&(a, i)| {
            let alpha = alphas[a];
            let q_r0 = q_r0_grid[i];
            let q = q_r0 / r0;
            let est = c2_point(
                alpha,
                src,
                q,
                &policies.quadrature,
                &policies.truncation,
                &policies.bessel,
            )?;
            let mc = mc
                .map(|m| {
                    c2_monte_carlo(
                        alpha,
                        src,
                        q,
                        m.n_samples,
                        m.seed,
                        &policies.truncation,
                        &policies.bessel,
                    )
                })
                .transpose()?;
            Ok(CurvePoint {
                q_r0,
                c2: est.c2,
                err_est: est.err_est,
                terms_used: est.terms_used,
                mc,
            })
        })
        .collect();

    let mut curves: Vec<CorrelationCurve> = alphas
        .iter()
        .map(|&alpha| CorrelationCurve {
            alpha,
            source: src.descriptor(),
            points: Vec::with_capacity(q_r0_grid.len()),
        })
        .collect();
    let mut failures = Vec::new();
    for (&(a, i), res) in jobs.iter().zip(results) {
        match res {
            Ok(p) => curves[a].points.push(p),
            Err(error) => failures.push(PointFailure {
                alpha: alphas[a].value(),
                q_r0: q_r0_grid[i],
                error,
            }),
        }
    }
    if failures.is_empty() {
        Ok(curves)
    } else {
        Err(ScanError { failures })
    }
}
