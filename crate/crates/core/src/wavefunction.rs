//! The two-anyon relative wavefunction as a sum over even partial waves,
//!
//! ```text
//! Φ_{q,α}(r, φ) = √2 Σ_{l even} i^{|l−α|} J_{|l−α|}(qr) e^{ilφ},
//! ```
//!
//! together with the plane-wave boson/fermion forms it reduces to at α = 0, 1.

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::TruncationPolicy;
use crate::special_functions::{bessel_j_orders, BesselAccuracy};

/// Statistics parameter α ∈ [0, 1]; 0 is bosonic, 1 fermionic.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AnyonParameter(f64);

impl AnyonParameter {
    pub const BOSON: Self = Self(0.0);
    pub const FERMION: Self = Self(1.0);

    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha out of [0,1]: {alpha}"
            )));
        }
        Ok(Self(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The exact boson or fermion endpoint, if α sits on one.
    pub fn statistics(self) -> Option<Statistics> {
        if self.0 == 0.0 {
            Some(Statistics::Boson)
        } else if self.0 == 1.0 {
            Some(Statistics::Fermion)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistics {
    Boson,
    Fermion,
}

impl Statistics {
    /// `+1` for bosons, `−1` for fermions.
    pub fn sign(self) -> f64 {
        match self {
            Statistics::Boson => 1.0,
            Statistics::Fermion => -1.0,
        }
    }
}

/// Pair coordinates in the centre-of-mass frame: relative momentum `q`,
/// separation `r`, and the angle `phi` between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeCoordinate {
    q: f64,
    r: f64,
    phi: f64,
}

impl RelativeCoordinate {
    pub fn new(q: f64, r: f64, phi: f64) -> Result<Self> {
        if !(q >= 0.0 && q.is_finite()) || !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "q and r must be finite and non-negative, got q={q}, r={r}"
            )));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 2π), got {phi}"
            )));
        }
        Ok(Self { q, r, phi })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn qr(&self) -> f64 {
        self.q * self.r
    }
}

/// Radial amplitudes `J_{|l−α|}(x)` for every even `l` in `[−L, L]`.
///
/// `below[k]` holds the `l = −2k` order `α + 2k`; `above[k]` holds the
/// `l = 2k` order `2k − α` (index 0 unused, `l = 0` lives in `below[0]`).
#[derive(Debug, Clone)]
pub(crate) struct PartialWaves {
    pub(crate) l_max: usize,
    pub(crate) below: Vec<f64>,
    pub(crate) above: Vec<f64>,
}

/// Which quantity must fall below `term_tolerance` at the outermost `|l|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum TailCriterion {
    /// `2 (J²_{L+α} + J²_{L−α})`, the last paired term of the kernel sum.
    Intensity,
    /// `√2 (|J_{L+α}| + |J_{L−α}|)`, the last paired amplitude of Φ.
    Amplitude,
}

impl PartialWaves {
    pub(crate) fn compute(
        alpha: f64,
        x: f64,
        criterion: TailCriterion,
        trunc: &TruncationPolicy,
        acc: &BesselAccuracy,
    ) -> Result<(Self, f64)> {
        let mut l_max = trunc.initial_cutoff(x);
        loop {
            if l_max > trunc.l_hard_cap() {
                let waves = Self::at_cutoff(alpha, x, trunc.l_hard_cap() & !1, acc)?;
                return Err(Error::TruncationFailure {
                    alpha,
                    x,
                    l: waves.l_max,
                    last_term: waves.last_term(criterion),
                });
            }
            let waves = Self::at_cutoff(alpha, x, l_max, acc)?;
            let last = waves.last_term(criterion);
            if last < trunc.term_tolerance() {
                return Ok((waves, last));
            }
            l_max += 2 * trunc.l_margin().max(1).div_ceil(2);
        }
    }

    fn at_cutoff(alpha: f64, x: f64, l_max: usize, acc: &BesselAccuracy) -> Result<Self> {
        debug_assert!(l_max.is_multiple_of(2));
        let half = l_max / 2;
        // orders α + n, keep even n
        let low = bessel_j_orders(alpha, l_max + 1, x, acc)?;
        let below = low.into_iter().step_by(2).collect::<Vec<_>>();
        // orders (1 − α) + n, keep odd n
        let mut above = vec![0.0; half + 1];
        if half > 0 {
            let high = bessel_j_orders(1.0 - alpha, l_max, x, acc)?;
            for (k, slot) in above.iter_mut().enumerate().skip(1) {
                *slot = high[2 * k - 1];
            }
        }
        Ok(Self {
            l_max,
            below,
            above,
        })
    }

    fn last_term(&self, criterion: TailCriterion) -> f64 {
        let k = self.l_max / 2;
        let (a, b) = (self.below[k], if k > 0 { self.above[k] } else { 0.0 });
        match criterion {
            TailCriterion::Intensity => 2.0 * (a * a + b * b),
            TailCriterion::Amplitude => std::f64::consts::SQRT_2 * (a.abs() + b.abs()),
        }
    }

    /// Number of even `l` values in `[−L, L]`.
    pub(crate) fn terms(&self) -> usize {
        self.l_max + 1
    }
}

/// `|Φ_{q,α}(r, φ)|²` from the even-`l` partial-wave sum.
pub fn phi_squared(
    alpha: AnyonParameter,
    coord: &RelativeCoordinate,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<f64> {
    let a = alpha.value();
    let (waves, _) = PartialWaves::compute(a, coord.qr(), TailCriterion::Amplitude, trunc, acc)?;

    // i^{α+2k} = (−1)^k e^{iπα/2},  i^{2k−α} = (−1)^k e^{−iπα/2}
    let phase_below = Complex64::from_polar(1.0, FRAC_PI_2 * a);
    let phase_above = phase_below.conj();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in (1..=waves.l_max / 2).rev() {
        let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
        let turn = Complex64::from_polar(1.0, 2.0 * k as f64 * coord.phi());
        sum += parity
            * (phase_below * waves.below[k] * turn.conj() + phase_above * waves.above[k] * turn);
    }
    sum += phase_below * waves.below[0];
    Ok(2.0 * sum.norm_sqr())
}

/// Closed-form `|Φ|²`: `2cos²(qr cos φ)` for bosons, `2sin²(qr cos φ)` for
/// fermions.
pub fn exact_phi_squared(statistics: Statistics, coord: &RelativeCoordinate) -> f64 {
    let projected = coord.qr() * coord.phi().cos();
    match statistics {
        Statistics::Boson => 2.0 * projected.cos().powi(2),
        Statistics::Fermion => 2.0 * projected.sin().powi(2),
    }
}
