//! Angle-averaged pair kernel
//!
//! ```text
//! K₀_α(q, r) = 2 Σ_{l even} J²_{|l−α|}(qr) − 1,
//! ```
//!
//! which collapses to `±J₀(2qr)` at the boson and fermion endpoints.

use crate::error::{Error, Result};
use crate::special_functions::{bessel_j, BesselAccuracy};
use crate::wavefunction::{
    phi_squared, AnyonParameter, PartialWaves, RelativeCoordinate, TailCriterion,
};

/// Partial-wave cutoff control.
///
/// The sum starts at `|l| ≤ L = 2⌈(qr + l_margin)/2⌉` and is extended in
/// steps of `l_margin` until the outermost pair falls below
/// `term_tolerance`, failing once `L` would pass `l_hard_cap`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    l_margin: usize,
    term_tolerance: f64,
    l_hard_cap: usize,
}

impl TruncationPolicy {
    pub fn new(l_margin: usize, term_tolerance: f64, l_hard_cap: usize) -> Result<Self> {
        if !(term_tolerance > 0.0 && term_tolerance.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "term_tolerance must be positive, got {term_tolerance}"
            )));
        }
        if l_hard_cap == 0 || l_hard_cap < l_margin {
            return Err(Error::InvalidParameter(format!(
                "l_hard_cap ({l_hard_cap}) must be positive and at least l_margin ({l_margin})"
            )));
        }
        Ok(Self {
            l_margin,
            term_tolerance,
            l_hard_cap,
        })
    }

    pub fn l_margin(&self) -> usize {
        self.l_margin
    }

    pub fn term_tolerance(&self) -> f64 {
        self.term_tolerance
    }

    pub fn l_hard_cap(&self) -> usize {
        self.l_hard_cap
    }

    pub(crate) fn initial_cutoff(&self, x: f64) -> usize {
        2 * ((x + self.l_margin as f64) / 2.0).ceil() as usize
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            l_margin: 40,
            term_tolerance: 1e-14,
            l_hard_cap: 2000,
        }
    }
}

/// One kernel value with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEvaluation {
    pub value: f64,
    /// Even-`l` terms summed; 1 for the closed-form endpoints.
    pub terms_used: usize,
    /// Bound on the omitted part of the sum.
    pub tail_estimate: f64,
}

/// `K₀_α(q, r)`, using the closed form `(−1)^α J₀(2qr)` at α ∈ {0, 1}.
pub fn kernel_k0(
    alpha: AnyonParameter,
    q: f64,
    r: f64,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<KernelEvaluation> {
    if !(q >= 0.0 && q.is_finite()) || !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "q and r must be finite and non-negative, got q={q}, r={r}"
        )));
    }
    let x = q * r;
    match alpha.statistics() {
        Some(stats) => Ok(KernelEvaluation {
            value: stats.sign() * bessel_j(0.0, 2.0 * x, acc)?,
            terms_used: 1,
            tail_estimate: 0.0,
        }),
        None => partial_wave_kernel(alpha, x, trunc, acc),
    }
}

/// The truncated even-`l` sum at `x = qr`, without the endpoint shortcut.
pub fn partial_wave_kernel(
    alpha: AnyonParameter,
    x: f64,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<KernelEvaluation> {
    let (waves, last) =
        PartialWaves::compute(alpha.value(), x, TailCriterion::Intensity, trunc, acc)?;
    let mut sum = 0.0;
    for k in (1..=waves.l_max / 2).rev() {
        let (a, b) = (waves.below[k], waves.above[k]);
        sum += a * a + b * b;
    }
    sum += waves.below[0] * waves.below[0];
    Ok(KernelEvaluation {
        value: 2.0 * sum - 1.0,
        terms_used: waves.terms(),
        tail_estimate: 2.0 * last,
    })
}

/// The unaveraged kernel `|Φ_{q,α}(r, φ)|² − 1`.
pub fn kernel_full(
    alpha: AnyonParameter,
    coord: &RelativeCoordinate,
    trunc: &TruncationPolicy,
    acc: &BesselAccuracy,
) -> Result<f64> {
    Ok(phi_squared(alpha, coord, trunc, acc)? - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, TAU};

    fn alpha(a: f64) -> AnyonParameter {
        AnyonParameter::new(a).unwrap()
    }

    fn defaults() -> (TruncationPolicy, BesselAccuracy) {
        (TruncationPolicy::default(), BesselAccuracy::default())
    }

    #[test]
    fn policy_validation() {
        assert!(TruncationPolicy::new(40, 0.0, 2000).is_err());
        assert!(TruncationPolicy::new(40, 1e-14, 39).is_err());
        assert!(TruncationPolicy::new(0, 1e-14, 10).is_ok());
    }

    #[test]
    fn endpoints_use_closed_form() {
        let (t, a) = defaults();
        for &(q, r) in &[(0.0, 3.0), (1.0, 0.4), (2.5, 3.1), (7.0, 1.3)] {
            let j0 = bessel_j(0.0, 2.0 * q * r, &a).unwrap();
            let b = kernel_k0(AnyonParameter::BOSON, q, r, &t, &a).unwrap();
            let f = kernel_k0(AnyonParameter::FERMION, q, r, &t, &a).unwrap();
            assert_eq!(b.value, j0);
            assert_eq!(f.value, -j0);
            assert_eq!(b.tail_estimate, 0.0);
        }
    }

    #[test]
    fn fractional_at_zero_is_minus_one() {
        let (t, a) = defaults();
        let k = kernel_k0(alpha(0.5), 0.0, 1.0, &t, &a).unwrap();
        assert_eq!(k.value, -1.0);
        let k = kernel_k0(alpha(0.5), 3.0, 0.0, &t, &a).unwrap();
        assert_eq!(k.value, -1.0);
    }

    #[test]
    fn fractional_reference_values() {
        // mpmath, 40 digits, l ∈ [−400, 400] (tests/oracles/gen_oracles.py)
        let (t, a) = defaults();
        let cases = [
            (0.5, 2.0, 0.119_306_882_093_713_148_68),
            (0.3, 5.7, -0.073_508_832_398_821_501_219),
            (0.7, 12.0, 0.028_143_159_866_494_253_709),
            (0.1, 0.5, 0.496_586_739_159_142_824_58),
            (0.9, 25.0, -0.053_834_472_007_680_320_97),
        ];
        for (al, x, want) in cases {
            let k = kernel_k0(alpha(al), x, 1.0, &t, &a).unwrap();
            assert!(
                (k.value - want).abs() <= 10.0 * t.term_tolerance(),
                "alpha={al} x={x}: {} vs {want}",
                k.value
            );
            assert!(k.tail_estimate <= t.term_tolerance());
            assert!(k.terms_used >= (x + 40.0) as usize);
        }
    }

    #[test]
    fn kernel_full_limits() {
        let (t, a) = defaults();
        let c = RelativeCoordinate::new(1.0, 0.0, 0.4).unwrap();
        assert_eq!(kernel_full(AnyonParameter::BOSON, &c, &t, &a).unwrap(), 1.0);
        assert_eq!(
            kernel_full(AnyonParameter::FERMION, &c, &t, &a).unwrap(),
            -1.0
        );
        let c = RelativeCoordinate::new(1.0, FRAC_PI_4, 0.0).unwrap();
        assert!(
            kernel_full(AnyonParameter::BOSON, &c, &t, &a)
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn neumann_identities() {
        let (t, a) = defaults();
        for i in 0..=300 {
            let x = 30.0 * i as f64 / 300.0;
            let j0 = bessel_j(0.0, 2.0 * x, &a).unwrap();
            let b = partial_wave_kernel(AnyonParameter::BOSON, x, &t, &a).unwrap();
            let f = partial_wave_kernel(AnyonParameter::FERMION, x, &t, &a).unwrap();
            assert!((b.value - j0).abs() <= 1e-9, "x={x}");
            assert!((f.value + j0).abs() <= 1e-9, "x={x}");
        }
    }

    #[test]
    fn angle_average_matches() {
        let (t, a) = defaults();
        let n = 512;
        for &al in &[0.0, 0.3, 0.7, 1.0] {
            for &x in &[0.0, 0.8, 3.3, 9.0] {
                let mean: f64 = (0..n)
                    .map(|j| {
                        let c = RelativeCoordinate::new(1.0, x, TAU * j as f64 / n as f64).unwrap();
                        kernel_full(alpha(al), &c, &t, &a).unwrap()
                    })
                    .sum::<f64>()
                    / n as f64;
                let k = kernel_k0(alpha(al), 1.0, x, &t, &a).unwrap();
                assert!((mean - k.value).abs() <= 1e-6, "alpha={al} x={x}");
            }
        }
    }

    #[test]
    fn bounds_and_decay() {
        let (t, a) = defaults();
        for i in 0..=20 {
            let al = i as f64 / 20.0;
            for j in 0..=60 {
                let x = j as f64;
                let k = kernel_k0(alpha(al), 1.0, x, &t, &a).unwrap();
                assert!(
                    k.value >= -1.0 - 1e-10 && k.value <= 1.0 + 1e-8,
                    "alpha={al} x={x}"
                );
                if x >= 30.0 {
                    assert!(k.value.abs() <= 0.2, "alpha={al} x={x}: {}", k.value);
                }
            }
        }
    }

    #[test]
    fn continuity_at_endpoints() {
        let (t, a) = defaults();
        // qr = 0 excluded: every fractional α gives K = −1 there.
        for i in 1..=200 {
            let x = 10.0 * i as f64 / 200.0;
            let b0 = kernel_k0(AnyonParameter::BOSON, 1.0, x, &t, &a)
                .unwrap()
                .value;
            let b1 = kernel_k0(alpha(1e-6), 1.0, x, &t, &a).unwrap().value;
            let f0 = kernel_k0(AnyonParameter::FERMION, 1.0, x, &t, &a)
                .unwrap()
                .value;
            let f1 = kernel_k0(alpha(1.0 - 1e-6), 1.0, x, &t, &a).unwrap().value;
            assert!((b0 - b1).abs() <= 1e-4, "x={x}: {b0} vs {b1}");
            assert!((f0 - f1).abs() <= 1e-4, "x={x}: {f0} vs {f1}");
        }
        let f0 = kernel_k0(AnyonParameter::FERMION, 1.0, 0.0, &t, &a)
            .unwrap()
            .value;
        let f1 = kernel_k0(alpha(1.0 - 1e-6), 1.0, 0.0, &t, &a)
            .unwrap()
            .value;
        assert_eq!(f0, f1);
    }

    #[test]
    fn hard_cap_reported() {
        let tight = TruncationPolicy::new(2, 1e-14, 20).unwrap();
        let err = kernel_k0(alpha(0.4), 1.0, 25.0, &tight, &BesselAccuracy::default()).unwrap_err();
        assert!(
            matches!(err, Error::TruncationFailure { l: 20, .. }),
            "{err:?}"
        );
    }
}
