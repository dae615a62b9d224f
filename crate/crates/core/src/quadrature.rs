//! Adaptive composite Gauss–Legendre integration on a list of breakpoints.
//!
//! Every panel is integrated with a 10-point rule, once whole and once as two
//! halves; the difference is the panel's error estimate. Panels are bisected
//! worst-first until the summed estimate meets `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 10;

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1], found by
/// Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn panel_sum<F>(f: &mut F, a: f64, b: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        sum += w * f(mid + half * x)?;
    }
    Ok(half * sum)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    coarse: f64,
    left: f64,
    right: f64,
}

impl Panel {
    fn build<F>(f: &mut F, a: f64, b: f64, coarse: Option<f64>) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mid = 0.5 * (a + b);
        let coarse = match coarse {
            Some(c) => c,
            None => panel_sum(f, a, b)?,
        };
        Ok(Self {
            a,
            b,
            coarse,
            left: panel_sum(f, a, mid)?,
            right: panel_sum(f, mid, b)?,
        })
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }

    fn error(&self) -> f64 {
        (self.value() - self.coarse).abs()
    }
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error()
            .total_cmp(&other.error())
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveRule {
    /// Upper bound on the width of the initial panels.
    pub max_width: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
    pub subdivisions: usize,
}

/// Integrates `f` over `[breakpoints[0], breakpoints[last]]`, never letting a
/// panel straddle an interior breakpoint.
pub fn integrate<F>(mut f: F, breakpoints: &[f64], rule: &AdaptiveRule) -> Result<Integral>
where
    F: FnMut(f64) -> Result<f64>,
{
    if breakpoints.len() < 2 {
        return Err(Error::InvalidParameter(
            "integration needs at least two breakpoints".into(),
        ));
    }
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(b > a) {
            return Err(Error::InvalidParameter(format!(
                "breakpoints must increase strictly, got {a} then {b}"
            )));
        }
        let count = ((b - a) / rule.max_width).ceil().max(1.0) as usize;
        let width = (b - a) / count as f64;
        for i in 0..count {
            let lo = a + width * i as f64;
            let hi = if i + 1 == count { b } else { lo + width };
            heap.push(Panel::build(&mut f, lo, hi, None)?);
        }
    }

    let mut subdivisions = 0;
    loop {
        let value: f64 = ordered_sum(&heap, Panel::value);
        let error: f64 = ordered_sum(&heap, Panel::error);
        let tol = rule.abs_tol.max(rule.rel_tol * value.abs());
        if error <= tol {
            return Ok(Integral {
                value,
                error,
                panels: heap.len(),
                subdivisions,
            });
        }
        if subdivisions >= rule.max_subdivisions {
            return Err(Error::QuadratureFailure {
                err_est: error,
                tol,
                subdivisions,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        heap.push(Panel::build(&mut f, worst.a, mid, Some(worst.left))?);
        heap.push(Panel::build(&mut f, mid, worst.b, Some(worst.right))?);
        subdivisions += 1;
    }
}

/// Sums a per-panel quantity in ascending position so the result does not
/// depend on heap layout.
fn ordered_sum(heap: &BinaryHeap<Panel>, g: fn(&Panel) -> f64) -> f64 {
    let mut panels: Vec<&Panel> = heap.iter().collect();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    panels.into_iter().map(g).sum()
}
