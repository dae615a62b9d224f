//! Normalized, angle-averaged pair-separation densities `S(r)` in two
//! dimensions, `2π ∫₀^∞ r S(r) dr = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, AdaptiveRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Gaussian,
    Step,
    Tabulated,
}

impl fmt::Display for SourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SourceKind::Gaussian => "gaussian",
            SourceKind::Step => "step",
            SourceKind::Tabulated => "tabulated",
        })
    }
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(SourceKind::Gaussian),
            "step" => Ok(SourceKind::Step),
            "tabulated" => Ok(SourceKind::Tabulated),
            other => Err(Error::InvalidParameter(format!(
                "unknown source kind '{other}' (expected gaussian, step or tabulated)"
            ))),
        }
    }
}

/// How the `r` column of a tabulated source is expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TableUnits {
    /// Multiples of the source width `r0`.
    R0,
    #[default]
    Absolute,
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    r: Vec<f64>,
    s: Vec<f64>,
    /// Cumulative probability `2π ∫₀^{r_i} t S(t) dt` at each node.
    cdf: Vec<f64>,
}

impl Table {
    fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Table("at least two (r, S) rows are required".into()));
        }
        for (i, &(r, s)) in points.iter().enumerate() {
            if !r.is_finite() || !s.is_finite() || r < 0.0 || s < 0.0 {
                return Err(Error::Table(format!(
                    "row {}: r and S must be finite and non-negative, got ({r}, {s})",
                    i + 1
                )));
            }
            if i > 0 && r <= points[i - 1].0 {
                return Err(Error::Table(format!(
                    "row {}: r must increase strictly ({} after {})",
                    i + 1,
                    r,
                    points[i - 1].0
                )));
            }
        }
        let r: Vec<f64> = points.iter().map(|p| p.0).collect();
        let mut s: Vec<f64> = points.iter().map(|p| p.1).collect();
        let mut cdf = Vec::with_capacity(r.len());
        cdf.push(0.0);
        for i in 1..r.len() {
            cdf.push(cdf[i - 1] + 2.0 * PI * segment_mass(r[i - 1], r[i], s[i - 1], s[i]));
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) {
            return Err(Error::Table("profile has zero total weight".into()));
        }
        for v in &mut s {
            *v /= total;
        }
        for v in &mut cdf {
            *v /= total;
        }
        Ok(Self { r, s, cdf })
    }

    fn density(&self, r: f64) -> f64 {
        let (first, last) = (self.r[0], *self.r.last().unwrap());
        if r < first || r > last {
            return 0.0;
        }
        let i = self
            .r
            .partition_point(|&x| x <= r)
            .clamp(1, self.r.len() - 1);
        let (a, b) = (self.r[i - 1], self.r[i]);
        let t = (r - a) / (b - a);
        self.s[i - 1] + t * (self.s[i] - self.s[i - 1])
    }

    /// Inverse of the piecewise-cubic CDF of the linearly interpolated table.
    fn quantile(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c <= u)
            .clamp(1, self.r.len() - 1);
        let (a, b) = (self.r[i - 1], self.r[i]);
        let (sa, sb) = (self.s[i - 1], self.s[i]);
        let target = u - self.cdf[i - 1];
        let (mut lo, mut hi) = (a, b);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let s_mid = sa + (sb - sa) * (mid - a) / (b - a);
            if 2.0 * PI * segment_mass(a, mid, sa, s_mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `∫_a^b r S(r) dr` for `S` linear from `sa` to `sb`.
fn segment_mass(a: f64, b: f64, sa: f64, sb: f64) -> f64 {
    (b - a) / 6.0 * (a * (2.0 * sa + sb) + b * (sa + 2.0 * sb))
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Gaussian,
    Step,
    Tabulated(Table),
}

/// An immutable, normalized radial source with width `r0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSource {
    r0: f64,
    shape: Shape,
}

/// Kind and width of a source, as carried by scan results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceDescriptor {
    pub kind: SourceKind,
    pub r0: f64,
}

fn check_r0(r0: f64) -> Result<()> {
    if r0 > 0.0 && r0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "r0 must be positive, got {r0}"
        )))
    }
}

impl RadialSource {
    /// `S(r) = exp(−r²/4r0²) / (4π r0²)`
    pub fn gaussian(r0: f64) -> Result<Self> {
        check_r0(r0)?;
        Ok(Self {
            r0,
            shape: Shape::Gaussian,
        })
    }

    /// `S(r) = Θ(r0 − r) / (π r0²)`, with the inside value taken at `r = r0`.
    pub fn step(r0: f64) -> Result<Self> {
        check_r0(r0)?;
        Ok(Self {
            r0,
            shape: Shape::Step,
        })
    }

    /// Linear interpolation through `(r, S)` rows, rescaled to unit
    /// normalization.
    pub fn tabulated(r0: f64, points: &[(f64, f64)], units: TableUnits) -> Result<Self> {
        check_r0(r0)?;
        let scale = match units {
            TableUnits::R0 => r0,
            TableUnits::Absolute => 1.0,
        };
        let scaled: Vec<(f64, f64)> = points.iter().map(|&(r, s)| (r * scale, s)).collect();
        Ok(Self {
            r0,
            shape: Shape::Tabulated(Table::new(&scaled)?),
        })
    }

    /// Parses the plain-text table format: one `r value` pair per line,
    /// `#` comments, and an optional `# units: r0 | absolute` header
    /// (absolute when absent).
    pub fn parse_table(text: &str, r0: f64) -> Result<Self> {
        let mut units = TableUnits::default();
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let (body, comment) = match line.split_once('#') {
                Some((b, c)) => (b, Some(c)),
                None => (line, None),
            };
            if let Some(c) = comment {
                if let Some(u) = c.trim().strip_prefix("units:") {
                    units = match u.trim() {
                        "r0" => TableUnits::R0,
                        "absolute" => TableUnits::Absolute,
                        other => {
                            return Err(Error::Table(format!(
                                "line {}: unknown units '{other}'",
                                n + 1
                            )))
                        }
                    };
                }
            }
            let fields: Vec<&str> = body.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [r, s] => {
                    let parse = |v: &str| {
                        v.parse::<f64>().map_err(|_| {
                            Error::Table(format!("line {}: cannot parse number '{v}'", n + 1))
                        })
                    };
                    points.push((parse(r)?, parse(s)?));
                }
                _ => {
                    return Err(Error::Table(format!(
                        "line {}: expected two columns, found {}",
                        n + 1,
                        fields.len()
                    )))
                }
            }
        }
        Self::tabulated(r0, &points, units)
    }

    pub fn from_table_file(path: impl AsRef<Path>, r0: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Table(format!("{}: {e}", path.display())))?;
        Self::parse_table(&text, r0)
    }

    pub fn kind(&self) -> SourceKind {
        match self.shape {
            Shape::Gaussian => SourceKind::Gaussian,
            Shape::Step => SourceKind::Step,
            Shape::Tabulated(_) => SourceKind::Tabulated,
        }
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn descriptor(&self) -> SourceDescriptor {
        SourceDescriptor {
            kind: self.kind(),
            r0: self.r0,
        }
    }

    /// `S(r)` in inverse area units; zero for negative `r`.
    pub fn density(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        let r0 = self.r0;
        match &self.shape {
            Shape::Gaussian => (-r * r / (4.0 * r0 * r0)).exp() / (4.0 * PI * r0 * r0),
            Shape::Step => {
                if r <= r0 {
                    1.0 / (PI * r0 * r0)
                } else {
                    0.0
                }
            }
            Shape::Tabulated(t) => t.density(r),
        }
    }

    /// Breakpoints of the radial integration range and a bound on the
    /// probability mass left beyond it.
    pub fn integration_support(&self, r_max_multiplier: f64) -> (Vec<f64>, f64) {
        match &self.shape {
            Shape::Gaussian => {
                let r_max = r_max_multiplier * self.r0;
                (
                    vec![0.0, r_max],
                    (-0.25 * r_max_multiplier * r_max_multiplier).exp(),
                )
            }
            Shape::Step => (vec![0.0, self.r0], 0.0),
            Shape::Tabulated(t) => {
                let mut bp = t.r.clone();
                if bp[0] > 0.0 {
                    bp.insert(0, 0.0);
                }
                (bp, 0.0)
            }
        }
    }

    /// Numerically integrated `2π ∫ r S(r) dr`.
    pub fn check_normalization(&self) -> f64 {
        // 40 r0 leaves e^{-400} of the Gaussian behind.
        let (breakpoints, _) = self.integration_support(40.0);
        let rule = AdaptiveRule {
            max_width: self.r0,
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_subdivisions: 200,
        };
        integrate(|r| Ok(2.0 * PI * r * self.density(r)), &breakpoints, &rule)
            .map(|i| i.value)
            .unwrap_or(f64::NAN)
    }

    /// Draws `r` from `p(r) = 2π r S(r)` by inverse transform.
    pub fn sample_r<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match &self.shape {
            Shape::Gaussian => 2.0 * self.r0 * (-(1.0 - u).ln()).sqrt(),
            Shape::Step => self.r0 * u.sqrt(),
            Shape::Tabulated(t) => t.quantile(u),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> RadialSource {
        // S ∝ (1 − r) on [0, 1]
        let pts: Vec<(f64, f64)> = (0..=10)
            .map(|i| (i as f64 / 10.0, 1.0 - i as f64 / 10.0))
            .collect();
        RadialSource::tabulated(1.0, &pts, TableUnits::Absolute).unwrap()
    }

    #[test]
    fn density_values() {
        let g = RadialSource::gaussian(1.0).unwrap();
        assert!((g.density(0.0) - 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((g.density(0.0) - 0.079_577_5).abs() < 1e-7);
        let s = RadialSource::step(1.0).unwrap();
        assert_eq!(s.density(0.5), 1.0 / PI);
        assert_eq!(s.density(1.0), 1.0 / PI);
        assert_eq!(s.density(1.5), 0.0);
        assert_eq!(s.density(1.0 + 1e-15), 0.0);
        let s2 = RadialSource::step(2.5).unwrap();
        assert_eq!(s2.density(2.4), 1.0 / (PI * 6.25));
    }

    #[test]
    fn invalid_construction() {
        assert!(RadialSource::gaussian(0.0).is_err());
        assert!(RadialSource::step(-1.0).is_err());
        assert!(RadialSource::tabulated(1.0, &[(0.0, 1.0)], TableUnits::R0).is_err());
        assert!(RadialSource::tabulated(1.0, &[(0.0, 1.0), (0.0, 1.0)], TableUnits::R0).is_err());
        assert!(RadialSource::tabulated(1.0, &[(0.0, 1.0), (1.0, -1.0)], TableUnits::R0).is_err());
        assert!(RadialSource::tabulated(1.0, &[(0.0, 0.0), (1.0, 0.0)], TableUnits::R0).is_err());
        assert!("disk".parse::<SourceKind>().is_err());
    }

    #[test]
    fn normalization() {
        for r0 in [0.3, 1.0, 2.5, 17.0] {
            assert!((RadialSource::gaussian(r0).unwrap().check_normalization() - 1.0).abs() < 1e-8);
            assert!((RadialSource::step(r0).unwrap().check_normalization() - 1.0).abs() < 1e-8);
        }
        assert!((triangle().check_normalization() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn triangle_rescale_matches_trapezoid_oracle() {
        // Trapezoid rule of 2π r (1 − r) on a fine grid gives the raw mass π/3.
        let n = 200_000;
        let h = 1.0 / n as f64;
        let raw: f64 = (0..=n)
            .map(|i| {
                let r = i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                w * 2.0 * PI * r * (1.0 - r)
            })
            .sum::<f64>()
            * h;
        let t = triangle();
        assert!((t.density(0.0) - 1.0 / raw).abs() < 1e-8);
        assert!((t.density(0.25) - 0.75 / raw).abs() < 1e-8);
        assert_eq!(t.density(1.2), 0.0);
    }

    #[test]
    fn table_units_and_parsing() {
        let text = "# demo profile\n# units: r0\n0 1 # centre\n1.0 0.5\n\n2 0\n";
        let t = RadialSource::parse_table(text, 2.0).unwrap();
        assert_eq!(t.kind(), SourceKind::Tabulated);
        // nodes scaled to 0, 2, 4
        assert!(t.density(4.0) == 0.0 && t.density(3.0) > 0.0 && t.density(4.1) == 0.0);
        assert!((t.check_normalization() - 1.0).abs() < 1e-8);
        let abs = RadialSource::parse_table("0 1\n1 0.5\n2 0\n", 2.0).unwrap();
        assert!(abs.density(3.0) == 0.0);
        assert!(RadialSource::parse_table("0 1 3\n1 0\n", 1.0).is_err());
        assert!(RadialSource::parse_table("# units: furlongs\n0 1\n1 0\n", 1.0).is_err());
        assert!(RadialSource::parse_table("0 x\n1 0\n", 1.0).is_err());
    }

    fn sample_mean(src: &RadialSource, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let r = src.sample_r(&mut rng);
            assert!(r >= 0.0);
            s1 += r;
            s2 += r * r;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        (mean, (var / n as f64).sqrt())
    }

    #[test]
    fn sampling_means() {
        let n = 1_000_000;
        let (m, se) = sample_mean(&RadialSource::step(1.0).unwrap(), n, 7);
        assert!((m - 2.0 / 3.0).abs() <= 3.0 * se, "step mean {m} ± {se}");
        let (m, se) = sample_mean(&RadialSource::gaussian(1.0).unwrap(), n, 8);
        assert!(
            (m - PI.sqrt()).abs() <= 3.0 * se,
            "gaussian mean {m} ± {se}"
        );
        // triangle: E[r] = ∫ r·2πr(1−r)/(π/3) dr = 6(1/3 − 1/4) = 1/2
        let (m, se) = sample_mean(&triangle(), n, 9);
        assert!((m - 0.5).abs() <= 3.0 * se, "triangle mean {m} ± {se}");
    }

    #[test]
    fn sampling_histogram() {
        let n = 1_000_000;
        let bins = 50;
        for src in [
            RadialSource::gaussian(1.0).unwrap(),
            RadialSource::step(1.0).unwrap(),
            triangle(),
        ] {
            let (bp, _) = src.integration_support(12.0);
            let top = *bp.last().unwrap();
            let width = top / bins as f64;
            let mut counts = vec![0usize; bins];
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            for _ in 0..n {
                let r = src.sample_r(&mut rng);
                let b = ((r / width) as usize).min(bins - 1);
                counts[b] += 1;
            }
            let rule = AdaptiveRule {
                max_width: width,
                abs_tol: 1e-13,
                rel_tol: 1e-13,
                max_subdivisions: 50,
            };
            for (b, &c) in counts.iter().enumerate() {
                let (lo, hi) = (b as f64 * width, (b + 1) as f64 * width);
                let mut p = integrate(|r| Ok(2.0 * PI * r * src.density(r)), &[lo, hi], &rule)
                    .unwrap()
                    .value;
                if b == bins - 1 {
                    p = 1.0
                        - integrate(|r| Ok(2.0 * PI * r * src.density(r)), &[0.0, lo], &rule)
                            .unwrap()
                            .value;
                }
                let expected = p * n as f64;
                let sigma = expected.max(1.0).sqrt();
                assert!(
                    (c as f64 - expected).abs() <= 4.0 * sigma + 1.0,
                    "{:?} bin {b}: {c} vs {expected}",
                    src.kind()
                );
            }
        }
    }
}
