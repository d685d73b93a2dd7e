//! Ensembles of hidden variables over the initial square `[−Δ/2, Δ/2)²`.
//!
//! Monte Carlo samples are drawn from a ChaCha8 stream keyed by
//! `(seed, index)`, so every sample is reproducible on its own and parallel
//! evaluation does not depend on scheduling. Reductions run over fixed-size
//! chunks whose partial sums are combined in index order.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::packet::SquarePacket;
use crate::trajectory::HiddenVariable;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

const CHUNK: usize = 4096;

/// Default grid resolution for quadrature-style fractions.
pub const DEFAULT_GRID: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Per-cell weights on a `rows × cols` grid over the initial square. Row `i`
/// covers the `i`-th band of `r_B` from below, column `j` the `j`-th band of
/// `r_A` from the left. Stored normalized to unit sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWeights {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
}

impl GridWeights {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(
                "ensemble.grid",
                "grid must have at least one cell",
            ));
        }
        if weights.len() != rows * cols {
            return Err(Error::invalid(
                "ensemble.grid",
                format!("expected {} weights, got {}", rows * cols, weights.len()),
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid(
                "ensemble.grid",
                "weights must be finite and nonnegative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::invalid("ensemble.grid", "weights sum to zero"));
        }
        Ok(GridWeights {
            rows,
            cols,
            weights: weights.into_iter().map(|w| w / total).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Parse the text format: a header `m rows cols Δ` (with `rows = cols = m`)
    /// followed by `m × m` nonnegative weights in row-major order. Lines
    /// starting with `#` are ignored. Returns the weights and the width `Δ`.
    pub fn parse(text: &str) -> Result<(GridWeights, f64)> {
        let mut tokens = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim_start().starts_with('#'))
            .flat_map(|(n, l)| l.split_whitespace().map(move |tok| (n + 1, tok)));
        let mut header = |what: &str| -> Result<(usize, &str)> {
            tokens.next().ok_or(Error::Parse {
                line: 1,
                message: format!("missing header field `{what}`"),
            })
        };
        let parse_usize = |(line, tok): (usize, &str), what: &str| {
            tok.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("`{what}` must be a positive integer, got `{tok}`"),
            })
        };
        let m = parse_usize(header("m")?, "m")?;
        let rows = parse_usize(header("rows")?, "rows")?;
        let cols = parse_usize(header("cols")?, "cols")?;
        let (line, tok) = header("width")?;
        let width: f64 = tok.parse().map_err(|_| Error::Parse {
            line,
            message: format!("width must be a number, got `{tok}`"),
        })?;
        if rows != m || cols != m {
            return Err(Error::Parse {
                line,
                message: format!("grid must be square: m = {m}, rows = {rows}, cols = {cols}"),
            });
        }
        let mut weights = Vec::with_capacity(m * m);
        for (line, tok) in tokens {
            let w: f64 = tok.parse().map_err(|_| Error::Parse {
                line,
                message: format!("weight must be a number, got `{tok}`"),
            })?;
            weights.push(w);
        }
        SquarePacket::new(width)?;
        Ok((GridWeights::new(m, m, weights)?, width))
    }

    /// Inverse of [`GridWeights::parse`] (requires a square grid).
    pub fn to_text(&self, width: f64) -> String {
        let mut s = format!("{} {} {} {}\n", self.rows, self.rows, self.cols, width);
        for row in self.weights.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|w| format!("{w:e}")).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    fn cell_of(&self, lambda: &HiddenVariable, half: f64) -> Option<usize> {
        let fa = (lambda.r_a + half) / (2.0 * half);
        let fb = (lambda.r_b + half) / (2.0 * half);
        if !(0.0..1.0).contains(&fa) || !(0.0..1.0).contains(&fb) {
            return None;
        }
        let j = ((fa * self.cols as f64) as usize).min(self.cols - 1);
        let i = ((fb * self.rows as f64) as usize).min(self.rows - 1);
        Some(i * self.cols + j)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DistributionKind {
    Equilibrium,
    /// Uniform on `[a_min, a_max) × [b_min, b_max)`.
    SubRectangle {
        a_min: f64,
        a_max: f64,
        b_min: f64,
        b_max: f64,
    },
    HalfSquare {
        side: Side,
    },
    /// Uniform on the quadrant with the given signs of `r_A`, `r_B`.
    Quadrant {
        a_positive: bool,
        b_positive: bool,
    },
    /// `ρ ∝ 1 + slope · r_A` with `|slope| ≤ 2/Δ`.
    LinearTilt {
        slope: f64,
    },
    GridWeights(GridWeights),
    PointMass(HiddenVariable),
}

/// A normalized distribution `ρ(λ)` on the initial square.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleDistribution {
    kind: DistributionKind,
    packet: SquarePacket,
}

/// Uniform equilibrium density `1/Δ²` on the initial square.
pub fn equilibrium_distribution(packet: SquarePacket) -> EnsembleDistribution {
    EnsembleDistribution {
        kind: DistributionKind::Equilibrium,
        packet,
    }
}

impl EnsembleDistribution {
    pub fn new(kind: DistributionKind, packet: SquarePacket) -> Result<Self> {
        let h = packet.half();
        match &kind {
            DistributionKind::SubRectangle {
                a_min,
                a_max,
                b_min,
                b_max,
            } => {
                let ok = |lo: f64, hi: f64| {
                    lo.is_finite() && hi.is_finite() && -h <= lo && lo < hi && hi <= h
                };
                if !ok(*a_min, *a_max) || !ok(*b_min, *b_max) {
                    return Err(Error::invalid(
                        "ensemble.rect",
                        "sub-rectangle must have positive area inside the initial square",
                    ));
                }
            }
            DistributionKind::LinearTilt { slope } => {
                if !slope.is_finite() || slope.abs() * h > 1.0 {
                    return Err(Error::invalid(
                        "ensemble.slope",
                        format!("|slope| must not exceed 2/Δ = {}", 1.0 / h),
                    ));
                }
            }
            DistributionKind::PointMass(l) if !l.inside(&packet) => {
                return Err(Error::invalid(
                    "ensemble.point",
                    "point mass must lie in the initial square",
                ));
            }
            _ => {}
        }
        Ok(EnsembleDistribution { kind, packet })
    }

    pub fn kind(&self) -> &DistributionKind {
        &self.kind
    }

    pub fn packet(&self) -> &SquarePacket {
        &self.packet
    }

    pub fn is_equilibrium(&self) -> bool {
        matches!(self.kind, DistributionKind::Equilibrium)
    }

    /// Rectangle `[a_min, a_max) × [b_min, b_max)` for uniform kinds.
    fn uniform_support(&self) -> Option<[f64; 4]> {
        let h = self.packet.half();
        Some(match self.kind {
            DistributionKind::Equilibrium => [-h, h, -h, h],
            DistributionKind::SubRectangle {
                a_min,
                a_max,
                b_min,
                b_max,
            } => [a_min, a_max, b_min, b_max],
            DistributionKind::HalfSquare { side } => match side {
                Side::Left => [-h, 0.0, -h, h],
                Side::Right => [0.0, h, -h, h],
                Side::Bottom => [-h, h, -h, 0.0],
                Side::Top => [-h, h, 0.0, h],
            },
            DistributionKind::Quadrant {
                a_positive,
                b_positive,
            } => {
                let (a0, a1) = if a_positive { (0.0, h) } else { (-h, 0.0) };
                let (b0, b1) = if b_positive { (0.0, h) } else { (-h, 0.0) };
                [a0, a1, b0, b1]
            }
            _ => return None,
        })
    }

    /// Probability density at `λ`. A point mass has no density and returns 0.
    pub fn density(&self, lambda: &HiddenVariable) -> f64 {
        if !lambda.inside(&self.packet) {
            return 0.0;
        }
        if let Some([a0, a1, b0, b1]) = self.uniform_support() {
            let inside = lambda.r_a >= a0 && lambda.r_a < a1 && lambda.r_b >= b0 && lambda.r_b < b1;
            return if inside {
                1.0 / ((a1 - a0) * (b1 - b0))
            } else {
                0.0
            };
        }
        let area = self.packet.width * self.packet.width;
        match &self.kind {
            DistributionKind::LinearTilt { slope } => (1.0 + slope * lambda.r_a) / area,
            DistributionKind::GridWeights(g) => g
                .cell_of(lambda, self.packet.half())
                .map_or(0.0, |c| g.weights[c] * (g.rows * g.cols) as f64 / area),
            DistributionKind::PointMass(_) => 0.0,
            _ => unreachable!("uniform kinds handled above"),
        }
    }

    /// The `index`-th sample of the stream keyed by `seed`.
    pub fn sample_at(&self, seed: u64, index: u64) -> HiddenVariable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let u: f64 = rng.random();
        let w: f64 = rng.random();
        let h = self.packet.half();
        if let Some([a0, a1, b0, b1]) = self.uniform_support() {
            return HiddenVariable::new(a0 + (a1 - a0) * u, b0 + (b1 - b0) * w);
        }
        match &self.kind {
            DistributionKind::LinearTilt { slope } => {
                let r_b = -h + 2.0 * h * w;
                let c = *slope;
                let r_a = if c.abs() < 1e-12 {
                    -h + 2.0 * h * u
                } else {
                    // invert F(x) = ((x + h) + c (x² − h²) / 2) / (2h)
                    let k = h - 0.5 * c * h * h - 2.0 * h * u;
                    let disc = (1.0 - 2.0 * c * k).max(0.0);
                    (-1.0 + disc.sqrt()) / c
                };
                HiddenVariable::new(r_a.clamp(-h, h * (1.0 - f64::EPSILON)), r_b)
            }
            DistributionKind::GridWeights(g) => {
                let mut acc = 0.0;
                let mut cell = g.weights.len() - 1;
                for (k, wk) in g.weights.iter().enumerate() {
                    acc += wk;
                    if u < acc {
                        cell = k;
                        break;
                    }
                }
                let (i, j) = (cell / g.cols, cell % g.cols);
                let v: f64 = rng.random();
                let da = 2.0 * h / g.cols as f64;
                let db = 2.0 * h / g.rows as f64;
                HiddenVariable::new(-h + (j as f64 + v) * da, -h + (i as f64 + w) * db)
            }
            DistributionKind::PointMass(l) => *l,
            _ => unreachable!("uniform kinds handled above"),
        }
    }

    pub fn sample(&self, seed: u64, n: usize) -> Result<SampleStream> {
        if n == 0 {
            return Err(Error::invalid(
                "method.n",
                "sample count must be at least 1",
            ));
        }
        Ok(SampleStream {
            seed,
            samples: (0..n as u64).map(|i| self.sample_at(seed, i)).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStream {
    pub seed: u64,
    pub samples: Vec<HiddenVariable>,
}

impl SampleStream {
    pub fn count(&self) -> usize {
        self.samples.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    MonteCarlo {
        n: usize,
        seed: u64,
    },
    /// Midpoint rule on an `m × m` grid of cells.
    Grid {
        m: usize,
    },
}

impl Method {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Method::MonteCarlo { n: 0, .. } => {
                Err(Error::invalid("method.n", "must be at least 1"))
            }
            Method::Grid { m: 0 } => Err(Error::invalid("method.m", "must be at least 1")),
            _ => Ok(()),
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Method::MonteCarlo {
            n: 1_000_000,
            seed: 42,
        }
    }
}

/// A value with its method error: one binomial/sample standard error for
/// Monte Carlo, the perimeter bound for grid quadrature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    /// `|value − target| ≤ k · error`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.value - target).abs() <= k * self.error
    }
}

#[derive(Clone, Copy)]
struct Partial<const K: usize> {
    w: f64,
    wf: [f64; K],
    wf2: [f64; K],
    sup: [f64; K],
    w_max: f64,
}

impl<const K: usize> Partial<K> {
    fn zero() -> Self {
        Partial {
            w: 0.0,
            wf: [0.0; K],
            wf2: [0.0; K],
            sup: [0.0; K],
            w_max: 0.0,
        }
    }

    fn add(&mut self, w: f64, f: &[f64; K]) {
        self.w += w;
        self.w_max = self.w_max.max(w);
        for (k, &x) in f.iter().enumerate() {
            self.wf[k] += w * x;
            self.wf2[k] += w * x * x;
            self.sup[k] = self.sup[k].max(x.abs());
        }
    }

    fn merge(mut self, o: &Self) -> Self {
        self.w += o.w;
        self.w_max = self.w_max.max(o.w_max);
        for k in 0..K {
            self.wf[k] += o.wf[k];
            self.wf2[k] += o.wf2[k];
            self.sup[k] = self.sup[k].max(o.sup[k]);
        }
        self
    }
}

/// Chunked, order-preserving map-reduce over `0..n`.
fn reduce<const K: usize, F>(n: usize, item: F) -> Result<Partial<K>>
where
    F: Fn(usize) -> Result<Option<(f64, [f64; K])>> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let run = |c: usize| -> Result<Partial<K>> {
        let mut p = Partial::zero();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            if let Some((w, f)) = item(i)? {
                p.add(w, &f);
            }
        }
        Ok(p)
    };
    #[cfg(feature = "parallel")]
    let partials: Vec<Result<Partial<K>>> = (0..chunks).into_par_iter().map(run).collect();
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Result<Partial<K>>> = (0..chunks).map(run).collect();
    partials
        .into_iter()
        .try_fold(Partial::zero(), |acc, p| Ok(acc.merge(&p?)))
}

/// A probability density on the square `[−half, half)²` that can be
/// integrated by [`integrate`].
pub trait Density: Sync {
    /// Half-width of the bounding square used by grid quadrature.
    fn half_width(&self) -> f64;
    /// Unnormalized weights are fine; grid quadrature renormalizes.
    fn density_at(&self, x: f64, y: f64) -> f64;
    fn sample_point(&self, seed: u64, index: u64) -> (f64, f64);
    /// A single atom carrying all the mass, if any.
    fn atom(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Density for EnsembleDistribution {
    fn half_width(&self) -> f64 {
        self.packet.half()
    }
    fn density_at(&self, x: f64, y: f64) -> f64 {
        self.density(&HiddenVariable::new(x, y))
    }
    fn sample_point(&self, seed: u64, index: u64) -> (f64, f64) {
        let l = self.sample_at(seed, index);
        (l.r_a, l.r_b)
    }
    fn atom(&self) -> Option<(f64, f64)> {
        match self.kind {
            DistributionKind::PointMass(l) => Some((l.r_a, l.r_b)),
            _ => None,
        }
    }
}

/// Expectations of a vector-valued function of a point under `dist`, each
/// with its method error.
pub fn integrate<const K: usize, D, F>(dist: &D, f: F, method: Method) -> Result<[Estimate; K]>
where
    D: Density + ?Sized,
    F: Fn(f64, f64) -> Result<[f64; K]> + Sync,
{
    method.validate()?;
    if let Some((x, y)) = dist.atom() {
        return Ok(f(x, y)?.map(Estimate::exact));
    }
    match method {
        Method::MonteCarlo { n, seed } => {
            let p = reduce(n, |i| {
                let (x, y) = dist.sample_point(seed, i as u64);
                Ok(Some((1.0, f(x, y)?)))
            })?;
            let nf = n as f64;
            Ok(std::array::from_fn(|k| {
                let mean = p.wf[k] / nf;
                let var = if n > 1 {
                    ((p.wf2[k] - nf * mean * mean) / (nf - 1.0)).max(0.0)
                } else {
                    0.0
                };
                Estimate {
                    value: mean,
                    error: (var / nf).sqrt(),
                }
            }))
        }
        Method::Grid { m } => {
            let h = dist.half_width();
            let cell = 2.0 * h / m as f64;
            let p = reduce(m * m, |idx| {
                let (i, j) = (idx / m, idx % m);
                let x = -h + (j as f64 + 0.5) * cell;
                let y = -h + (i as f64 + 0.5) * cell;
                let w = dist.density_at(x, y);
                if w > 0.0 {
                    Ok(Some((w, f(x, y)?)))
                } else {
                    Ok(None)
                }
            })?;
            if !(p.w > 0.0) {
                return Err(Error::invalid(
                    "method.m",
                    "grid misses the support of the distribution",
                ));
            }
            // boundary cells of a region inside the unit square: ≤ perimeter · m
            let peak = p.w_max * (m * m) as f64 / p.w;
            Ok(std::array::from_fn(|k| Estimate {
                value: p.wf[k] / p.w,
                error: 4.0 * peak * p.sup[k] / m as f64,
            }))
        }
    }
}

/// Expectations `E_ρ[f_k(λ)]` over hidden variables.
pub fn expectation<const K: usize, F>(
    dist: &EnsembleDistribution,
    f: F,
    method: Method,
) -> Result<[Estimate; K]>
where
    F: Fn(HiddenVariable) -> Result<[f64; K]> + Sync,
{
    integrate(dist, |x, y| f(HiddenVariable::new(x, y)), method)
}

/// `∫ 1[indicator(λ)] ρ(λ) dλ`.
pub fn region_fraction<F>(
    dist: &EnsembleDistribution,
    indicator: F,
    method: Method,
) -> Result<Estimate>
where
    F: Fn(HiddenVariable) -> bool + Sync,
{
    let [e] = expectation(dist, |l| Ok([if indicator(l) { 1.0 } else { 0.0 }]), method)?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn unit() -> SquarePacket {
        SquarePacket::default()
    }

    fn dist(kind: DistributionKind) -> EnsembleDistribution {
        EnsembleDistribution::new(kind, unit()).unwrap()
    }

    #[test]
    fn equilibrium_fractions() {
        let eq = equilibrium_distribution(unit());
        assert_eq!(eq.density(&HiddenVariable::new(0.1, -0.2)), 1.0);
        assert_eq!(eq.density(&HiddenVariable::new(0.5, 0.0)), 0.0);
        let g = Method::Grid { m: 100 };
        assert_eq!(
            region_fraction(&eq, |l| l.r_a >= 0.0, g).unwrap().value,
            0.5
        );
        assert_eq!(
            region_fraction(&eq, |l| l.r_a >= 0.0 && l.r_b >= 0.0, g)
                .unwrap()
                .value,
            0.25
        );
        let diag = region_fraction(&eq, |l| l.r_a > l.r_b, Method::Grid { m: 1000 }).unwrap();
        assert!((diag.value - 0.5).abs() < 1e-3 && diag.error <= 4e-3);
    }

    #[test]
    fn monte_carlo_quadrants() {
        let eq = equilibrium_distribution(unit());
        let n = 1_000_000;
        let sigma = (0.25f64 * 0.75 / n as f64).sqrt();
        for (pa, pb) in [(true, true), (true, false), (false, true), (false, false)] {
            let e = region_fraction(
                &eq,
                |l| (l.r_a >= 0.0) == pa && (l.r_b >= 0.0) == pb,
                Method::MonteCarlo { n, seed: 42 },
            )
            .unwrap();
            assert!((e.value - 0.25).abs() <= 3.0 * sigma, "{e:?}");
            assert!((e.error - sigma).abs() < 1e-6);
        }
    }

    #[test]
    fn point_mass_samples() {
        let l0 = HiddenVariable::new(0.1, -0.3);
        let d = dist(DistributionKind::PointMass(l0));
        let s = d.sample(7, 100).unwrap();
        assert!(s.samples.iter().all(|l| *l == l0));
        let e = region_fraction(&d, |l| l.r_a > 0.0, Method::Grid { m: 10 }).unwrap();
        assert_eq!(e, Estimate::exact(1.0));
    }

    #[test]
    fn half_square_has_no_mass_on_the_other_half() {
        let d = dist(DistributionKind::HalfSquare { side: Side::Right });
        let e = region_fraction(
            &d,
            |l| l.r_a < 0.0,
            Method::MonteCarlo {
                n: 1_000_000,
                seed: 3,
            },
        )
        .unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = dist(DistributionKind::LinearTilt { slope: 1.5 });
        assert_eq!(d.sample(11, 500).unwrap(), d.sample(11, 500).unwrap());
        assert_ne!(d.sample(11, 5).unwrap(), d.sample(12, 5).unwrap());
        let s = d.sample(11, 50).unwrap();
        assert_eq!(s.samples[37], d.sample_at(11, 37));
    }

    #[test]
    fn tilt_mean_matches_analytic() {
        // E[r_A] = c Δ² / 12 for ρ ∝ 1 + c r_A on [−Δ/2, Δ/2)
        let c = 1.8;
        let d = dist(DistributionKind::LinearTilt { slope: c });
        let [m] = expectation(
            &d,
            |l| Ok([l.r_a]),
            Method::MonteCarlo {
                n: 200_000,
                seed: 1,
            },
        )
        .unwrap();
        assert!(m.within(c / 12.0, 4.0), "{m:?}");
        let [g] = expectation(&d, |l| Ok([l.r_a]), Method::Grid { m: 400 }).unwrap();
        assert!((g.value - c / 12.0).abs() < 1e-5);
    }

    #[test]
    fn invalid_kinds_rejected() {
        let p = unit();
        assert!(EnsembleDistribution::new(DistributionKind::LinearTilt { slope: 2.5 }, p).is_err());
        assert!(EnsembleDistribution::new(
            DistributionKind::SubRectangle {
                a_min: 0.2,
                a_max: 0.1,
                b_min: 0.0,
                b_max: 0.1
            },
            p
        )
        .is_err());
        assert!(EnsembleDistribution::new(
            DistributionKind::PointMass(HiddenVariable::new(0.6, 0.0)),
            p
        )
        .is_err());
        assert!(GridWeights::new(2, 2, vec![0.0; 4]).is_err());
        assert!(GridWeights::new(2, 2, vec![1.0, -1.0, 1.0, 1.0]).is_err());
        assert!(equilibrium_distribution(p).sample(0, 0).is_err());
    }

    #[test]
    fn grid_weights_file_format() {
        let text = "# comment\n2 2 2 1.0\n1 0\n0 3\n";
        let (g, width) = GridWeights::parse(text).unwrap();
        assert_eq!(width, 1.0);
        assert_eq!(g.weights(), &[0.25, 0.0, 0.0, 0.75]);
        let d = dist(DistributionKind::GridWeights(g.clone()));
        // bottom-left cell weight 1/4 over area 1/4
        assert_eq!(d.density(&HiddenVariable::new(-0.3, -0.3)), 1.0);
        assert_eq!(d.density(&HiddenVariable::new(0.3, 0.3)), 3.0);
        let (back, _) = GridWeights::parse(&g.to_text(1.0)).unwrap();
        assert_eq!(back, g);
        assert!(matches!(
            GridWeights::parse("2 2 3 1.0\n1 1 1 1 1 1"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            GridWeights::parse("2 2 2 1.0\n1 x 1 1"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(GridWeights::parse("2 2 2 1.0\n1 1 1").is_err());
    }

    #[test]
    fn grid_quadrature_is_deterministic() {
        let d = dist(DistributionKind::Quadrant {
            a_positive: true,
            b_positive: false,
        });
        let f = |l: HiddenVariable| l.r_a + 2.0 * l.r_b > 0.1;
        let a = region_fraction(&d, f, Method::Grid { m: 300 }).unwrap();
        let b = region_fraction(&d, f, Method::Grid { m: 300 }).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn samples_stay_in_support(seed in any::<u64>(), slope in -2.0f64..2.0) {
            let d = dist(DistributionKind::LinearTilt { slope });
            for i in 0..64 {
                let l = d.sample_at(seed, i);
                prop_assert!(l.inside(&unit()));
                prop_assert!(d.density(&l) >= 0.0);
            }
            let q = dist(DistributionKind::Quadrant { a_positive: false, b_positive: true });
            for i in 0..64 {
                let l = q.sample_at(seed, i);
                prop_assert!(q.density(&l) > 0.0);
            }
        }
    }
}
